//! Seeded synthesis of physics-inspired surface defects.
//!
//! The crate is split along the processing chain:
//!
//! * [`field`]: numerical kernels on 2D fields (distance transform, Perlin
//!   noise, morphology, filtering, Haar wavelets, thin-plate splines,
//!   remapping, diffusion inpainting).
//! * [`maskgen`]: the fracture-line, pitting-loss and plastic-warp generators.
//! * [`overlay`]: compositing a defect mask onto a normal image.
//! * [`refine`]: Allen–Cahn relaxation, the wavelet/PDE filter and refinement
//!   metrics.
//! * [`weights`]: quality targets, per-sample weights, soft-AUC and the
//!   bilevel data-weight update on a linear toy detector.
//! * [`pipeline`]: recipes, PNG IO, batch dataset generation and the
//!   weighting demo behind the `defectforge` binary.

// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod field;
pub mod maskgen;
pub mod overlay;
pub mod pipeline;
pub mod refine;
pub mod rng;
pub mod weights;

pub use error::{Error, Result};
pub use field::{BinaryMask, ColorImage, ScalarField};
