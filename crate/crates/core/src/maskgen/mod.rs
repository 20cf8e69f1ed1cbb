//! The three defect-mask generators. Every generator takes its RNG stream
//! explicitly and consumes it in a fixed order, so a seed fully determines
//! the output.

mod fracture;
mod params;
mod pitting;
mod warp;

pub use fracture::{
    fracture_mask_from_skeleton, fracture_pre_morphology, generate_fracture, generate_skeleton, FractureOutput,
};
pub use params::{FractureParams, PittingParams, WarpParams};
pub use pitting::{generate_pitting_mask, grow_boundary, rasterize_polygon, PittingOutput};
pub use warp::{generate_warp, tps_warp_region, warp_with_controls, Roi, WarpOutput};
