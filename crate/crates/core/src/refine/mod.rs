//! Non-learned refinement: the Allen–Cahn gradient flow replaces a trained
//! refiner, driving masked pixels toward the phase wells while unmasked
//! pixels stay anchored to the input.

mod allen_cahn;
mod metrics;
mod phase;
mod wave;

pub use allen_cahn::{ac_relax, ac_step, allen_cahn_residual, ginzburg_landau_energy, pde_loss, AcParams, PHASE_CLAMP};
pub use metrics::{
    color_loss, reconstruction_losses, refinement_metrics, region_loss, tv_loss, wave_hf_loss, MetricWeights,
    RefineMetrics,
};
pub use phase::{to_phase, PhaseImage};
pub use wave::{pde_wave_filter, WaveParams};
