//! Recipes, PNG IO, foreground extraction, single-sample generation and
//! refinement, batch datasets and the weighting demo.

mod dataset;
mod foreground;
mod generate;
mod io;
mod recipe;

use std::path::Path;

pub use dataset::{
    run_dataset, synthetic_normal, CategorySpec, DatasetConfig, DatasetManifest, DatasetReport, ManifestEntry,
    MechanismCounts, ERROR_LOG, MANIFEST_FILE,
};
pub use foreground::{largest_component, load_foreground, luminance8, otsu_foreground, otsu_threshold};
pub use generate::{generate_defect, reference_color, refine_defect, CoarseSample};
pub use io::{quantize, quantized, read_color, read_mask, write_atomic, write_color, write_mask};
pub use recipe::{GenerationRecipe, Mechanism, ReferenceBlend, RefineSettings};

use crate::error::Result;
use crate::weights::{run_demo, DemoConfig, DemoReport};

/// Environment variable that overrides recipe and dataset master seeds.
pub const SEED_ENV: &str = "DEFECTFORGE_SEED";

/// Reads a demo config (an empty object gives the defaults), runs the demo
/// and writes the JSON report to `out`.
pub fn run_weights_demo(config: &Path, out: &Path) -> Result<DemoReport> {
    let text = std::fs::read_to_string(config).map_err(|e| io::io_err(config, e))?;
    let cfg: DemoConfig = serde_json::from_str(&text)?;
    let report = run_demo(&cfg)?;
    let mut json = serde_json::to_string_pretty(&report)?;
    json.push('\n');
    write_atomic(out, json.as_bytes())?;
    Ok(report)
}
