use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use defectforge::pipeline::{
    generate_defect, load_foreground, read_color, read_mask, reference_color, refine_defect, run_dataset,
    run_weights_demo, write_atomic, write_color, write_mask, DatasetConfig, GenerationRecipe, RefineSettings,
    ReferenceBlend, SEED_ENV,
};
use defectforge::refine::AcParams;
use defectforge::Result;

#[derive(Parser)]
#[command(name = "defectforge", version, about = "Seeded surface-defect synthesis and phase-field refinement")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate one defect mask and its coarse composite.
    Gen {
        #[arg(long)]
        recipe: PathBuf,
        #[arg(long)]
        image: PathBuf,
        /// Foreground mask PNG; Otsu fallback when omitted.
        #[arg(long)]
        foreground: Option<PathBuf>,
        #[arg(long)]
        out_dir: PathBuf,
        /// Overrides the recipe seed.
        #[arg(long, env = SEED_ENV)]
        seed: Option<u64>,
    },
    /// Relax a coarse composite inside its mask.
    Refine {
        #[arg(long)]
        coarse: PathBuf,
        #[arg(long)]
        orig: PathBuf,
        #[arg(long)]
        mask: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
        #[arg(long, default_value_t = AcParams::default().eps2)]
        eps2: f64,
        #[arg(long, default_value_t = AcParams::default().dt)]
        dt: f64,
        #[arg(long, default_value_t = AcParams::default().n_steps)]
        n_steps: usize,
        #[arg(long, default_value_t = AcParams::default().fidelity)]
        fidelity: f64,
    },
    /// Generate a full dataset with a manifest.
    Dataset {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        /// Overrides the config's master seed.
        #[arg(long, env = SEED_ENV)]
        master_seed: Option<u64>,
    },
    /// Run the sample-weighting demo on a synthetic toy set.
    WeightsDemo {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| defectforge::Error::Io { path: path.to_path_buf(), source })
}

fn write_json(path: &Path, value: &impl serde::Serialize) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_atomic(path, text.as_bytes())
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Gen { recipe, image, foreground, out_dir, seed } => {
            let mut r = GenerationRecipe::from_json(&read_text(&recipe)?)?;
            if let Some(s) = seed {
                r.seed = s;
            }
            let img = read_color(&image)?;
            let fg = load_foreground(&image, foreground.as_deref())?;
            let sample = generate_defect(&r, &img, &fg)?;
            write_mask(&out_dir.join("mask.png"), &sample.mask)?;
            write_color(&out_dir.join("coarse.png"), &sample.coarse)?;
            write_json(&out_dir.join("recipe.json"), &r)?;
            println!("{}: {} mask pixels, seed {}", r.mechanism.name(), sample.mask.count(), r.seed);
        }
        Command::Refine { coarse, orig, mask, out_dir, eps2, dt, n_steps, fidelity } => {
            let settings = RefineSettings { ac: AcParams { eps2, dt, n_steps, fidelity }, ..Default::default() };
            let coarse = read_color(&coarse)?;
            let orig = read_color(&orig)?;
            let mask = read_mask(&mask)?;
            let z = reference_color(&orig, &mask, &ReferenceBlend::default())?;
            let (refined, metrics) = refine_defect(&coarse, &orig, &mask, z, &settings)?;
            write_color(&out_dir.join("refined.png"), &refined)?;
            write_json(&out_dir.join("metrics.json"), &metrics)?;
        }
        Command::Dataset { config, out_dir, jobs, master_seed } => {
            let mut cfg = DatasetConfig::load(&config)?;
            if let Some(s) = master_seed {
                cfg.master_seed = s;
            }
            let report = run_dataset(&cfg, &out_dir, jobs)?;
            println!("{} entries written to {}", report.manifest.entries.len(), out_dir.display());
            if !report.failures.is_empty() {
                for (id, e) in &report.failures {
                    eprintln!("failed {id}: {e}");
                }
                return Ok(ExitCode::from(2));
            }
        }
        Command::WeightsDemo { config, out } => {
            let report = run_weights_demo(&config, &out)?;
            if let Some(last) = report.epochs.last() {
                println!("{} epochs, final train AUC {:.4}", report.epochs.len(), last.train_auc);
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
