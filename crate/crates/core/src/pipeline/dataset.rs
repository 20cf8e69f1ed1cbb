//! Batch generation: categories × mechanisms × samples, one child seed per
//! entry, PNG artefacts per entry and a JSON manifest written last.

use std::fs;
use std::path::{Path, PathBuf};

use image::imageops::{self, FilterType};
use rand::{Rng, RngCore};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::foreground::{load_foreground, otsu_foreground};
use super::generate::{generate_defect, refine_defect};
use super::io::{io_err, read_color, write_atomic, write_color, write_mask};
use super::recipe::{GenerationRecipe, Mechanism, ReferenceBlend, RefineSettings};
use crate::error::{param, Error, Result};
use crate::field::{BinaryMask, ColorImage, Perlin};
use crate::maskgen::{FractureParams, PittingParams, WarpParams};
use crate::overlay::OverlayParams;
use crate::refine::RefineMetrics;
use crate::rng::{child_seed, mix64, stream};

pub const MANIFEST_FILE: &str = "manifest.json";
pub const ERROR_LOG: &str = "errors.log";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MechanismCounts {
    pub fracture: usize,
    pub pitting: usize,
    pub warp: usize,
}

impl Default for MechanismCounts {
    fn default() -> Self {
        Self { fracture: 3, pitting: 3, warp: 3 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CategorySpec {
    pub name: String,
    /// Normal image; a procedural object is synthesised when absent.
    #[serde(default)]
    pub image: Option<PathBuf>,
    /// Explicit foreground mask; Otsu fallback when absent.
    #[serde(default)]
    pub foreground: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DatasetConfig {
    pub master_seed: u64,
    pub image_size: usize,
    pub counts: MechanismCounts,
    pub categories: Vec<CategorySpec>,
    pub fracture: FractureParams,
    pub pitting: PittingParams,
    pub warp: WarpParams,
    pub overlay: OverlayParams,
    pub reference: ReferenceBlend,
    pub refine: RefineSettings,
}

impl Default for DatasetConfig {
    fn default() -> Self {
        Self {
            master_seed: 0,
            image_size: 512,
            counts: MechanismCounts::default(),
            categories: vec![CategorySpec { name: "object".into(), image: None, foreground: None }],
            fracture: FractureParams::default(),
            pitting: PittingParams::default(),
            warp: WarpParams::default(),
            overlay: OverlayParams::default(),
            reference: ReferenceBlend::default(),
            refine: RefineSettings::default(),
        }
    }
}

impl DatasetConfig {
    /// Parses a config file; relative image paths resolve against its directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
        let mut cfg: Self = serde_json::from_str(&text)?;
        let base = path.parent().unwrap_or(Path::new(""));
        for c in &mut cfg.categories {
            for p in [&mut c.image, &mut c.foreground].into_iter().flatten() {
                if p.is_relative() {
                    *p = base.join(&*p);
                }
            }
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.image_size < 8 {
            return Err(param("image_size must be >= 8"));
        }
        if self.categories.is_empty() {
            return Err(param("dataset needs at least one category"));
        }
        let mut names: Vec<&str> = self.categories.iter().map(|c| c.name.as_str()).collect();
        for n in &names {
            if n.is_empty() || !n.chars().all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_') {
                return Err(param(format!("category name {n:?} must be non-empty [A-Za-z0-9_-]")));
            }
        }
        names.sort_unstable();
        names.dedup();
        if names.len() != self.categories.len() {
            return Err(param("category names must be unique"));
        }
        for m in self.mechanisms() {
            m.validate()?;
        }
        self.recipe("x", 0, Mechanism::Warp(self.warp.clone())).validate()
    }

    fn mechanisms(&self) -> [Mechanism; 3] {
        [
            Mechanism::Fracture(self.fracture.clone()),
            Mechanism::Pitting(self.pitting.clone()),
            Mechanism::Warp(self.warp.clone()),
        ]
    }

    fn count(&self, m: &Mechanism) -> usize {
        match m {
            Mechanism::Fracture(_) => self.counts.fracture,
            Mechanism::Pitting(_) => self.counts.pitting,
            Mechanism::Warp(_) => self.counts.warp,
        }
    }

    fn recipe(&self, category: &str, seed: u64, mechanism: Mechanism) -> GenerationRecipe {
        GenerationRecipe {
            category: category.to_string(),
            seed,
            mechanism,
            overlay: self.overlay.clone(),
            reference: self.reference.clone(),
            refine: self.refine.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub id: String,
    pub category: String,
    pub mechanism: String,
    pub seed: u64,
    pub input_path: String,
    pub mask_path: String,
    pub coarse_path: String,
    pub refined_path: String,
    pub params_digest: String,
    pub metrics: RefineMetrics,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub master_seed: u64,
    pub image_size: usize,
    pub entries: Vec<ManifestEntry>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetReport {
    pub manifest: DatasetManifest,
    /// `(entry id, error message)` for every entry left out of the manifest.
    pub failures: Vec<(String, String)>,
}

struct Category {
    name: String,
    input_path: String,
    image: ColorImage,
    foreground: BinaryMask,
}

struct Job<'a> {
    category: &'a Category,
    id: String,
    recipe: GenerationRecipe,
}

/// Procedural normal sample: a bright textured ellipse on a dark background.
pub fn synthetic_normal(size: usize, seed: u64) -> Result<ColorImage> {
    let mut rng = stream(seed);
    let noise = Perlin::new(rng.next_u64());
    let base: [f64; 3] = std::array::from_fn(|_| rng.gen_range(0.55..0.85));
    let bg: [f64; 3] = std::array::from_fn(|_| rng.gen_range(0.03..0.12));
    let n = size as f64;
    let (cy, cx) = (n * rng.gen_range(0.45..0.55), n * rng.gen_range(0.45..0.55));
    let (ry, rx) = (n * rng.gen_range(0.28..0.38), n * rng.gen_range(0.28..0.38));
    let freq = rng.gen_range(4.0..10.0);
    ColorImage::from_fn(size, size, |y, x| {
        let (yf, xf) = (y as f64, x as f64);
        let r2 = ((yf - cy) / ry).powi(2) + ((xf - cx) / rx).powi(2);
        let t = 0.08 * noise.fractal(freq * yf / n, freq * xf / n, 3, 1.0);
        if r2 <= 1.0 {
            let shade = 1.0 - 0.15 * r2;
            base.map(|b| (b * shade + t).clamp(0.0, 1.0))
        } else {
            bg.map(|b| (b + 0.3 * t).clamp(0.0, 1.0))
        }
    })
}

fn resize_color(image: ColorImage, size: usize) -> ColorImage {
    if image.dims() == (size, size) {
        return image;
    }
    let (h, w) = image.dims();
    let buf = image::Rgb32FImage::from_fn(w as u32, h as u32, |x, y| {
        image::Rgb(image.pixel(y as usize, x as usize).map(|v| v as f32))
    });
    let out = imageops::resize(&buf, size as u32, size as u32, FilterType::Triangle);
    ColorImage::from_fn(size, size, |y, x| out.get_pixel(x as u32, y as u32).0.map(|v| (v as f64).clamp(0.0, 1.0)))
        .expect("non-empty")
}

fn resize_mask(mask: BinaryMask, size: usize) -> BinaryMask {
    let (h, w) = mask.dims();
    if (h, w) == (size, size) {
        return mask;
    }
    BinaryMask::from_fn(size, size, |y, x| mask.get(y * h / size, x * w / size)).expect("non-empty")
}

fn prepare_category(cfg: &DatasetConfig, index: usize, spec: &CategorySpec, out_dir: &Path) -> Result<Category> {
    let input_rel = format!("normals/{}.png", spec.name);
    let input_abs = out_dir.join(&input_rel);
    let (image, foreground) = match &spec.image {
        Some(path) => {
            let fg = load_foreground(path, spec.foreground.as_deref())?;
            let img = resize_color(read_color(path)?, cfg.image_size);
            (img, Some(resize_mask(fg, cfg.image_size)))
        }
        None => {
            if spec.foreground.is_some() {
                return Err(param(format!("category {}: foreground given without image", spec.name)));
            }
            // category seeds live apart from the entry seed fan-out
            (synthetic_normal(cfg.image_size, mix64(cfg.master_seed ^ 0xca7e_9021) ^ index as u64)?, None)
        }
    };
    write_color(&input_abs, &image)?;
    // the generators see exactly the pixels the manifest points to
    let image = read_color(&input_abs)?;
    let foreground = match foreground {
        Some(fg) => fg,
        None => otsu_foreground(&image)?,
    };
    Ok(Category { name: spec.name.clone(), input_path: input_rel, image, foreground })
}

fn run_entry(job: &Job, out_dir: &Path) -> Result<ManifestEntry> {
    let cat = job.category;
    let sample = generate_defect(&job.recipe, &cat.image, &cat.foreground)?;
    let (refined, metrics) = refine_defect(&sample.coarse, &cat.image, &sample.mask, sample.reference, &job.recipe.refine)?;
    let rel = |suffix: &str| format!("{}/{}_{suffix}.png", cat.name, job.id);
    let (mask_path, coarse_path, refined_path) = (rel("mask"), rel("coarse"), rel("refined"));
    write_mask(&out_dir.join(&mask_path), &sample.mask)?;
    write_color(&out_dir.join(&coarse_path), &sample.coarse)?;
    write_color(&out_dir.join(&refined_path), &refined)?;
    Ok(ManifestEntry {
        id: job.id.clone(),
        category: cat.name.clone(),
        mechanism: job.recipe.mechanism.name().to_string(),
        seed: job.recipe.seed,
        input_path: cat.input_path.clone(),
        mask_path,
        coarse_path,
        refined_path,
        params_digest: job.recipe.digest(),
        metrics,
    })
}

/// Generates every entry into `out_dir` on `jobs` worker threads. Output
/// bytes do not depend on `jobs`. Failed entries are logged to `errors.log`
/// and left out of the manifest; the manifest is written last, atomically.
pub fn run_dataset(cfg: &DatasetConfig, out_dir: &Path, jobs: usize) -> Result<DatasetReport> {
    cfg.validate()?;
    if jobs == 0 {
        return Err(param("jobs must be >= 1"));
    }
    fs::create_dir_all(out_dir).map_err(|e| io_err(out_dir, e))?;
    for stale in [MANIFEST_FILE, ERROR_LOG] {
        let p = out_dir.join(stale);
        if p.exists() {
            fs::remove_file(&p).map_err(|e| io_err(&p, e))?;
        }
    }

    let categories: Vec<Category> = cfg
        .categories
        .iter()
        .enumerate()
        .map(|(i, spec)| prepare_category(cfg, i, spec, out_dir))
        .collect::<Result<_>>()?;

    let mut job_list = Vec::new();
    for cat in &categories {
        for mech in cfg.mechanisms() {
            for idx in 0..cfg.count(&mech) {
                let seed = child_seed(cfg.master_seed, job_list.len() as u64);
                job_list.push(Job {
                    category: cat,
                    id: format!("{}_{}_{idx:04}", cat.name, mech.name()),
                    recipe: cfg.recipe(&cat.name, seed, mech.clone()),
                });
            }
        }
    }

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::Numeric(format!("thread pool: {e}")))?;
    let results: Vec<Result<ManifestEntry>> = pool.install(|| job_list.par_iter().map(|j| run_entry(j, out_dir)).collect());

    let mut entries = Vec::new();
    let mut failures = Vec::new();
    for (job, res) in job_list.iter().zip(results) {
        match res {
            Ok(e) => entries.push(e),
            Err(e) => failures.push((job.id.clone(), e.to_string())),
        }
    }
    if !failures.is_empty() {
        let log: String = failures.iter().map(|(id, e)| format!("{id}: {e}\n")).collect();
        let p = out_dir.join(ERROR_LOG);
        fs::write(&p, log).map_err(|e| io_err(&p, e))?;
    }
    let manifest = DatasetManifest { master_seed: cfg.master_seed, image_size: cfg.image_size, entries };
    let mut text = serde_json::to_string_pretty(&manifest)?;
    text.push('\n');
    write_atomic(&out_dir.join(MANIFEST_FILE), text.as_bytes())?;
    Ok(DatasetReport { manifest, failures })
}
