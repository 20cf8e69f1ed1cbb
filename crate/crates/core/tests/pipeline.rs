//! End-to-end checks of the pipeline layer: foreground loading, single-sample
//! generation and refinement through PNG files, datasets and the demo.

use std::path::Path;

use defectforge::maskgen::{PittingParams, WarpParams};
use defectforge::pipeline::{
    generate_defect, load_foreground, quantized, read_color, read_mask, reference_color, refine_defect, run_dataset,
    run_weights_demo, write_color, write_mask, CategorySpec, DatasetConfig, DatasetManifest, GenerationRecipe,
    Mechanism, MechanismCounts, ReferenceBlend, RefineSettings, MANIFEST_FILE,
};
use defectforge::refine::{refinement_metrics, AcParams, PhaseImage};
use defectforge::{BinaryMask, ColorImage};

fn bright_square(n: usize) -> (ColorImage, BinaryMask) {
    let sq = BinaryMask::from_fn(n, n, |y, x| (n / 4..3 * n / 4).contains(&y) && (n / 5..4 * n / 5).contains(&x)).unwrap();
    let img = ColorImage::from_fn(n, n, |y, x| {
        if sq.get(y, x) {
            let t = ((x + 2 * y) % 9) as f64 / 60.0;
            [0.75 + t, 0.7 + t, 0.65 + t]
        } else {
            [0.08, 0.1, 0.09]
        }
    })
    .unwrap();
    (img, sq)
}

fn small_dataset(n: usize) -> DatasetConfig {
    DatasetConfig {
        image_size: n,
        counts: MechanismCounts { fracture: 3, pitting: 3, warp: 3 },
        pitting: PittingParams { polygon_size: (4.0, 10.0), n_growth: 8, ..Default::default() },
        refine: RefineSettings { ac: AcParams { n_steps: 50, ..Default::default() }, ..Default::default() },
        ..Default::default()
    }
}

#[test]
fn otsu_fallback_finds_the_square() {
    let dir = tempfile::tempdir().unwrap();
    let (img, sq) = bright_square(64);
    let p = dir.path().join("img.png");
    write_color(&p, &img).unwrap();
    assert_eq!(load_foreground(&p, None).unwrap(), sq);
}

#[test]
fn pitting_with_empty_foreground_leaves_image_alone() {
    let dir = tempfile::tempdir().unwrap();
    let (img, _) = bright_square(48);
    let ip = dir.path().join("img.png");
    let fp = dir.path().join("fg.png");
    write_color(&ip, &img).unwrap();
    write_mask(&fp, &BinaryMask::zeros(48, 48).unwrap()).unwrap();
    let fg = load_foreground(&ip, Some(&fp)).unwrap();
    let r = GenerationRecipe::new("x", 4, Mechanism::Pitting(PittingParams::default()));
    let img = read_color(&ip).unwrap();
    let s = generate_defect(&r, &img, &fg).unwrap();
    assert!(s.mask.is_empty());
    assert_eq!(s.coarse, img);
}

#[test]
fn zero_offset_warp_returns_the_input_mask() {
    let (img, sq) = bright_square(48);
    let r = GenerationRecipe::new("x", 8, Mechanism::Warp(WarpParams { max_offset: 0.0, ..Default::default() }));
    assert_eq!(generate_defect(&r, &img, &sq).unwrap().mask, sq);
}

#[test]
fn refine_metrics_match_a_direct_recomputation() {
    let dir = tempfile::tempdir().unwrap();
    let (img, sq) = bright_square(40);
    let r = GenerationRecipe::new("x", 2, Mechanism::Pitting(PittingParams { polygon_size: (3.0, 8.0), ..Default::default() }));
    let s = generate_defect(&r, &img, &sq).unwrap();
    // go through PNG like the CLI does
    let (cp, op, mp) = (dir.path().join("c.png"), dir.path().join("o.png"), dir.path().join("m.png"));
    write_color(&cp, &s.coarse).unwrap();
    write_color(&op, &img).unwrap();
    write_mask(&mp, &s.mask).unwrap();
    let (coarse, orig, mask) = (read_color(&cp).unwrap(), read_color(&op).unwrap(), read_mask(&mp).unwrap());
    let z = reference_color(&orig, &mask, &ReferenceBlend::default()).unwrap();
    let settings = RefineSettings { ac: AcParams { n_steps: 80, ..Default::default() }, ..Default::default() };
    let (refined, metrics) = refine_defect(&coarse, &orig, &mask, z, &settings).unwrap();
    let direct = refinement_metrics(
        &PhaseImage::from_color(&refined),
        &PhaseImage::from_color(&orig),
        &PhaseImage::from_color(&coarse),
        &mask,
        z,
        settings.metrics,
        settings.ac.eps2,
    )
    .unwrap();
    for (a, b) in [
        (metrics.pde_loss, direct.pde_loss),
        (metrics.tv_loss, direct.tv_loss),
        (metrics.region_loss, direct.region_loss),
        (metrics.wave_hf_loss, direct.wave_hf_loss),
        (metrics.color_loss, direct.color_loss),
        (metrics.rec_normal, direct.rec_normal),
        (metrics.rec_anom, direct.rec_anom),
    ] {
        assert!((a - b).abs() <= 1e-9 * b.abs().max(1.0), "{a} vs {b}");
    }
    // outside the mask the coarse input is kept verbatim
    for y in 0..40 {
        for x in 0..40 {
            if !mask.get(y, x) {
                assert_eq!(refined.pixel(y, x), coarse.pixel(y, x));
            }
        }
    }
}

#[test]
fn refine_fixed_points() {
    let (img, _) = bright_square(32);
    let z = reference_color(&img, &BinaryMask::zeros(32, 32).unwrap(), &ReferenceBlend::default()).unwrap();
    let empty = BinaryMask::zeros(32, 32).unwrap();
    let (out, _) = refine_defect(&img, &img, &empty, z, &RefineSettings::default()).unwrap();
    assert_eq!(quantized(&out), quantized(&img));

    let mask = BinaryMask::from_fn(32, 32, |y, x| (10..20).contains(&y) && (5..25).contains(&x)).unwrap();
    let coarse = ColorImage::from_fn(32, 32, |y, x| if mask.get(y, x) { [0.2, 0.3, 0.1] } else { img.pixel(y, x) }).unwrap();
    let zero = RefineSettings { ac: AcParams { n_steps: 0, ..Default::default() }, ..Default::default() };
    let (out, _) = refine_defect(&coarse, &img, &mask, z, &zero).unwrap();
    assert_eq!(out, coarse);
}

#[test]
fn dataset_manifest_integrity() {
    let dir = tempfile::tempdir().unwrap();
    let report = run_dataset(&small_dataset(64), dir.path(), 2).unwrap();
    assert!(report.failures.is_empty());
    let text = std::fs::read_to_string(dir.path().join(MANIFEST_FILE)).unwrap();
    let manifest: DatasetManifest = serde_json::from_str(&text).unwrap();
    assert_eq!(manifest, report.manifest);
    assert_eq!(manifest.entries.len(), 9);
    let mut ids: Vec<&str> = manifest.entries.iter().map(|e| e.id.as_str()).collect();
    ids.sort_unstable();
    ids.dedup();
    assert_eq!(ids.len(), 9);
    for e in &manifest.entries {
        for p in [&e.input_path, &e.coarse_path, &e.refined_path] {
            let img = read_color(&dir.path().join(p)).unwrap();
            assert_eq!(img.dims(), (64, 64));
        }
        let raw = image::open(dir.path().join(&e.mask_path)).unwrap().to_luma8();
        assert!(raw.pixels().all(|p| p.0[0] == 0 || p.0[0] == 255), "{}", e.mask_path);
        assert_eq!(e.params_digest.len(), 64);
    }
    assert!(!dir.path().join(format!("{MANIFEST_FILE}.tmp")).exists());
}

#[test]
fn dataset_rerun_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_dataset(48);
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    run_dataset(&cfg, &a, 1).unwrap();
    run_dataset(&cfg, &b, 3).unwrap();
    let read = |d: &Path| std::fs::read(d.join(MANIFEST_FILE)).unwrap();
    assert_eq!(read(&a), read(&b));
}

#[test]
fn dataset_with_user_image_and_missing_image() {
    let dir = tempfile::tempdir().unwrap();
    let (img, sq) = bright_square(40);
    let ip = dir.path().join("part.png");
    let fp = dir.path().join("part_fg.png");
    write_color(&ip, &img).unwrap();
    write_mask(&fp, &sq).unwrap();
    let mut cfg = small_dataset(40);
    cfg.categories = vec![CategorySpec { name: "part".into(), image: Some(ip), foreground: Some(fp) }];
    let out = dir.path().join("out");
    let r = run_dataset(&cfg, &out, 1).unwrap();
    assert!(r.failures.is_empty());
    for e in &r.manifest.entries {
        assert!(read_mask(&out.join(&e.mask_path)).unwrap().is_subset_of(&sq));
    }

    // an unreadable image is a configuration error, not a per-entry failure
    cfg.categories[0].image = Some(dir.path().join("missing.png"));
    cfg.categories[0].foreground = None;
    assert!(run_dataset(&cfg, &dir.path().join("bad"), 1).is_err());
}

#[test]
fn weights_demo_report() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("demo.json");
    std::fs::write(&cfg, r#"{"seed": 3, "epochs": 4}"#).unwrap();
    let out = dir.path().join("report.json");
    let rep = run_weights_demo(&cfg, &out).unwrap();
    assert_eq!(rep.epochs.len(), 4);
    let back: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(back["epochs"].as_array().unwrap().len(), 4);

    std::fs::write(&cfg, r#"{"n_anomalous": 0}"#).unwrap();
    assert!(run_weights_demo(&cfg, &out).is_err());
    std::fs::write(&cfg, r#"{"lambdas": {"sqe": 1.0, "bi": 0.0}, "epochs": 3}"#).unwrap();
    let rep = run_weights_demo(&cfg, &out).unwrap();
    assert!(rep.epochs.iter().all(|e| e.d == rep.initial_d));
}
