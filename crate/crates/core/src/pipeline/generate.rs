//! Single-sample generation and refinement.

use super::recipe::{GenerationRecipe, Mechanism, ReferenceBlend, RefineSettings};
use crate::error::Result;
use crate::field::{same_dims, BinaryMask, ColorImage};
use crate::maskgen::{generate_fracture, generate_pitting_mask, generate_warp};
use crate::overlay::{apply_fracture_overlay, blend_reference_color, ReferenceColor};
use crate::refine::{ac_relax, pde_wave_filter, refinement_metrics, PhaseImage, RefineMetrics};
use crate::rng::stream;

#[derive(Debug, Clone, PartialEq)]
pub struct CoarseSample {
    pub mask: BinaryMask,
    pub coarse: ColorImage,
    /// Reference colour used for the pitting blend and the colour metric.
    pub reference: ReferenceColor,
}

/// Explicit colour, or `auto_darken` times the mean colour under `mask`
/// (the whole image when the mask is empty).
pub fn reference_color(image: &ColorImage, mask: &BinaryMask, blend: &ReferenceBlend) -> Result<ReferenceColor> {
    if let Some(c) = blend.color {
        return ReferenceColor::new(c);
    }
    same_dims(image.dims(), mask.dims())?;
    let mut coords = mask.coords();
    if coords.is_empty() {
        let (h, w) = image.dims();
        coords = (0..h).flat_map(|y| (0..w).map(move |x| (y, x))).collect();
    }
    let mut sum = [0.0; 3];
    for &(y, x) in &coords {
        let p = image.pixel(y, x);
        for c in 0..3 {
            sum[c] += p[c];
        }
    }
    let n = coords.len() as f64;
    ReferenceColor::new(sum.map(|s| (s / n * blend.auto_darken).clamp(0.0, 1.0)))
}

/// Mask plus coarse composite for one recipe. Deterministic in `recipe.seed`.
pub fn generate_defect(recipe: &GenerationRecipe, image: &ColorImage, foreground: &BinaryMask) -> Result<CoarseSample> {
    recipe.validate()?;
    same_dims(image.dims(), foreground.dims())?;
    let mut rng = stream(recipe.seed);
    let (mask, coarse) = match &recipe.mechanism {
        Mechanism::Fracture(p) => {
            let out = generate_fracture(foreground, p, &mut rng)?;
            let coarse = apply_fracture_overlay(image, &out.mask, &recipe.overlay)?;
            (out.mask, coarse)
        }
        Mechanism::Pitting(p) => {
            let out = generate_pitting_mask(foreground, p, &mut rng)?;
            let z = reference_color(image, &out.mask, &recipe.reference)?;
            let coarse = blend_reference_color(image, &out.mask, z, recipe.reference.strength)?;
            (out.mask, coarse)
        }
        Mechanism::Warp(p) => {
            let out = generate_warp(image, foreground, p, &mut rng)?;
            (out.mask, out.image)
        }
    };
    let reference = reference_color(image, &mask, &recipe.reference)?;
    Ok(CoarseSample { mask, coarse, reference })
}

/// Phase-field relaxation of `coarse`: masked pixels take the relaxed (and
/// optionally wavelet-filtered) values, all others keep the coarse input.
/// Metrics use `coarse` as the refiner input.
pub fn refine_defect(
    coarse: &ColorImage,
    orig: &ColorImage,
    mask: &BinaryMask,
    reference: ReferenceColor,
    settings: &RefineSettings,
) -> Result<(ColorImage, RefineMetrics)> {
    settings.ac.validate()?;
    same_dims(coarse.dims(), orig.dims())?;
    same_dims(coarse.dims(), mask.dims())?;
    let b1 = PhaseImage::from_color(coarse);
    let mut relaxed = ac_relax(&b1, mask, &settings.ac)?;
    if let Some(wave) = &settings.wave {
        relaxed = pde_wave_filter(&relaxed, wave)?;
    }
    let m = mask.data();
    let mut u = b1.clone();
    for (dst, src) in u.channels_mut().iter_mut().zip(relaxed.channels()) {
        for ((d, s), &k) in dst.data_mut().iter_mut().zip(src.data()).zip(m) {
            if k == 1 {
                *d = s.clamp(-1.0, 1.0);
            }
        }
    }
    let metrics = refinement_metrics(
        &u,
        &PhaseImage::from_color(orig),
        &b1,
        mask,
        reference,
        settings.metrics,
        settings.ac.eps2,
    )?;
    // values the flow left untouched are copied, not round-tripped through
    // phase units, so n_steps = 0 returns the coarse input bit for bit
    let relaxed_color = u.to_color();
    let mut refined = coarse.clone();
    for (y, x) in mask.coords() {
        let mut px = coarse.pixel(y, x);
        for (c, v) in px.iter_mut().enumerate() {
            if u.channel(c).get(y, x).to_bits() != b1.channel(c).get(y, x).to_bits() {
                *v = relaxed_color.channel(c).get(y, x);
            }
        }
        refined.set_pixel(y, x, px);
    }
    Ok((refined, metrics))
}
