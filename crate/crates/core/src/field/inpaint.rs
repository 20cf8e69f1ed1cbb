//! Harmonic (Laplace) hole filling by Gauss–Seidel sweeps.

use super::{morph, same_dims, BinaryMask, ColorImage, MorphOp};
use crate::error::{param, Result};

pub const DEFAULT_TOL: f64 = 1e-4;
pub const DEFAULT_MAX_ITERS: usize = 2000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InpaintReport {
    pub iterations: usize,
    pub last_update: f64,
    pub converged: bool,
}

/// Fills `hole` so that each hole pixel is the mean of its in-frame
/// 4-neighbours, with non-hole pixels held fixed. Sweeps stop once the
/// largest per-pixel update drops below `tol` or after `max_iters` sweeps.
pub fn inpaint_diffusion(
    image: &ColorImage,
    hole: &BinaryMask,
    tol: f64,
    max_iters: usize,
) -> Result<(ColorImage, InpaintReport)> {
    inpaint_with_band(image, hole, tol, max_iters, 1)
}

/// As [`inpaint_diffusion`], seeding hole pixels with the mean colour of the
/// band `dilate(hole, 2 * band_radius + 1) \ hole`.
pub fn inpaint_with_band(
    image: &ColorImage,
    hole: &BinaryMask,
    tol: f64,
    max_iters: usize,
    band_radius: usize,
) -> Result<(ColorImage, InpaintReport)> {
    same_dims(image.dims(), hole.dims())?;
    if !(tol > 0.0) {
        return Err(param("inpaint tolerance must be > 0"));
    }
    let (h, w) = image.dims();
    if hole.is_empty() {
        return Ok((
            image.clone(),
            InpaintReport {
                iterations: 0,
                last_update: 0.0,
                converged: true,
            },
        ));
    }
    if hole.count() == h * w {
        return Err(param("inpaint hole covers the whole image; no boundary data"));
    }

    let band = morph(hole, MorphOp::Dilate, 2 * band_radius.max(1) + 1)?.minus(hole)?;
    let band_px = band.coords();
    let mut seed = [0.0; 3];
    for &(y, x) in &band_px {
        let p = image.pixel(y, x);
        for c in 0..3 {
            seed[c] += p[c];
        }
    }
    for s in &mut seed {
        *s /= band_px.len() as f64;
    }

    let hole_px = hole.coords();
    let [r, g, b] = image.clone().into_channels();
    let mut chans = [r.into_vec(), g.into_vec(), b.into_vec()];
    for &(y, x) in &hole_px {
        for c in 0..3 {
            chans[c][y * w + x] = seed[c];
        }
    }

    let mut report = InpaintReport {
        iterations: 0,
        last_update: f64::INFINITY,
        converged: false,
    };
    while report.iterations < max_iters {
        let mut max_update: f64 = 0.0;
        for &(y, x) in &hole_px {
            let i = y * w + x;
            let mut nbrs = [0usize; 4];
            let mut n = 0;
            if y > 0 {
                nbrs[n] = i - w;
                n += 1;
            }
            if y + 1 < h {
                nbrs[n] = i + w;
                n += 1;
            }
            if x > 0 {
                nbrs[n] = i - 1;
                n += 1;
            }
            if x + 1 < w {
                nbrs[n] = i + 1;
                n += 1;
            }
            for ch in chans.iter_mut() {
                let mean = nbrs[..n].iter().map(|&j| ch[j]).sum::<f64>() / n as f64;
                max_update = max_update.max((mean - ch[i]).abs());
                ch[i] = mean;
            }
        }
        report.iterations += 1;
        report.last_update = max_update;
        if max_update < tol {
            report.converged = true;
            break;
        }
    }

    let [r, g, b] = chans;
    let out = ColorImage::from_channels([
        super::ScalarField::from_vec(h, w, r)?,
        super::ScalarField::from_vec(h, w, g)?,
        super::ScalarField::from_vec(h, w, b)?,
    ])?;
    Ok((out, report))
}
