//! Chunky pitting patches: jittered polygons, stochastic boundary growth,
//! closing and Perlin edge breakage.

use std::f64::consts::TAU;

use rand::Rng;

use super::PittingParams;
use crate::error::Result;
use crate::field::{morph, BinaryMask, MorphOp, Perlin};

#[derive(Debug, Clone, PartialEq)]
pub struct PittingOutput {
    /// Polygon vertices as `(row, col)`, in draw order.
    pub polygons: Vec<Vec<(f64, f64)>>,
    pub mask: BinaryMask,
}

/// Even-odd scanline fill sampled at pixel centres. An edge crosses row `y`
/// when exactly one endpoint lies strictly below it; pixel `x` is inside when
/// an odd number of crossings lie strictly to its right.
pub fn rasterize_polygon(vertices: &[(f64, f64)], height: usize, width: usize) -> Result<BinaryMask> {
    let mut out = BinaryMask::zeros(height, width)?;
    let n = vertices.len();
    if n < 3 {
        return Ok(out);
    }
    let ymin = vertices.iter().map(|v| v.0).fold(f64::INFINITY, f64::min);
    let ymax = vertices.iter().map(|v| v.0).fold(f64::NEG_INFINITY, f64::max);
    let r0 = ymin.ceil().max(0.0) as usize;
    let r1 = (ymax.floor().min(height as f64 - 1.0)).max(-1.0);
    if r1 < 0.0 {
        return Ok(out);
    }
    let mut xs = Vec::with_capacity(n);
    for y in r0..=r1 as usize {
        let yf = y as f64;
        xs.clear();
        for i in 0..n {
            let (y0, x0) = vertices[i];
            let (y1, x1) = vertices[(i + 1) % n];
            if (y0 > yf) != (y1 > yf) {
                xs.push(edge_crossing(y0, x0, y1, x1, yf));
            }
        }
        xs.sort_by(f64::total_cmp);
        for pair in xs.chunks_exact(2) {
            let a = pair[0].ceil().max(0.0);
            let b = pair[1].ceil().min(width as f64);
            let mut x = a;
            while x < b {
                out.set(y, x as usize, true);
                x += 1.0;
            }
        }
    }
    Ok(out)
}

#[inline]
pub(crate) fn edge_crossing(y0: f64, x0: f64, y1: f64, x1: f64, y: f64) -> f64 {
    x0 + (y - y0) * (x1 - x0) / (y1 - y0)
}

/// One growth round: every pixel of `dilate(mask, 3) \ mask` is switched on
/// with probability `grow_prob` (one draw per boundary pixel, row-major), and
/// the result is clipped to `foreground`.
pub fn grow_boundary(mask: &BinaryMask, foreground: &BinaryMask, grow_prob: f64, rng: &mut impl Rng) -> Result<BinaryMask> {
    let boundary = morph(mask, MorphOp::Dilate, 3)?.minus(mask)?;
    let mut out = mask.clone();
    for (y, x) in boundary.coords() {
        if rng.gen::<f64>() < grow_prob {
            out.set(y, x, true);
        }
    }
    out.and(foreground)
}

fn random_polygon(center: (usize, usize), params: &PittingParams, rng: &mut impl Rng) -> Vec<(f64, f64)> {
    let (lo, hi) = params.polygon_size;
    let radius = if hi > lo { rng.gen_range(lo..hi) } else { lo };
    let n = rng.gen_range(6..=12usize);
    let d = params.deform_factor;
    let step = TAU / n as f64;
    (0..n)
        .map(|i| {
            let jitter = if d > 0.0 { rng.gen_range(-1.0..1.0) * d * step } else { 0.0 };
            let r = if d > 0.0 { radius * (1.0 + rng.gen_range(-d..d)) } else { radius };
            let theta = i as f64 * step + jitter;
            (center.0 as f64 + r * theta.sin(), center.1 as f64 + r * theta.cos())
        })
        .collect()
}

/// Builds a pitting mask inside `foreground`. Polygon centres are any
/// foreground pixel with probability `overlap_prob`, otherwise a foreground
/// pixel not yet covered (falling back to any foreground pixel).
pub fn generate_pitting_mask(
    foreground: &BinaryMask,
    params: &PittingParams,
    rng: &mut impl Rng,
) -> Result<PittingOutput> {
    params.validate()?;
    let (h, w) = foreground.dims();
    let mut mask = BinaryMask::zeros(h, w)?;
    let fg = foreground.coords();
    if fg.is_empty() {
        return Ok(PittingOutput { polygons: Vec::new(), mask });
    }

    let mut polygons = Vec::with_capacity(params.k as usize);
    for _ in 0..params.k {
        let overlap = rng.gen::<f64>() < params.overlap_prob;
        let center = if overlap {
            fg[rng.gen_range(0..fg.len())]
        } else {
            let free: Vec<_> = fg.iter().copied().filter(|&(y, x)| !mask.get(y, x)).collect();
            let pool = if free.is_empty() { &fg } else { &free };
            pool[rng.gen_range(0..pool.len())]
        };
        let poly = random_polygon(center, params, rng);
        let filled = rasterize_polygon(&poly, h, w)?.and(foreground)?;
        mask = mask.or(&filled)?;
        polygons.push(poly);
    }

    for _ in 0..params.n_growth {
        mask = grow_boundary(&mask, foreground, params.grow_prob, rng)?;
    }

    mask = morph(&mask, MorphOp::Close, 3)?.and(foreground)?;

    if params.noise_enabled {
        let noise = Perlin::new(rng.next_u64());
        let inner = mask.minus(&morph(&mask, MorphOp::Erode, 3)?)?;
        let f = params.noise_frequency;
        for (y, x) in inner.coords() {
            let v = noise.fractal(f * y as f64 / h as f64, f * x as f64 / w as f64, params.noise_octaves, 1.0);
            if v > params.perlin_threshold {
                mask.set(y, x, false);
            }
        }
    }

    Ok(PittingOutput { polygons, mask })
}
