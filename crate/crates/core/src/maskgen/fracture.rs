//! Fracture lines: a branching random-walk skeleton thickened by an
//! exponentially decaying distance threshold with Perlin-roughened edges.

use std::collections::VecDeque;
use std::f64::consts::{FRAC_PI_4, TAU};

use rand::{Rng, RngCore};

use super::FractureParams;
use crate::error::Result;
use crate::field::{distance_transform, gaussian_blur, morph, BinaryMask, MorphOp, Perlin, ScalarField};

/// Intermediate stages of one fracture draw.
#[derive(Debug, Clone, PartialEq)]
pub struct FractureOutput {
    pub skeleton: BinaryMask,
    /// Pixels passing `dist + noise < w(dist)` before morphology and blur.
    pub pre_morphology: BinaryMask,
    /// Final mask, clipped to the foreground.
    pub mask: BinaryMask,
}

#[derive(Debug, Clone, Copy)]
struct Frontier {
    y: f64,
    x: f64,
    dy: f64,
    dx: f64,
    steps: i64,
}

/// Grows a branching skeleton inside `foreground`.
///
/// Start points are drawn uniformly (with replacement) from the foreground
/// pixels, then one heading per start. Frontiers are processed FIFO. A step
/// that lands outside the frame or the foreground drops its frontier.
pub fn generate_skeleton(foreground: &BinaryMask, params: &FractureParams, rng: &mut impl Rng) -> Result<BinaryMask> {
    params.validate()?;
    let (h, w) = foreground.dims();
    let mut skeleton = BinaryMask::zeros(h, w)?;
    let fg = foreground.coords();
    if fg.is_empty() {
        return Ok(skeleton);
    }

    let starts: Vec<(usize, usize)> = (0..params.n_starts).map(|_| fg[rng.gen_range(0..fg.len())]).collect();
    let mut frontiers = VecDeque::new();
    for &(y0, x0) in &starts {
        let angle = rng.gen_range(0.0..TAU);
        frontiers.push_back(Frontier {
            y: y0 as f64,
            x: x0 as f64,
            dy: angle.sin(),
            dx: angle.cos(),
            steps: i64::from(params.max_steps),
        });
        skeleton.set(y0, x0, true);
    }

    while let Some(f) = frontiers.pop_front() {
        if f.steps <= 0 {
            continue;
        }
        let y_new = f.y + f.dy * params.step_size;
        let x_new = f.x + f.dx * params.step_size;
        let yi = y_new.round_ties_even();
        let xi = x_new.round_ties_even();
        if yi < 0.0 || xi < 0.0 || yi >= h as f64 || xi >= w as f64 {
            continue;
        }
        let (yi, xi) = (yi as usize, xi as usize);
        if !foreground.get(yi, xi) {
            continue;
        }
        skeleton.set(yi, xi, true);
        let steps = f.steps - 1;

        if rng.gen::<f64>() < params.stop_prob {
            continue;
        }
        frontiers.push_back(Frontier {
            y: y_new,
            x: x_new,
            steps,
            ..f
        });

        if rng.gen::<f64>() < params.branching_prob {
            let a = rng.gen_range(-FRAC_PI_4..FRAC_PI_4);
            let (s, c) = a.sin_cos();
            frontiers.push_back(Frontier {
                y: y_new,
                x: x_new,
                dy: f.dy * c - f.dx * s,
                dx: f.dy * s + f.dx * c,
                steps: steps / 2,
            });
        }
    }
    Ok(skeleton)
}

/// Per-pixel thickness test `dist + nu < w0 exp(-alpha dist) + epsilon`
/// where `nu = noise_scale * PN(y / H, x / W)`.
pub fn fracture_pre_morphology(
    dist: &ScalarField,
    params: &FractureParams,
    noise: &Perlin,
) -> Result<BinaryMask> {
    let (h, w) = dist.dims();
    BinaryMask::from_fn(h, w, |y, x| {
        let t = dist.get(y, x);
        let wt = params.w0 * (-params.alpha * t).exp() + params.epsilon;
        if wt <= 0.0 {
            return false;
        }
        let nu = if params.noise_scale == 0.0 {
            0.0
        } else {
            noise.fractal(y as f64 / h as f64, x as f64 / w as f64, params.noise_octaves, params.noise_scale)
        };
        t + nu < wt
    })
}

/// Thickens a skeleton into a fracture mask: thickness test, closing,
/// opening, Gaussian blur and re-threshold. Consumes one `u64` from `rng`
/// for the noise permutation.
pub fn fracture_mask_from_skeleton(
    skeleton: &BinaryMask,
    params: &FractureParams,
    rng: &mut impl RngCore,
) -> Result<(BinaryMask, BinaryMask)> {
    params.validate()?;
    let noise = Perlin::new(rng.next_u64());
    let dist = distance_transform(&skeleton.invert())?;
    let pre = fracture_pre_morphology(&dist, params, &noise)?;

    let k = params.morph_kernel_size;
    let smoothed = morph(&morph(&pre, MorphOp::Close, k)?, MorphOp::Open, k)?;
    let blurred = gaussian_blur(&smoothed.to_field(), params.sigma_blur)?;
    let (h, w) = skeleton.dims();
    let mask = BinaryMask::from_fn(h, w, |y, x| blurred.get(y, x) > params.blur_threshold)?;
    Ok((pre, mask))
}

/// Skeleton plus thickening, with the result clipped to `foreground`.
pub fn generate_fracture(foreground: &BinaryMask, params: &FractureParams, rng: &mut impl Rng) -> Result<FractureOutput> {
    let skeleton = generate_skeleton(foreground, params, rng)?;
    let (pre_morphology, mask) = fracture_mask_from_skeleton(&skeleton, params, rng)?;
    let mask = mask.and(foreground)?;
    Ok(FractureOutput {
        skeleton,
        pre_morphology,
        mask,
    })
}
