//! Refinement losses, all as sums over pixels and channels in phase units.

use serde::{Deserialize, Serialize};

use super::{pde_loss, to_phase, PhaseImage};
use crate::error::{param, Result};
use crate::field::{laplacian_hf, same_dims, BinaryMask};
use crate::overlay::ReferenceColor;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MetricWeights {
    pub beta: f64,
    pub delta: f64,
}

impl Default for MetricWeights {
    fn default() -> Self {
        Self { beta: 0.5, delta: 0.1 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RefineMetrics {
    pub pde_loss: f64,
    pub tv_loss: f64,
    pub region_loss: f64,
    pub wave_hf_loss: f64,
    pub color_loss: f64,
    pub rec_normal: f64,
    pub rec_anom: f64,
}

/// Anisotropic TV: absolute forward differences along both axes.
pub fn tv_loss(u: &PhaseImage) -> f64 {
    let (h, w) = u.dims();
    u.channels()
        .iter()
        .map(|c| {
            let d = c.data();
            let mut s = 0.0;
            for y in 0..h {
                for x in 0..w {
                    let i = y * w + x;
                    if y + 1 < h {
                        s += (d[i + w] - d[i]).abs();
                    }
                    if x + 1 < w {
                        s += (d[i + 1] - d[i]).abs();
                    }
                }
            }
            s
        })
        .sum()
}

/// `|u - orig|_1` on normal pixels `+ beta (|u - b1|_1` on anomaly pixels
/// `+ delta |u - orig|_2^2` everywhere`)`.
pub fn region_loss(u: &PhaseImage, orig: &PhaseImage, b1: &PhaseImage, mask: &BinaryMask, w: MetricWeights) -> Result<f64> {
    check(u, &[orig, b1], mask)?;
    let m = mask.data();
    let (mut normal, mut anom, mut global) = (0.0, 0.0, 0.0);
    for c in 0..3 {
        let (du, dx, db) = (u.channel(c).data(), orig.channel(c).data(), b1.channel(c).data());
        for i in 0..du.len() {
            if m[i] == 1 {
                anom += (du[i] - db[i]).abs();
            } else {
                normal += (du[i] - dx[i]).abs();
            }
            global += (du[i] - dx[i]).powi(2);
        }
    }
    Ok(normal + w.beta * (anom + w.delta * global))
}

/// L1 norm of the masked 4-neighbour Laplacian.
pub fn wave_hf_loss(u: &PhaseImage, mask: &BinaryMask) -> Result<f64> {
    same_dims(u.dims(), mask.dims())?;
    let m = mask.data();
    let mut s = 0.0;
    for c in u.channels() {
        let lap = laplacian_hf(c)?;
        s += lap.data().iter().zip(m).filter(|(_, &k)| k == 1).map(|(v, _)| v.abs()).sum::<f64>();
    }
    Ok(s)
}

/// Squared distance to the reference colour over masked pixels.
pub fn color_loss(u: &PhaseImage, mask: &BinaryMask, z: ReferenceColor) -> Result<f64> {
    same_dims(u.dims(), mask.dims())?;
    let m = mask.data();
    let mut s = 0.0;
    for (c, ch) in u.channels().iter().enumerate() {
        let zc = to_phase(z.0[c]);
        s += ch.data().iter().zip(m).filter(|(_, &k)| k == 1).map(|(v, _)| (v - zc).powi(2)).sum::<f64>();
    }
    Ok(s)
}

/// Squared reconstruction error against `x`, split into `(normal, anomaly)`.
pub fn reconstruction_losses(u: &PhaseImage, x: &PhaseImage, mask: &BinaryMask) -> Result<(f64, f64)> {
    check(u, &[x], mask)?;
    let m = mask.data();
    let (mut normal, mut anom) = (0.0, 0.0);
    for c in 0..3 {
        for ((a, b), &k) in u.channel(c).data().iter().zip(x.channel(c).data()).zip(m) {
            let e = (a - b).powi(2);
            if k == 1 {
                anom += e;
            } else {
                normal += e;
            }
        }
    }
    Ok((normal, anom))
}

/// All refinement metrics for output `u`, original `orig` and coarse input
/// `b1`. Reconstruction terms compare `u` against `b1`, the refiner's input.
pub fn refinement_metrics(
    u: &PhaseImage,
    orig: &PhaseImage,
    b1: &PhaseImage,
    mask: &BinaryMask,
    z: ReferenceColor,
    weights: MetricWeights,
    eps2: f64,
) -> Result<RefineMetrics> {
    if !(weights.beta >= 0.0) || !(weights.delta >= 0.0) {
        return Err(param("beta and delta must be >= 0"));
    }
    let (rec_normal, rec_anom) = reconstruction_losses(u, b1, mask)?;
    Ok(RefineMetrics {
        pde_loss: pde_loss(u, mask, eps2)?,
        tv_loss: tv_loss(u),
        region_loss: region_loss(u, orig, b1, mask, weights)?,
        wave_hf_loss: wave_hf_loss(u, mask)?,
        color_loss: color_loss(u, mask, z)?,
        rec_normal,
        rec_anom,
    })
}

fn check(u: &PhaseImage, others: &[&PhaseImage], mask: &BinaryMask) -> Result<()> {
    same_dims(u.dims(), mask.dims())?;
    for o in others {
        same_dims(u.dims(), o.dims())?;
    }
    Ok(())
}
