//! Deterministic wavelet/PDE filter: `f - eps_p lap f`, one Haar level,
//! fixed per-subband gains, inverse transform.

use serde::{Deserialize, Serialize};

use super::PhaseImage;
use crate::error::{param, Result};
use crate::field::{haar_dwt, haar_idwt, laplacian, reflect_index, HaarBands, ScalarField};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WaveParams {
    pub eps_p: f64,
    /// Gains for `(LL, LH, HL, HH)`.
    pub subband_gain: [f64; 4],
}

impl Default for WaveParams {
    fn default() -> Self {
        Self { eps_p: 0.001, subband_gain: [1.0, 0.5, 0.5, 0.25] }
    }
}

fn filter_channel(f: &ScalarField, eps_p: f64, gain: [f64; 4]) -> Result<ScalarField> {
    let (h, w) = f.dims();
    let lap = laplacian(f);
    let (ph, pw) = (h + h % 2, w + w % 2);
    let padded = ScalarField::from_fn(ph, pw, |y, x| {
        let (yy, xx) = (reflect_index(y as isize, h), reflect_index(x as isize, w));
        f.get(yy, xx) - eps_p * lap.get(yy, xx)
    })?;
    let b = haar_dwt(&padded)?;
    let scaled = HaarBands {
        ll: b.ll.map(|v| v * gain[0]),
        lh: b.lh.map(|v| v * gain[1]),
        hl: b.hl.map(|v| v * gain[2]),
        hh: b.hh.map(|v| v * gain[3]),
    };
    let out = haar_idwt(&scaled)?;
    if (ph, pw) == (h, w) {
        Ok(out)
    } else {
        out.crop(0, 0, h, w)
    }
}

/// Odd-sized inputs are reflect-padded by one row/column and cropped back.
pub fn pde_wave_filter(u: &PhaseImage, params: &WaveParams) -> Result<PhaseImage> {
    if !params.eps_p.is_finite() || params.subband_gain.iter().any(|g| !g.is_finite()) {
        return Err(param("wave filter parameters must be finite"));
    }
    let [a, b, c] = u.channels();
    PhaseImage::from_channels([
        filter_channel(a, params.eps_p, params.subband_gain)?,
        filter_channel(b, params.eps_p, params.subband_gain)?,
        filter_channel(c, params.eps_p, params.subband_gain)?,
    ])
}
