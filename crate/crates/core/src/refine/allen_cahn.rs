//! Allen–Cahn residual, masked PDE loss and the anchored gradient flow that
//! stands in for a learned refiner.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::PhaseImage;
use crate::error::{param, Error, Result};
use crate::field::{laplacian, same_dims, BinaryMask, ScalarField};

/// Box bound applied to the phase after every step.
pub const PHASE_CLAMP: f64 = 1.5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AcParams {
    pub eps2: f64,
    pub dt: f64,
    pub n_steps: usize,
    /// Pull toward the initial image on unmasked pixels.
    pub fidelity: f64,
}

impl Default for AcParams {
    fn default() -> Self {
        Self { eps2: 0.005, dt: 0.1, n_steps: 500, fidelity: 4.0 }
    }
}

impl AcParams {
    /// Requires `dt <= 1 / (4 eps2)` (diffusion) and `2 dt < 1` (reaction).
    pub fn validate(&self) -> Result<()> {
        if !(self.eps2 > 0.0) || !self.eps2.is_finite() {
            return Err(param("eps2 must be > 0"));
        }
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(param("dt must be > 0"));
        }
        if self.dt > 1.0 / (4.0 * self.eps2) || 2.0 * self.dt >= 1.0 {
            return Err(param(format!(
                "dt = {} violates the explicit stability bounds for eps2 = {}",
                self.dt, self.eps2
            )));
        }
        if !(self.fidelity >= 0.0) || !self.fidelity.is_finite() {
            return Err(param("fidelity must be finite and >= 0"));
        }
        Ok(())
    }
}

/// `eps2 * lap(u) - (u^3 - u)` per channel.
pub fn allen_cahn_residual(u: &PhaseImage, eps2: f64) -> PhaseImage {
    let chans = u.channels().clone().map(|c| {
        let lap = laplacian(&c);
        let data = c.data().iter().zip(lap.data()).map(|(&v, &l)| eps2 * l - (v * v * v - v)).collect();
        ScalarField::from_vec(c.height(), c.width(), data).expect("same dims")
    });
    PhaseImage::from_channels(chans).expect("same dims")
}

/// Sum of squared residuals over masked pixels and all channels.
pub fn pde_loss(u: &PhaseImage, mask: &BinaryMask, eps2: f64) -> Result<f64> {
    same_dims(u.dims(), mask.dims())?;
    let res = allen_cahn_residual(u, eps2);
    let m = mask.data();
    Ok(res
        .channels()
        .iter()
        .map(|c| c.data().iter().zip(m).filter(|(_, &k)| k == 1).map(|(&r, _)| r * r).sum::<f64>())
        .sum())
}

/// Discrete energy whose gradient flow `ac_step` follows:
/// `sum eps2/2 |grad u|^2 + (u^2 - 1)^2 / 4 + fidelity/2 (u - init)^2 (1 - mask)`,
/// with `|grad u|^2` summed over each horizontal and vertical pixel pair once.
pub fn ginzburg_landau_energy(u: &PhaseImage, init: &PhaseImage, mask: &BinaryMask, params: &AcParams) -> Result<f64> {
    same_dims(u.dims(), init.dims())?;
    same_dims(u.dims(), mask.dims())?;
    let (h, w) = u.dims();
    let m = mask.data();
    let mut total = 0.0;
    for (c, ic) in u.channels().iter().zip(init.channels()) {
        let d = c.data();
        let d0 = ic.data();
        let mut grad = 0.0;
        let mut bulk = 0.0;
        for y in 0..h {
            for x in 0..w {
                let i = y * w + x;
                let v = d[i];
                if x + 1 < w {
                    grad += (d[i + 1] - v).powi(2);
                }
                if y + 1 < h {
                    grad += (d[i + w] - v).powi(2);
                }
                bulk += (v * v - 1.0).powi(2) / 4.0;
                if m[i] == 0 {
                    bulk += 0.5 * params.fidelity * (v - d0[i]).powi(2);
                }
            }
        }
        total += 0.5 * params.eps2 * grad + bulk;
    }
    Ok(total)
}

fn step_channel(u: &ScalarField, init: &ScalarField, mask: &[u8], params: &AcParams) -> ScalarField {
    let lap = laplacian(u);
    let data = u
        .data()
        .iter()
        .zip(lap.data())
        .zip(init.data())
        .zip(mask)
        .map(|(((&v, &l), &v0), &k)| {
            let explicit = v + params.dt * (params.eps2 * l - (v * v * v - v));
            let next = if k == 0 {
                let a = params.dt * params.fidelity;
                (explicit + a * v0) / (1.0 + a)
            } else {
                explicit
            };
            next.clamp(-PHASE_CLAMP, PHASE_CLAMP)
        })
        .collect();
    ScalarField::from_vec(u.height(), u.width(), data).expect("same dims")
}

/// One step of the anchored Allen–Cahn flow: explicit Euler on the
/// diffusion and double-well terms, implicit on the quadratic fidelity term
/// (so any `fidelity` is stable), then clamped to `±PHASE_CLAMP`. This is a
/// proximal-gradient step on [`ginzburg_landau_energy`]. `step` only labels
/// an instability error.
pub fn ac_step(u: &PhaseImage, init: &PhaseImage, mask: &BinaryMask, params: &AcParams, step: usize) -> Result<PhaseImage> {
    same_dims(u.dims(), init.dims())?;
    same_dims(u.dims(), mask.dims())?;
    let m = mask.data();
    let chans: Vec<ScalarField> = (0..3)
        .into_par_iter()
        .map(|c| step_channel(u.channel(c), init.channel(c), m, params))
        .collect();
    let out = PhaseImage::from_channels(chans.try_into().expect("three channels"))?;
    if !out.is_finite() {
        return Err(Error::Unstable { step });
    }
    Ok(out)
}

/// Runs `n_steps` of [`ac_step`] from `init`.
pub fn ac_relax(init: &PhaseImage, mask: &BinaryMask, params: &AcParams) -> Result<PhaseImage> {
    params.validate()?;
    same_dims(init.dims(), mask.dims())?;
    if !init.is_finite() {
        return Err(Error::Unstable { step: 0 });
    }
    let mut u = init.clone();
    for step in 0..params.n_steps {
        u = ac_step(&u, init, mask, params, step)?;
    }
    Ok(u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;
    use rand::Rng;

    fn random_phase(h: usize, w: usize, seed: u64) -> PhaseImage {
        let mut rng = stream(seed);
        let chans = std::array::from_fn(|_| ScalarField::from_fn(h, w, |_, _| rng.gen_range(-1.0..1.0)).unwrap());
        PhaseImage::from_channels(chans).unwrap()
    }

    #[test]
    fn residual_at_constants() {
        for (v, expect) in [(1.0, 0.0), (0.0, 0.0), (-1.0, 0.0), (0.5, 0.375)] {
            let u = PhaseImage::constant(4, 5, v).unwrap();
            let r = allen_cahn_residual(&u, 0.005);
            assert!(r.channels().iter().all(|c| c.data().iter().all(|&x| x == expect)), "u = {v}");
        }
    }

    #[test]
    fn residual_is_odd() {
        let u = random_phase(6, 7, 1);
        let a = allen_cahn_residual(&u, 0.01);
        let b = allen_cahn_residual(&u.map(|v| -v), 0.01);
        for c in 0..3 {
            for (x, y) in a.channel(c).data().iter().zip(b.channel(c).data()) {
                assert_eq!(*x, -*y);
            }
        }
    }

    #[test]
    fn pde_loss_values() {
        let u = PhaseImage::constant(8, 8, 0.5).unwrap();
        let empty = BinaryMask::zeros(8, 8).unwrap();
        assert_eq!(pde_loss(&u, &empty, 0.005).unwrap(), 0.0);
        let ten = BinaryMask::from_fn(8, 8, |y, x| y == 3 && x < 10 || y == 4 && x < 2).unwrap();
        assert_eq!(ten.count(), 10);
        assert!((pde_loss(&u, &ten, 0.005).unwrap() - 4.21875).abs() < 1e-12);
        let ones = PhaseImage::constant(8, 8, 1.0).unwrap();
        assert_eq!(pde_loss(&ones, &ten, 0.005).unwrap(), 0.0);

        let r = random_phase(8, 8, 2);
        let full = BinaryMask::ones(8, 8).unwrap();
        let direct: f64 = allen_cahn_residual(&r, 0.005).channels().iter().map(ScalarField::sum_sq).sum();
        assert_eq!(pde_loss(&r, &full, 0.005).unwrap(), direct);
    }

    #[test]
    fn relax_trivial_cases() {
        let init = random_phase(10, 10, 3);
        let m = BinaryMask::from_fn(10, 10, |y, _| y < 5).unwrap();
        let p0 = AcParams { n_steps: 0, ..Default::default() };
        assert_eq!(ac_relax(&init, &m, &p0).unwrap(), init);
        let ones = PhaseImage::constant(10, 10, 1.0).unwrap();
        assert_eq!(ac_relax(&ones, &m, &AcParams::default()).unwrap(), ones);
    }

    #[test]
    fn stiff_fidelity_pins_unmasked_image() {
        let init = random_phase(12, 12, 4);
        let empty = BinaryMask::zeros(12, 12).unwrap();
        let p = AcParams { fidelity: 1e6, ..Default::default() };
        let out = ac_relax(&init, &empty, &p).unwrap();
        for c in 0..3 {
            for (a, b) in out.channel(c).data().iter().zip(init.channel(c).data()) {
                assert!((a - b).abs() <= 1e-3);
            }
        }
    }

    #[test]
    fn energy_decreases_every_step() {
        let p = AcParams::default();
        for seed in 0..3 {
            let init = random_phase(32, 32, 100 + seed);
            let mut rng = stream(seed);
            let m = BinaryMask::from_fn(32, 32, |_, _| rng.gen_bool(0.4)).unwrap();
            let mut u = init.clone();
            let mut e = ginzburg_landau_energy(&u, &init, &m, &p).unwrap();
            for step in 0..p.n_steps {
                u = ac_step(&u, &init, &m, &p, step).unwrap();
                let e1 = ginzburg_landau_energy(&u, &init, &m, &p).unwrap();
                assert!(e1 <= e * (1.0 + 1e-12), "step {step}: {e} -> {e1}");
                e = e1;
            }
        }
    }

    #[test]
    fn unstable_step_reported() {
        let mut init = random_phase(4, 4, 5);
        init.channels_mut()[1].set(2, 2, f64::NAN);
        let m = BinaryMask::ones(4, 4).unwrap();
        assert!(matches!(ac_relax(&init, &m, &AcParams::default()), Err(Error::Unstable { step: 0 })));
    }

    #[test]
    fn stability_bounds_enforced() {
        assert!(AcParams { dt: 0.6, ..Default::default() }.validate().is_err());
        assert!(AcParams { eps2: 10.0, dt: 0.1, ..Default::default() }.validate().is_err());
        AcParams::default().validate().unwrap();
    }
}
