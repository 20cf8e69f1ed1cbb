//! Thin-plate spline displacement interpolation.
//!
//! Each axis is fitted independently:
//!
//! ```text
//! f(p) = sum_i w_i phi(|p - p_i|) + a0 + a1 (y - cy)/s + a2 (x - cx)/s
//! phi(r) = r^2 ln r,  phi(0) = 0
//! ```
//!
//! with side conditions `sum w_i = sum w_i y_i = sum w_i x_i = 0`, distances
//! in pixels. The centroid `(cy, cx)` and length scale `s` only condition the
//! affine block; the interpolant does not depend on them.

use nalgebra::{DMatrix, DVector};

use super::ScalarField;
use crate::error::{param, Error, Result};

pub const DEFAULT_RIDGE: f64 = 1e-8;

/// Control-point residual above which a fit is rejected.
pub const FIT_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct TpsModel {
    src: Vec<(f64, f64)>,
    weights_y: Vec<f64>,
    weights_x: Vec<f64>,
    affine_y: [f64; 3],
    affine_x: [f64; 3],
    centroid: (f64, f64),
    length_scale: f64,
    ridge: f64,
    condition: f64,
}

/// Per-pixel source coordinates for [`remap`](super::remap_image).
#[derive(Debug, Clone, PartialEq)]
pub struct DisplacementField {
    /// Source column for each output pixel.
    pub map_x: ScalarField,
    /// Source row for each output pixel.
    pub map_y: ScalarField,
}

impl DisplacementField {
    pub fn identity(height: usize, width: usize) -> Result<Self> {
        Ok(Self {
            map_x: ScalarField::from_fn(height, width, |_, x| x as f64)?,
            map_y: ScalarField::from_fn(height, width, |y, _| y as f64)?,
        })
    }

    pub fn dims(&self) -> (usize, usize) {
        self.map_x.dims()
    }
}

#[inline]
fn kernel(r: f64) -> f64 {
    if r == 0.0 {
        0.0
    } else {
        r * r * r.ln()
    }
}

/// Fits a TPS through `src[i] -> displacements[i]`, both as `(row, col)` /
/// `(dy, dx)` pairs. `length_scale` must be positive; pass `1.0` for the raw
/// pixel metric.
pub fn tps_fit(
    src: &[(f64, f64)],
    displacements: &[(f64, f64)],
    ridge: f64,
    length_scale: f64,
) -> Result<TpsModel> {
    let n = src.len();
    if n < 3 {
        return Err(param(format!("tps needs at least 3 control points, got {n}")));
    }
    if displacements.len() != n {
        return Err(param("one displacement per control point"));
    }
    if !(ridge >= 0.0) || !(length_scale > 0.0) {
        return Err(param("tps ridge must be >= 0 and length scale > 0"));
    }
    if src.iter().chain(displacements).any(|&(a, b)| !a.is_finite() || !b.is_finite()) {
        return Err(param("non-finite tps input"));
    }

    let cy = src.iter().map(|p| p.0).sum::<f64>() / n as f64;
    let cx = src.iter().map(|p| p.1).sum::<f64>() / n as f64;
    let local: Vec<(f64, f64)> = src
        .iter()
        .map(|&(y, x)| ((y - cy) / length_scale, (x - cx) / length_scale))
        .collect();
    let centred: Vec<(f64, f64)> = src.iter().map(|&(y, x)| (y - cy, x - cx)).collect();
    if collinear(&local) {
        return Err(Error::Numeric("tps control points are collinear".into()));
    }

    let m = n + 3;
    let mut a = DMatrix::<f64>::zeros(m, m);
    for i in 0..n {
        for j in 0..n {
            let r = dist(centred[i], centred[j]);
            a[(i, j)] = kernel(r) + if i == j { ridge } else { 0.0 };
        }
        let row = [1.0, local[i].0, local[i].1];
        for (k, &v) in row.iter().enumerate() {
            a[(i, n + k)] = v;
            a[(n + k, i)] = v;
        }
    }

    let sv = a.clone().singular_values();
    let smax = sv.max();
    let smin = sv.min();
    let condition = if smin > 0.0 { smax / smin } else { f64::INFINITY };

    let lu = a.lu();
    let solve = |axis: usize| -> Result<DVector<f64>> {
        let mut rhs = DVector::<f64>::zeros(m);
        for (i, d) in displacements.iter().enumerate() {
            rhs[i] = if axis == 0 { d.0 } else { d.1 };
        }
        lu.solve(&rhs)
            .filter(|s| s.iter().all(|v| v.is_finite()))
            .ok_or_else(|| Error::Numeric(format!("singular tps system (condition {condition:e})")))
    };
    let sy = solve(0)?;
    let sx = solve(1)?;

    let model = TpsModel {
        src: src.to_vec(),
        weights_y: sy.rows(0, n).iter().copied().collect(),
        weights_x: sx.rows(0, n).iter().copied().collect(),
        affine_y: [sy[n], sy[n + 1], sy[n + 2]],
        affine_x: [sx[n], sx[n + 1], sx[n + 2]],
        centroid: (cy, cx),
        length_scale,
        ridge,
        condition,
    };

    let worst = src
        .iter()
        .zip(displacements)
        .map(|(&p, &d)| {
            let (ey, ex) = model.eval(p.0, p.1);
            (ey - d.0).abs().max((ex - d.1).abs())
        })
        .fold(0.0, f64::max);
    if !(worst <= FIT_TOLERANCE) {
        return Err(Error::Numeric(format!(
            "tps fit residual {worst:e} px exceeds {FIT_TOLERANCE:e} (condition {condition:e})"
        )));
    }
    Ok(model)
}

impl TpsModel {
    /// Displacement `(dy, dx)` at `(row, col)`.
    pub fn eval(&self, y: f64, x: f64) -> (f64, f64) {
        let s = self.length_scale;
        let p = ((y - self.centroid.0) / s, (x - self.centroid.1) / s);
        let mut dy = self.affine_y[0] + self.affine_y[1] * p.0 + self.affine_y[2] * p.1;
        let mut dx = self.affine_x[0] + self.affine_x[1] * p.0 + self.affine_x[2] * p.1;
        for (i, &(sy, sx)) in self.src.iter().enumerate() {
            let k = kernel(dist((y, x), (sy, sx)));
            dy += self.weights_y[i] * k;
            dx += self.weights_x[i] * k;
        }
        (dy, dx)
    }

    pub fn source_points(&self) -> &[(f64, f64)] {
        &self.src
    }

    pub fn ridge(&self) -> f64 {
        self.ridge
    }

    /// 2-norm condition number of the fitted system.
    pub fn condition(&self) -> f64 {
        self.condition
    }
}

/// Backward map for remapping: `map_x(v, u) = u - dx(v, u)`,
/// `map_y(v, u) = v - dy(v, u)` for row `v`, column `u`.
pub fn tps_eval_field(model: &TpsModel, height: usize, width: usize) -> Result<DisplacementField> {
    let mut map_x = ScalarField::zeros(height, width)?;
    let mut map_y = ScalarField::zeros(height, width)?;
    for v in 0..height {
        for u in 0..width {
            let (dy, dx) = model.eval(v as f64, u as f64);
            map_x.set(v, u, u as f64 - dx);
            map_y.set(v, u, v as f64 - dy);
        }
    }
    Ok(DisplacementField { map_x, map_y })
}

#[inline]
fn dist(a: (f64, f64), b: (f64, f64)) -> f64 {
    ((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)).sqrt()
}

/// True when the centred points span less than two dimensions.
fn collinear(centred: &[(f64, f64)]) -> bool {
    let (mut syy, mut sxx, mut sxy) = (0.0, 0.0, 0.0);
    for &(y, x) in centred {
        syy += y * y;
        sxx += x * x;
        sxy += x * y;
    }
    let det = syy * sxx - sxy * sxy;
    let scale = (syy + sxx).powi(2);
    scale == 0.0 || det <= 1e-12 * scale
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn corners() -> Vec<(f64, f64)> {
        vec![(0.0, 0.0), (0.0, 20.0), (15.0, 0.0), (15.0, 20.0)]
    }

    #[test]
    fn rejects_degenerate_inputs() {
        assert!(tps_fit(&[(0.0, 0.0), (1.0, 1.0)], &[(0.0, 0.0); 2], DEFAULT_RIDGE, 1.0).is_err());
        let line = [(0.0, 0.0), (1.0, 1.0), (2.0, 2.0), (5.0, 5.0)];
        assert!(matches!(
            tps_fit(&line, &[(1.0, 0.0); 4], DEFAULT_RIDGE, 1.0),
            Err(Error::Numeric(_))
        ));
        assert!(tps_fit(&corners(), &[(0.0, 0.0); 3], DEFAULT_RIDGE, 1.0).is_err());
    }

    #[test]
    fn duplicate_points_with_conflicting_targets_fail() {
        let pts = [(0.0, 0.0), (0.0, 0.0), (5.0, 0.0), (0.0, 5.0)];
        let d = [(1.0, 0.0), (-1.0, 0.0), (0.0, 0.0), (0.0, 0.0)];
        assert!(matches!(tps_fit(&pts, &d, DEFAULT_RIDGE, 1.0), Err(Error::Numeric(_))));
    }

    #[test]
    fn zero_displacements_give_zero_model() {
        let m = tps_fit(&corners(), &[(0.0, 0.0); 4], DEFAULT_RIDGE, 1.0).unwrap();
        for (y, x) in [(3.0, 4.0), (-10.0, 50.0), (7.5, 7.5)] {
            assert_eq!(m.eval(y, x), (0.0, 0.0));
        }
    }

    #[test]
    fn constant_displacement_reproduced_everywhere() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
        let pts: Vec<(f64, f64)> = (0..7).map(|_| (rng.gen_range(0.0..40.0), rng.gen_range(0.0..40.0))).collect();
        let m = tps_fit(&pts, &[(2.5, -1.25); 7], DEFAULT_RIDGE, 30.0).unwrap();
        for _ in 0..50 {
            let (dy, dx) = m.eval(rng.gen_range(-20.0..60.0), rng.gen_range(-20.0..60.0));
            assert!((dy - 2.5).abs() < 1e-6 && (dx + 1.25).abs() < 1e-6);
        }
    }

    #[test]
    fn interpolates_random_corner_offsets() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        let d: Vec<(f64, f64)> = (0..4).map(|_| (rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0))).collect();
        let m = tps_fit(&corners(), &d, DEFAULT_RIDGE, 1.0).unwrap();
        for (p, t) in corners().into_iter().zip(&d) {
            let (ey, ex) = m.eval(p.0, p.1);
            assert!((ey - t.0).abs() <= 1e-6 && (ex - t.1).abs() <= 1e-6);
        }
        assert!(m.condition().is_finite());
    }

    #[test]
    fn length_scale_does_not_change_interpolant() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
        let pts: Vec<(f64, f64)> = (0..6).map(|_| (rng.gen_range(0.0..50.0), rng.gen_range(0.0..50.0))).collect();
        let d: Vec<(f64, f64)> = (0..6).map(|_| (rng.gen_range(-8.0..8.0), rng.gen_range(-8.0..8.0))).collect();
        let a = tps_fit(&pts, &d, 0.0, 1.0).unwrap();
        let b = tps_fit(&pts, &d, 0.0, 55.0).unwrap();
        for _ in 0..20 {
            let (y, x) = (rng.gen_range(0.0..50.0), rng.gen_range(0.0..50.0));
            let (ay, ax) = a.eval(y, x);
            let (by, bx) = b.eval(y, x);
            assert!((ay - by).abs() < 1e-7 && (ax - bx).abs() < 1e-7);
        }
    }

    #[test]
    fn eval_field_identity_and_shift() {
        let zero = tps_fit(&corners(), &[(0.0, 0.0); 4], DEFAULT_RIDGE, 1.0).unwrap();
        let f = tps_eval_field(&zero, 5, 6).unwrap();
        assert_eq!(f, DisplacementField::identity(5, 6).unwrap());

        let shift = tps_fit(&corners(), &[(0.0, 1.0); 4], DEFAULT_RIDGE, 1.0).unwrap();
        let f = tps_eval_field(&shift, 5, 6).unwrap();
        for v in 0..5 {
            for u in 0..6 {
                assert!((f.map_x.get(v, u) - (u as f64 - 1.0)).abs() < 1e-9);
                assert!((f.map_y.get(v, u) - v as f64).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn eval_field_agrees_with_pointwise_model() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(21);
        let pts: Vec<(f64, f64)> = (0..8).map(|_| (rng.gen_range(0.0..30.0), rng.gen_range(0.0..40.0))).collect();
        let d: Vec<(f64, f64)> = (0..8).map(|_| (rng.gen_range(-6.0..6.0), rng.gen_range(-6.0..6.0))).collect();
        let m = tps_fit(&pts, &d, DEFAULT_RIDGE, 40.0).unwrap();
        let f = tps_eval_field(&m, 30, 40).unwrap();
        for _ in 0..10 {
            let (v, u) = (rng.gen_range(0..30usize), rng.gen_range(0..40usize));
            let (dy, dx) = m.eval(v as f64, u as f64);
            assert_eq!(f.map_x.get(v, u), u as f64 - dx);
            assert_eq!(f.map_y.get(v, u), v as f64 - dy);
        }
    }
}
