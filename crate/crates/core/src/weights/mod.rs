//! Sample-quality weighting: pseudo-label targets, per-sample weights, a
//! soft-AUC validation loss and the second-order data-weight update, all on
//! a linear least-squares toy detector where every derivative is closed form.

mod demo;

pub use demo::{run_demo, DemoConfig, DemoReport, EpochRecord};

use serde::{Deserialize, Serialize};

use crate::error::{param, Result};

pub const DEFAULT_EPS: f64 = 1e-8;
pub const DEFAULT_OUTER_LR: f64 = 1e-4;
pub const DEFAULT_VAL_FRACTION: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Lambdas {
    pub sqe: f64,
    pub bi: f64,
}

impl Default for Lambdas {
    fn default() -> Self {
        Self { sqe: 1.0, bi: 1.0 }
    }
}

/// JSON record `{losses, q, d, lambdas, eps}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightState {
    pub losses: Vec<f64>,
    pub q: Vec<f64>,
    pub d: Vec<f64>,
    #[serde(default)]
    pub lambdas: Lambdas,
    #[serde(default = "default_eps")]
    pub eps: f64,
}

fn default_eps() -> f64 {
    DEFAULT_EPS
}

impl WeightState {
    /// Fresh state: `q` from the losses, unit data weights.
    pub fn from_losses(losses: Vec<f64>, lambdas: Lambdas, eps: f64) -> Result<Self> {
        let q = quality_targets(&losses, eps)?;
        let d = vec![1.0; losses.len()];
        Ok(Self { losses, q, d, lambdas, eps })
    }

    pub fn weights(&self) -> Result<Vec<f64>> {
        sample_weights(&self.q, &self.d, self.lambdas.sqe, self.lambdas.bi)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToyDetector {
    pub theta: Vec<f64>,
    pub features: Vec<Vec<f64>>,
    pub targets: Vec<f64>,
    pub inner_lr: f64,
    pub outer_lr: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AucConfig {
    pub alpha: f64,
}

impl ToyDetector {
    pub fn new(theta: Vec<f64>, features: Vec<Vec<f64>>, targets: Vec<f64>, inner_lr: f64) -> Result<Self> {
        let det = Self { theta, features, targets, inner_lr, outer_lr: DEFAULT_OUTER_LR };
        det.validate()?;
        Ok(det)
    }

    pub fn validate(&self) -> Result<()> {
        let k = self.theta.len();
        if self.features.iter().any(|x| x.len() != k) {
            return Err(param("feature dimension differs from parameter dimension"));
        }
        if self.features.len() != self.targets.len() {
            return Err(param("one target per sample"));
        }
        if !(self.inner_lr >= 0.0) || !(self.outer_lr >= 0.0) {
            return Err(param("learning rates must be >= 0"));
        }
        Ok(())
    }

    pub fn score(theta: &[f64], x: &[f64]) -> f64 {
        dot(theta, x)
    }

    /// `(theta^T x_i - t_i)^2` per sample.
    pub fn sample_losses(&self) -> Vec<f64> {
        self.features.iter().zip(&self.targets).map(|(x, t)| (dot(&self.theta, x) - t).powi(2)).collect()
    }

    fn sample_grad(&self, i: usize) -> Vec<f64> {
        let x = &self.features[i];
        let r = 2.0 * (dot(&self.theta, x) - self.targets[i]);
        x.iter().map(|v| r * v).collect()
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Numerically stable logistic function.
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// `y_i = 1 - (l_i - min l) / (max l - min l + eps)`.
pub fn quality_targets(losses: &[f64], eps: f64) -> Result<Vec<f64>> {
    if losses.is_empty() {
        return Err(param("quality targets need at least one loss"));
    }
    if !(eps > 0.0) {
        return Err(param("eps must be > 0"));
    }
    if losses.iter().any(|l| !l.is_finite()) {
        return Err(param("losses must be finite"));
    }
    let lo = losses.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = losses.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let den = hi - lo + eps;
    Ok(losses.iter().map(|l| 1.0 - (l - lo) / den).collect())
}

/// `w_i = lambda_sqe q_i + lambda_bi d_i`, or all ones when `lambda_sqe = 0`.
pub fn sample_weights(q: &[f64], d: &[f64], lambda_sqe: f64, lambda_bi: f64) -> Result<Vec<f64>> {
    if q.len() != d.len() {
        return Err(param(format!("q has {} entries, d has {}", q.len(), d.len())));
    }
    if lambda_sqe == 0.0 {
        return Ok(vec![1.0; q.len()]);
    }
    Ok(q.iter().zip(d).map(|(q, d)| lambda_sqe * q + lambda_bi * d).collect())
}

/// `1 - mean_ij sigma(alpha (s+_i - s-_j))`, evaluated as
/// `mean_ij sigma(-alpha (s+_i - s-_j))` to keep small losses accurate.
pub fn soft_auc_loss(pos: &[f64], neg: &[f64], alpha: f64) -> Result<f64> {
    check_auc(pos, neg, alpha)?;
    let mut s = 0.0;
    for p in pos {
        for n in neg {
            s += sigmoid(-alpha * (p - n));
        }
    }
    Ok(s / (pos.len() * neg.len()) as f64)
}

/// Wilcoxon–Mann–Whitney AUC with ties counted as one half.
pub fn exact_auc(pos: &[f64], neg: &[f64]) -> f64 {
    let mut s = 0.0;
    for p in pos {
        for n in neg {
            s += if p > n {
                1.0
            } else if p == n {
                0.5
            } else {
                0.0
            };
        }
    }
    s / (pos.len() * neg.len()) as f64
}

fn check_auc(pos: &[f64], neg: &[f64], alpha: f64) -> Result<()> {
    if pos.is_empty() || neg.is_empty() {
        return Err(param("soft-AUC needs at least one score per class"));
    }
    if !(alpha > 0.0) {
        return Err(param("auc alpha must be > 0"));
    }
    Ok(())
}

/// `theta' = theta - eta sum_i w_i grad l_i(theta)`.
pub fn toy_inner_step(det: &ToyDetector, weights: &[f64]) -> Result<Vec<f64>> {
    det.validate()?;
    if weights.len() != det.features.len() {
        return Err(param("one weight per sample"));
    }
    let mut theta = det.theta.clone();
    for (i, &w) in weights.iter().enumerate() {
        if w == 0.0 {
            continue;
        }
        for (t, g) in theta.iter_mut().zip(det.sample_grad(i)) {
            *t -= det.inner_lr * w * g;
        }
    }
    Ok(theta)
}

/// Gradient of the validation soft-AUC loss at `theta'` with respect to the
/// data weights, through one inner step:
/// `dL/dd_i = grad_theta' L . (-eta lambda_bi grad l_i(theta))`.
/// Zero when `lambda_sqe = 0`, where the weights ignore `d`.
pub fn outer_gradient(
    det: &ToyDetector,
    state: &WeightState,
    val_pos: &[Vec<f64>],
    val_neg: &[Vec<f64>],
    auc: AucConfig,
) -> Result<Vec<f64>> {
    let n = det.features.len();
    if state.d.len() != n || state.q.len() != n {
        return Err(param("weight state length differs from sample count"));
    }
    if val_pos.is_empty() || val_neg.is_empty() {
        return Err(param("validation sets must contain both classes"));
    }
    let k = det.theta.len();
    if val_pos.iter().chain(val_neg).any(|x| x.len() != k) {
        return Err(param("validation feature dimension mismatch"));
    }
    check_auc(&[0.0], &[0.0], auc.alpha)?;
    if state.lambdas.sqe == 0.0 {
        return Ok(vec![0.0; n]);
    }

    let theta_p = toy_inner_step(det, &state.weights()?)?;
    let sp: Vec<f64> = val_pos.iter().map(|x| dot(&theta_p, x)).collect();
    let sn: Vec<f64> = val_neg.iter().map(|x| dot(&theta_p, x)).collect();
    let scale = auc.alpha / (val_pos.len() * val_neg.len()) as f64;
    let mut grad_l = vec![0.0; k];
    for (i, xp) in val_pos.iter().enumerate() {
        for (j, xn) in val_neg.iter().enumerate() {
            let s = sigmoid(auc.alpha * (sp[i] - sn[j]));
            let c = -scale * s * (1.0 - s);
            for m in 0..k {
                grad_l[m] += c * (xp[m] - xn[m]);
            }
        }
    }
    let f = -det.inner_lr * state.lambdas.bi;
    Ok((0..n).map(|i| f * dot(&grad_l, &det.sample_grad(i))).collect())
}

/// `d_i <- d_i - eta_outer dL/dd_i`. The detector is borrowed immutably, so
/// its parameters are unchanged afterwards.
pub fn outer_update_weights(
    det: &ToyDetector,
    state: &WeightState,
    val_pos: &[Vec<f64>],
    val_neg: &[Vec<f64>],
    auc: AucConfig,
) -> Result<Vec<f64>> {
    let g = outer_gradient(det, state, val_pos, val_neg, auc)?;
    Ok(state.d.iter().zip(g).map(|(d, g)| d - det.outer_lr * g).collect())
}

/// Validation loss after the inner step, as a function of the data weights;
/// the quantity `outer_gradient` differentiates.
pub fn outer_loss(
    det: &ToyDetector,
    state: &WeightState,
    val_pos: &[Vec<f64>],
    val_neg: &[Vec<f64>],
    auc: AucConfig,
) -> Result<f64> {
    let theta_p = toy_inner_step(det, &state.weights()?)?;
    let sp: Vec<f64> = val_pos.iter().map(|x| dot(&theta_p, x)).collect();
    let sn: Vec<f64> = val_neg.iter().map(|x| dot(&theta_p, x)).collect();
    soft_auc_loss(&sp, &sn, auc.alpha)
}

/// Indices of the `ceil(fraction n)` (at least one) samples whose quality
/// score has the highest Bernoulli entropy; ties keep the lower index.
/// Returned in ascending index order.
pub fn select_validation(q: &[f64], fraction: f64) -> Result<Vec<usize>> {
    if q.is_empty() {
        return Ok(Vec::new());
    }
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(param("validation fraction must lie in (0, 1]"));
    }
    let count = ((fraction * q.len() as f64).ceil() as usize).clamp(1, q.len());
    let entropy = |p: f64| {
        let p = p.clamp(0.0, 1.0);
        let h = |v: f64| if v > 0.0 { -v * v.ln() } else { 0.0 };
        h(p) + h(1.0 - p)
    };
    let mut idx: Vec<usize> = (0..q.len()).collect();
    idx.sort_by(|&a, &b| entropy(q[b]).total_cmp(&entropy(q[a])).then(a.cmp(&b)));
    idx.truncate(count);
    idx.sort_unstable();
    Ok(idx)
}
