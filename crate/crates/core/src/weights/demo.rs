//! Epoch loop on a synthetic two-class toy set: quality targets, weights,
//! outer data-weight update (on a discarded copy of the inner step), then
//! the real inner training step.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{
    exact_auc, outer_loss, outer_update_weights, quality_targets, select_validation, toy_inner_step, AucConfig,
    Lambdas, ToyDetector, WeightState, DEFAULT_EPS, DEFAULT_OUTER_LR, DEFAULT_VAL_FRACTION,
};
use crate::error::{param, Result};
use crate::rng::stream;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DemoConfig {
    pub seed: u64,
    pub n_normal: usize,
    pub n_anomalous: usize,
    /// Anomaly-labelled samples placed on the normal cluster.
    pub n_adversarial: usize,
    pub dim: usize,
    /// Half-width of the uniform feature noise around each cluster centre.
    pub noise: f64,
    pub epochs: usize,
    pub inner_lr: f64,
    pub outer_lr: f64,
    pub lambdas: Lambdas,
    pub auc_alpha: f64,
    pub eps: f64,
    pub val_fraction: f64,
}

impl Default for DemoConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            n_normal: 40,
            n_anomalous: 40,
            n_adversarial: 1,
            dim: 4,
            noise: 0.3,
            epochs: 10,
            inner_lr: 0.002,
            outer_lr: DEFAULT_OUTER_LR,
            lambdas: Lambdas::default(),
            auc_alpha: 5.0,
            eps: DEFAULT_EPS,
            val_fraction: DEFAULT_VAL_FRACTION,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub q: Vec<f64>,
    pub weights: Vec<f64>,
    /// Data weights after this epoch's outer update.
    pub d: Vec<f64>,
    /// Soft-AUC validation loss after the (discarded) inner step.
    pub val_soft_auc_loss: f64,
    /// Exact AUC of the detector over all training samples, before training.
    pub train_auc: f64,
    pub mean_loss: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DemoReport {
    pub config: DemoConfig,
    pub adversarial: Vec<usize>,
    pub initial_d: Vec<f64>,
    pub epochs: Vec<EpochRecord>,
    pub final_theta: Vec<f64>,
    pub final_state: WeightState,
}

pub fn run_demo(config: &DemoConfig) -> Result<DemoReport> {
    if config.n_normal == 0 || config.n_anomalous == 0 {
        return Err(param("demo needs at least one normal and one anomalous sample"));
    }
    if config.dim == 0 {
        return Err(param("demo feature dimension must be >= 1"));
    }
    if !(config.noise >= 0.0) || !config.noise.is_finite() {
        return Err(param("demo noise must be finite and >= 0"));
    }
    let auc = AucConfig { alpha: config.auc_alpha };

    let mut rng = stream(config.seed);
    let mu: Vec<f64> = vec![1.0 / (config.dim as f64).sqrt(); config.dim];
    let jitter = |centre: &[f64], rng: &mut crate::rng::Stream| -> Vec<f64> {
        centre
            .iter()
            .map(|c| if config.noise > 0.0 { c + rng.gen_range(-config.noise..config.noise) } else { *c })
            .collect()
    };
    let neg_mu: Vec<f64> = mu.iter().map(|v| -v).collect();
    let mut features = Vec::new();
    let mut targets = Vec::new();
    for _ in 0..config.n_normal {
        features.push(jitter(&neg_mu, &mut rng));
        targets.push(0.0);
    }
    for _ in 0..config.n_anomalous {
        features.push(jitter(&mu, &mut rng));
        targets.push(1.0);
    }
    let first_adv = features.len();
    for _ in 0..config.n_adversarial {
        features.push(jitter(&neg_mu, &mut rng));
        targets.push(1.0);
    }
    let adversarial: Vec<usize> = (first_adv..features.len()).collect();
    let theta: Vec<f64> = mu.iter().map(|m| 0.5 * m + rng.gen_range(-0.05..0.05)).collect();

    let mut det = ToyDetector::new(theta, features, targets, config.inner_lr)?;
    det.outer_lr = config.outer_lr;
    let mut state = WeightState::from_losses(det.sample_losses(), config.lambdas, config.eps)?;
    let initial_d = state.d.clone();
    let pos_idx: Vec<usize> = (0..det.targets.len()).filter(|&i| det.targets[i] == 1.0).collect();
    let neg_idx: Vec<usize> = (0..det.targets.len()).filter(|&i| det.targets[i] == 0.0).collect();

    let mut epochs = Vec::with_capacity(config.epochs);
    for epoch in 0..config.epochs {
        state.losses = det.sample_losses();
        state.q = quality_targets(&state.losses, state.eps)?;
        let pick = |idx: &[usize]| -> Result<Vec<Vec<f64>>> {
            let q: Vec<f64> = idx.iter().map(|&i| state.q[i]).collect();
            Ok(select_validation(&q, config.val_fraction)?.into_iter().map(|k| det.features[idx[k]].clone()).collect())
        };
        let val_pos = pick(&pos_idx)?;
        let val_neg = pick(&neg_idx)?;

        let weights = state.weights()?;
        let val_loss = outer_loss(&det, &state, &val_pos, &val_neg, auc)?;
        let new_d = outer_update_weights(&det, &state, &val_pos, &val_neg, auc)?;
        let scores: Vec<f64> = det.features.iter().map(|x| ToyDetector::score(&det.theta, x)).collect();
        let sp: Vec<f64> = pos_idx.iter().map(|&i| scores[i]).collect();
        let sn: Vec<f64> = neg_idx.iter().map(|&i| scores[i]).collect();
        let mean_loss = state.losses.iter().sum::<f64>() / state.losses.len() as f64;

        det.theta = toy_inner_step(&det, &weights)?;
        state.d = new_d;
        epochs.push(EpochRecord {
            epoch,
            q: state.q.clone(),
            weights,
            d: state.d.clone(),
            val_soft_auc_loss: val_loss,
            train_auc: exact_auc(&sp, &sn),
            mean_loss,
        });
    }
    state.losses = det.sample_losses();
    state.q = quality_targets(&state.losses, state.eps)?;

    Ok(DemoReport {
        config: config.clone(),
        adversarial,
        initial_d,
        epochs,
        final_theta: det.theta,
        final_state: state,
    })
}
