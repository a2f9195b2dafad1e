//! One-step-ahead neural identifier of the ego velocity.
//!
//! The regressor holds the last `n_y` measured outputs and the last `n_u`
//! controller commands. The network predicts the normalised increment
//! `y_k - y_{k-1}`, which is added back to the last output.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use super::mlp::{seeded_rng, Mlp, SgdSchedule};
use crate::error::{AccError, AccResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegressorSpec {
    pub n_u: usize,
    pub n_y: usize,
}

impl Default for RegressorSpec {
    fn default() -> Self {
        Self { n_u: 2, n_y: 2 }
    }
}

impl RegressorSpec {
    pub fn width(&self) -> usize {
        self.n_u + self.n_y
    }

    /// Samples needed before the first prediction.
    pub fn warm_up(&self) -> usize {
        self.n_u.max(self.n_y).max(1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainingParams {
    pub hidden: usize,
    pub epochs: usize,
    pub learning_rate: f64,
    pub final_lr_fraction: f64,
    pub batch_size: usize,
    /// L2 penalty on the input-to-hidden weights.
    pub weight_decay: f64,
    pub seed: u64,
    /// Maximum acceptable one-step RMSE (output units).
    pub rmse_cap: f64,
    /// Required samples per trainable parameter.
    pub samples_per_parameter: usize,
}

impl Default for TrainingParams {
    fn default() -> Self {
        Self {
            hidden: 4,
            epochs: 500,
            learning_rate: 0.01,
            final_lr_fraction: 0.1,
            batch_size: 16,
            weight_decay: 1.0,
            seed: 7,
            rmse_cap: 2e-3,
            samples_per_parameter: 10,
        }
    }
}

/// One sample of the identification data: the command issued at step `k`
/// and the output measured at step `k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IoSample {
    pub u: f64,
    pub y: f64,
}

/// Rolling window of past commands and outputs.
#[derive(Debug, Clone, PartialEq)]
pub struct RegressorBuffer {
    spec: RegressorSpec,
    us: VecDeque<f64>,
    ys: VecDeque<f64>,
}

impl RegressorBuffer {
    pub fn new(spec: RegressorSpec) -> Self {
        Self {
            spec,
            us: VecDeque::with_capacity(spec.n_u + 1),
            ys: VecDeque::with_capacity(spec.n_y + 1),
        }
    }

    pub fn push(&mut self, u: f64, y: f64) {
        self.us.push_front(u);
        self.us.truncate(self.spec.n_u);
        self.ys.push_front(y);
        self.ys.truncate(self.spec.n_y.max(1));
    }

    pub fn is_ready(&self) -> bool {
        self.us.len() >= self.spec.n_u && self.ys.len() >= self.spec.n_y.max(1)
    }

    /// `[y_{k-1}, y_{k-1} - y_{k-2}, .., y_{k-n_y+1} - y_{k-n_y}, u_{k-1}, .., u_{k-n_u}]`,
    /// or `None` while cold.
    ///
    /// Older outputs enter as successive differences: closed-loop lags are
    /// nearly collinear and the raw values would need large cancelling
    /// weights. The map from raw lags is invertible, so no information is lost.
    pub fn features(&self) -> Option<Vec<f64>> {
        if !self.is_ready() {
            return None;
        }
        let ys: Vec<f64> = self.ys.iter().take(self.spec.n_y).copied().collect();
        let diffs = ys.windows(2).map(|w| w[0] - w[1]);
        Some(
            ys.first()
                .copied()
                .into_iter()
                .chain(diffs)
                .chain(self.us.iter().copied())
                .collect(),
        )
    }

    pub fn last_output(&self) -> Option<f64> {
        self.ys.front().copied()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IdentifierModel {
    pub regressor: RegressorSpec,
    pub input_mean: Vec<f64>,
    pub input_scale: Vec<f64>,
    pub target_mean: f64,
    pub target_scale: f64,
    pub network: Mlp,
    /// In-sample one-step RMSE (output units).
    pub train_rmse: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainingReport {
    pub samples: usize,
    pub parameters: usize,
    pub train_rmse: f64,
}

/// Regressor rows and increment targets for a contiguous I/O record.
pub fn regression_rows(samples: &[IoSample], spec: RegressorSpec) -> (Vec<Vec<f64>>, Vec<f64>) {
    let mut buffer = RegressorBuffer::new(spec);
    let mut rows = Vec::new();
    let mut targets = Vec::new();
    for s in samples {
        if let (Some(x), Some(prev)) = (buffer.features(), buffer.last_output()) {
            rows.push(x);
            targets.push(s.y - prev);
        }
        buffer.push(s.u, s.y);
    }
    (rows, targets)
}

fn mean_and_scale(values: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let n = values.clone().count().max(1) as f64;
    let mean = values.clone().sum::<f64>() / n;
    let var = values.map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    let std = var.sqrt();
    // Constant channels keep unit scale so normalisation stays finite.
    (mean, if std > 1e-9 { std } else { 1.0 })
}

pub fn train_identifier(
    samples: &[IoSample],
    spec: RegressorSpec,
    params: &TrainingParams,
) -> AccResult<(IdentifierModel, TrainingReport)> {
    if spec.n_y == 0 {
        return Err(AccError::InvalidParameter(
            "identifier needs at least one past output".into(),
        ));
    }
    if params.hidden == 0 || params.epochs == 0 || !(params.learning_rate > 0.0) {
        return Err(AccError::InvalidParameter(
            "training needs hidden units, epochs and a positive learning rate".into(),
        ));
    }
    if samples.iter().any(|s| !s.u.is_finite() || !s.y.is_finite()) {
        return Err(AccError::InvalidState("training data is not finite".into()));
    }
    let parameters = Mlp::parameter_count(spec.width(), params.hidden);
    let need = params.samples_per_parameter * parameters;
    if samples.len() < need {
        return Err(AccError::InsufficientData {
            have: samples.len(),
            need,
        });
    }

    let (rows, targets) = regression_rows(samples, spec);
    let width = spec.width();
    let (input_mean, input_scale): (Vec<f64>, Vec<f64>) = (0..width)
        .map(|j| mean_and_scale(rows.iter().map(move |r| r[j])))
        .unzip();
    let (target_mean, target_scale) = mean_and_scale(targets.iter().copied());

    let features: Vec<Vec<f64>> = rows
        .iter()
        .map(|r| {
            r.iter()
                .zip(input_mean.iter().zip(&input_scale))
                .map(|(v, (m, s))| (v - m) / s)
                .collect()
        })
        .collect();
    let norm_targets: Vec<f64> = targets.iter().map(|t| (t - target_mean) / target_scale).collect();

    let mut rng = seeded_rng(params.seed);
    let mut network = Mlp::new_seeded(width, params.hidden, &mut rng);
    let schedule = SgdSchedule {
        epochs: params.epochs,
        learning_rate: params.learning_rate,
        final_lr_fraction: params.final_lr_fraction,
        batch_size: params.batch_size,
        weight_decay: params.weight_decay,
    };
    network.train(&features, &norm_targets, &schedule, &mut rng);
    if !network.is_finite() {
        return Err(AccError::TrainingFailure {
            rmse: f64::NAN,
            cap: params.rmse_cap,
        });
    }

    let mut model = IdentifierModel {
        regressor: spec,
        input_mean,
        input_scale,
        target_mean,
        target_scale,
        network,
        train_rmse: 0.0,
    };
    let train_rmse = one_step_rmse(&model, samples);
    model.train_rmse = train_rmse;
    if !(train_rmse <= params.rmse_cap) {
        return Err(AccError::TrainingFailure {
            rmse: train_rmse,
            cap: params.rmse_cap,
        });
    }
    Ok((
        model,
        TrainingReport {
            samples: samples.len(),
            parameters,
            train_rmse,
        },
    ))
}

/// One-step prediction `Y_nn`; `None` while the buffer is still warming up.
pub fn predict(model: &IdentifierModel, buffer: &RegressorBuffer) -> Option<f64> {
    let features = buffer.features()?;
    let last = buffer.last_output()?;
    Some(last + predict_increment(model, &features))
}

fn predict_increment(model: &IdentifierModel, features: &[f64]) -> f64 {
    let x: Vec<f64> = features
        .iter()
        .zip(model.input_mean.iter().zip(&model.input_scale))
        .map(|(v, (m, s))| (v - m) / s)
        .collect();
    model.target_mean + model.target_scale * model.network.forward(&x)
}

/// Residuals `y - y_nn` over a record; warm-up samples yield `None`.
pub fn residuals(model: &IdentifierModel, samples: &[IoSample]) -> Vec<Option<f64>> {
    let mut buffer = RegressorBuffer::new(model.regressor);
    samples
        .iter()
        .map(|s| {
            let r = predict(model, &buffer).map(|y_nn| s.y - y_nn);
            buffer.push(s.u, s.y);
            r
        })
        .collect()
}

pub fn one_step_rmse(model: &IdentifierModel, samples: &[IoSample]) -> f64 {
    let errs: Vec<f64> = residuals(model, samples).into_iter().flatten().collect();
    if errs.is_empty() {
        return f64::NAN;
    }
    (errs.iter().map(|e| e * e).sum::<f64>() / errs.len() as f64).sqrt()
}

/// Held-out check: RMSE on `samples` must not exceed `cap`.
pub fn validate_identifier(model: &IdentifierModel, samples: &[IoSample], cap: f64) -> AccResult<f64> {
    let rmse = one_step_rmse(model, samples);
    if rmse <= cap {
        Ok(rmse)
    } else {
        Err(AccError::TrainingFailure { rmse, cap })
    }
}
