//! Intrusion detection: neural one-step identifier, per-mode adaptive
//! thresholds `mu ± k sigma`, and a latched alarm that hands control to the
//! compensator.

mod detector;
mod identifier;
mod mlp;
mod threshold;

use std::path::Path;

use serde::{Deserialize, Serialize};

pub use detector::{check_reference, detect, AlarmChannel, IdsState};
pub use identifier::{
    one_step_rmse, predict, regression_rows, residuals, train_identifier, validate_identifier, IdentifierModel,
    IoSample, RegressorBuffer, RegressorSpec, TrainingParams, TrainingReport,
};
pub use mlp::Mlp;
pub use threshold::{calibrate_threshold, false_positive_prob, ModeStats, ThresholdSet, MIN_MODE_SAMPLES};

use crate::controller::Mode;
use crate::error::{AccError, AccResult};

/// Residuals over a mode-labelled record, paired with their mode labels.
pub fn labelled_residuals(model: &IdentifierModel, record: &[(Mode, IoSample)]) -> Vec<(Mode, f64)> {
    let samples: Vec<IoSample> = record.iter().map(|(_, s)| *s).collect();
    residuals(model, &samples)
        .into_iter()
        .zip(record)
        .filter_map(|(r, (mode, _))| r.map(|e| (*mode, e)))
        .collect()
}

/// Calibrates thresholds from the identifier's residuals on a safe record.
pub fn calibrate_from_record(
    model: &IdentifierModel,
    record: &[(Mode, IoSample)],
    k: f64,
    sigma_floor: f64,
) -> AccResult<ThresholdSet> {
    calibrate_threshold(&labelled_residuals(model, record), k, sigma_floor)
}

pub const MODEL_FORMAT_VERSION: u32 = 1;

/// A trained detector as persisted between runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IdsModelFile {
    pub format_version: u32,
    pub identifier: IdentifierModel,
    pub thresholds: ThresholdSet,
}

impl IdsModelFile {
    pub fn new(identifier: IdentifierModel, thresholds: ThresholdSet) -> Self {
        Self {
            format_version: MODEL_FORMAT_VERSION,
            identifier,
            thresholds,
        }
    }

    pub fn to_toml(&self) -> AccResult<String> {
        toml::to_string(self).map_err(|e| AccError::Config(e.to_string()))
    }

    pub fn from_toml(text: &str) -> AccResult<Self> {
        let file: Self = toml::from_str(text).map_err(|e| AccError::Config(e.to_string()))?;
        if file.format_version != MODEL_FORMAT_VERSION {
            return Err(AccError::Config(format!(
                "unsupported model format version {} (expected {MODEL_FORMAT_VERSION})",
                file.format_version
            )));
        }
        let id = &file.identifier;
        let width = id.regressor.width();
        if id.input_mean.len() != width
            || id.input_scale.len() != width
            || id.network.inputs != width
            || id.network.w_hidden.len() != id.network.hidden * width
            || id.network.b_hidden.len() != id.network.hidden
            || id.network.w_out.len() != id.network.hidden
            || id.network.w_skip.len() != width
        {
            return Err(AccError::Config("model file has inconsistent dimensions".into()));
        }
        if id.input_scale.iter().any(|s| !(*s > 0.0)) || !(id.target_scale > 0.0) {
            return Err(AccError::Config("model normalisation scales must be positive".into()));
        }
        Ok(file)
    }

    pub fn load(path: &Path) -> AccResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| AccError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn save(&self, path: &Path) -> AccResult<()> {
        std::fs::write(path, self.to_toml()?)?;
        Ok(())
    }
}
