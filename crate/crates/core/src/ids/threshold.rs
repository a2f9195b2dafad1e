use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::controller::Mode;
use crate::error::{AccError, AccResult};

/// Modes with fewer calibration residuals than this borrow the pooled statistics.
pub const MIN_MODE_SAMPLES: usize = 30;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModeStats {
    pub mu: f64,
    pub sigma: f64,
    pub samples: usize,
    /// Set when the mode had too few samples and uses the pooled statistics.
    pub pooled_fallback: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThresholdSet {
    pub k: f64,
    pub sigma_floor: f64,
    pub speed_control: ModeStats,
    pub spacing_control: ModeStats,
}

impl ThresholdSet {
    pub fn stats(&self, mode: Mode) -> &ModeStats {
        match mode {
            Mode::SpeedControl => &self.speed_control,
            Mode::SpacingControl => &self.spacing_control,
        }
    }

    /// `|e - mu| > k sigma` for the given mode.
    pub fn exceeds(&self, mode: Mode, residual: f64) -> bool {
        let s = self.stats(mode);
        (residual - s.mu).abs() > self.k * s.sigma
    }

    pub fn with_k(mut self, k: f64) -> Self {
        self.k = k;
        self
    }
}

/// Probability that a Gaussian residual leaves `mu ± k sigma`: `erfc(k/√2)`.
pub fn false_positive_prob(k: f64) -> AccResult<f64> {
    if !(k >= 0.0) {
        return Err(AccError::InvalidParameter(format!(
            "threshold multiplier must be non-negative, got {k}"
        )));
    }
    Ok(erfc(k / std::f64::consts::SQRT_2))
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mu = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mu).powi(2)).sum::<f64>() / n;
    (mu, var.sqrt())
}

/// Per-mode residual statistics from mode-labelled safe-interval residuals.
pub fn calibrate_threshold(labelled: &[(Mode, f64)], k: f64, sigma_floor: f64) -> AccResult<ThresholdSet> {
    if !(k > 0.0) {
        return Err(AccError::InvalidParameter(format!("k must be positive, got {k}")));
    }
    if !(sigma_floor > 0.0) {
        return Err(AccError::InvalidParameter("sigma_floor must be positive".into()));
    }
    if labelled.len() < MIN_MODE_SAMPLES {
        return Err(AccError::InsufficientData {
            have: labelled.len(),
            need: MIN_MODE_SAMPLES,
        });
    }
    let all: Vec<f64> = labelled.iter().map(|(_, e)| *e).collect();
    let (pooled_mu, pooled_sigma) = mean_std(&all);

    let stats_for = |mode: Mode| {
        let own: Vec<f64> = labelled.iter().filter(|(m, _)| *m == mode).map(|(_, e)| *e).collect();
        let (mu, sigma, fallback) = if own.len() < MIN_MODE_SAMPLES {
            (pooled_mu, pooled_sigma, true)
        } else {
            let (mu, sigma) = mean_std(&own);
            (mu, sigma, false)
        };
        ModeStats {
            mu,
            sigma: sigma.max(sigma_floor),
            samples: own.len(),
            pooled_fallback: fallback,
        }
    };

    Ok(ThresholdSet {
        k,
        sigma_floor,
        speed_control: stats_for(Mode::SpeedControl),
        spacing_control: stats_for(Mode::SpacingControl),
    })
}
