//! Covert attack injection.
//!
//! The spike attack sits between controller and actuator; the reference-bias
//! attack sits inside the compromised ACC unit and erodes the safe distance it
//! regulates to. Both are exact identities before their onset.

use serde::{Deserialize, Serialize};

use crate::dynamics::TIME_EPS;
use crate::error::{AccError, AccResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    #[default]
    None,
    /// Additive acceleration spike on the actuation path.
    Spike,
    /// Gradual lowering of the safe-distance reference.
    ReferenceBias,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AttackSpec {
    pub scenario: Scenario,
    /// Earliest onset (s).
    pub t_attack: f64,
    /// Added acceleration (m/s²).
    pub spike_amplitude: f64,
    /// Spike length (s).
    pub spike_duration: f64,
    /// Spike fires only when `d_rel <= d_safe * (1 + arm_margin)`.
    pub arm_margin: f64,
    /// Final reduction of the safe distance (m).
    pub bias_target: f64,
    /// Time for the reduction to reach `bias_target` (s).
    pub bias_ramp_time: f64,
    /// What the vehicle can physically deliver, regardless of software clamps.
    pub a_min_phys: f64,
    pub a_max_phys: f64,
}

impl Default for AttackSpec {
    fn default() -> Self {
        Self {
            scenario: Scenario::None,
            t_attack: 40.0,
            spike_amplitude: 2.0,
            spike_duration: 1.0,
            arm_margin: 0.1,
            bias_target: 5.0,
            bias_ramp_time: 60.0,
            a_min_phys: -3.0,
            a_max_phys: 2.0,
        }
    }
}

impl AttackSpec {
    pub fn spike() -> Self {
        Self {
            scenario: Scenario::Spike,
            ..Self::default()
        }
    }

    pub fn reference_bias() -> Self {
        Self {
            scenario: Scenario::ReferenceBias,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> AccResult<()> {
        let bad = |msg: &str| Err(AccError::InvalidParameter(msg.to_string()));
        if !(self.t_attack >= 0.0) {
            return bad("t_attack must be non-negative");
        }
        if !(self.a_min_phys < self.a_max_phys) {
            return bad("physical acceleration bounds are empty");
        }
        match self.scenario {
            Scenario::Spike if !(self.spike_duration > 0.0) => bad("spike_duration must be positive"),
            Scenario::Spike if !(self.arm_margin >= 0.0) => bad("arm_margin must be non-negative"),
            Scenario::ReferenceBias if !(self.bias_target >= 0.0) => bad("bias_target must be non-negative"),
            Scenario::ReferenceBias if !(self.bias_ramp_time > 0.0) => bad("bias_ramp_time must be positive"),
            _ => Ok(()),
        }
    }

    /// Reference reduction `bias_target * min(1, (t - t_attack) / ramp)`.
    pub fn bias_at(&self, t: f64) -> f64 {
        if self.scenario != Scenario::ReferenceBias || t < self.t_attack {
            return 0.0;
        }
        self.bias_target * ((t - self.t_attack) / self.bias_ramp_time).min(1.0)
    }
}

/// Actuation seen by the vehicle. For the spike scenario `spec.t_attack` is
/// the instant the spike fires.
pub fn tamper_actuation(spec: &AttackSpec, t: f64, u: f64) -> f64 {
    if spec.scenario != Scenario::Spike {
        return u;
    }
    let start = spec.t_attack - TIME_EPS;
    let end = spec.t_attack + spec.spike_duration - TIME_EPS;
    if t >= start && t < end {
        (u + spec.spike_amplitude).clamp(spec.a_min_phys, spec.a_max_phys)
    } else {
        u
    }
}

/// Safe-distance reference after tampering, floored at zero.
pub fn tamper_reference(spec: &AttackSpec, t: f64, d_safe: f64) -> f64 {
    if spec.scenario != Scenario::ReferenceBias || t < spec.t_attack {
        return d_safe;
    }
    (d_safe - spec.bias_at(t)).max(0.0)
}

pub fn spike_trigger_armed(spec: &AttackSpec, d_rel: f64, d_safe: f64) -> bool {
    d_rel <= d_safe * (1.0 + spec.arm_margin)
}
