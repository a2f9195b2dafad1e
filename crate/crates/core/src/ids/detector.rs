use serde::{Deserialize, Serialize};

use super::identifier::{RegressorBuffer, RegressorSpec};
use super::threshold::ThresholdSet;
use crate::controller::Mode;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AlarmChannel {
    /// Output residual left its adaptive band.
    Residual,
    /// Controller's safe distance disagrees with the independently recomputed one.
    ReferenceConsistency,
}

impl AlarmChannel {
    pub fn as_str(&self) -> &'static str {
        match self {
            AlarmChannel::Residual => "residual",
            AlarmChannel::ReferenceConsistency => "reference_consistency",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IdsState {
    pub alarm_latched: bool,
    pub first_alarm_time: Option<f64>,
    pub alarm_channel: Option<AlarmChannel>,
    residual_run: usize,
    reference_run: usize,
    pub buffer: RegressorBuffer,
}

impl IdsState {
    pub fn new(spec: RegressorSpec) -> Self {
        Self {
            alarm_latched: false,
            first_alarm_time: None,
            alarm_channel: None,
            residual_run: 0,
            reference_run: 0,
            buffer: RegressorBuffer::new(spec),
        }
    }

    fn latch(mut self, t: f64, channel: AlarmChannel) -> Self {
        self.alarm_latched = true;
        self.first_alarm_time = Some(t);
        self.alarm_channel = Some(channel);
        self
    }
}

/// Residual channel: alarms after `n_consec` consecutive out-of-band samples.
pub fn detect(
    state: &IdsState,
    thresholds: &ThresholdSet,
    mode: Mode,
    y_out: f64,
    y_nn: f64,
    t: f64,
    n_consec: usize,
) -> IdsState {
    if state.alarm_latched {
        return state.clone();
    }
    let mut next = state.clone();
    let residual = y_out - y_nn;
    // A non-finite residual counts as out of band.
    let outside = !residual.is_finite() || thresholds.exceeds(mode, residual);
    next.residual_run = if outside { state.residual_run + 1 } else { 0 };
    if next.residual_run >= n_consec.max(1) {
        next = next.latch(t, AlarmChannel::Residual);
    }
    next
}

/// Reference channel: compares the safe distance the controller used with
/// one recomputed from the IDS's own speed measurement.
pub fn check_reference(
    state: &IdsState,
    d_safe_used: f64,
    d_safe_recomputed: f64,
    tolerance: f64,
    t: f64,
    n_consec: usize,
) -> IdsState {
    if state.alarm_latched {
        return state.clone();
    }
    let mut next = state.clone();
    let mismatch = !((d_safe_used - d_safe_recomputed).abs() <= tolerance);
    next.reference_run = if mismatch { state.reference_run + 1 } else { 0 };
    if next.reference_run >= n_consec.max(1) {
        next = next.latch(t, AlarmChannel::ReferenceConsistency);
    }
    next
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ids::threshold::ModeStats;

    fn thresholds() -> ThresholdSet {
        let stats = ModeStats {
            mu: 0.01,
            sigma: 0.002,
            samples: 100,
            pooled_fallback: false,
        };
        ThresholdSet {
            k: 4.0,
            sigma_floor: 1e-4,
            speed_control: stats,
            spacing_control: stats,
        }
    }

    #[test]
    fn residual_at_mean_never_alarms() {
        let th = thresholds();
        let mut s = IdsState::new(RegressorSpec::default());
        for i in 0..1000 {
            s = detect(&s, &th, Mode::SpeedControl, 20.01, 20.0, i as f64 * 0.1, 2);
        }
        assert!(!s.alarm_latched);
        assert_eq!(s.first_alarm_time, None);
    }

    #[test]
    fn sustained_jump_alarms_after_n_consec() {
        let th = thresholds();
        for n_consec in 1..=4 {
            let mut s = IdsState::new(RegressorSpec::default());
            let jump_at = 10;
            let mut alarm_step = None;
            for i in 0..40 {
                let e = if i >= jump_at { 0.01 + 10.0 * 0.002 } else { 0.01 };
                s = detect(&s, &th, Mode::SpacingControl, e, 0.0, i as f64, n_consec);
                if s.alarm_latched && alarm_step.is_none() {
                    alarm_step = Some(i);
                }
            }
            assert_eq!(alarm_step, Some(jump_at + n_consec - 1));
            assert_eq!(s.alarm_channel, Some(AlarmChannel::Residual));
        }
    }

    #[test]
    fn isolated_exceedance_resets_run() {
        let th = thresholds();
        let mut s = IdsState::new(RegressorSpec::default());
        for i in 0..20 {
            let e = if i % 2 == 0 { 1.0 } else { 0.01 };
            s = detect(&s, &th, Mode::SpeedControl, e, 0.0, i as f64, 2);
        }
        assert!(!s.alarm_latched);
    }

    #[test]
    fn latch_is_sticky() {
        let th = thresholds();
        let mut s = IdsState::new(RegressorSpec::default());
        s = detect(&s, &th, Mode::SpeedControl, 5.0, 0.0, 1.0, 1);
        assert!(s.alarm_latched);
        let before = s.clone();
        for i in 0..10 {
            s = detect(&s, &th, Mode::SpeedControl, 0.01, 0.0, 2.0 + i as f64, 1);
            s = check_reference(&s, 1.0, 2.0, 0.1, 2.0 + i as f64, 1);
        }
        assert_eq!(s, before);
        assert_eq!(s.first_alarm_time, Some(1.0));
    }

    #[test]
    fn reference_mismatch_alarms() {
        let mut s = IdsState::new(RegressorSpec::default());
        s = check_reference(&s, 38.0, 38.0, 1e-3, 40.0, 2);
        assert!(!s.alarm_latched);
        s = check_reference(&s, 37.99, 38.0, 1e-3, 40.1, 2);
        assert!(!s.alarm_latched);
        s = check_reference(&s, 37.98, 38.0, 1e-3, 40.2, 2);
        assert!(s.alarm_latched);
        assert_eq!(s.first_alarm_time, Some(40.2));
        assert_eq!(s.alarm_channel, Some(AlarmChannel::ReferenceConsistency));
    }
}
