//! Vehicle plant and driver-behaviour models.
//!
//! Both vehicles share the longitudinal model `G(s) = 1/(s(0.5s + 1))` from
//! commanded acceleration to velocity: a first-order actuator lag with pole at
//! `s = -2` followed by an integrator. Position is carried as a third state so
//! the zero-order-hold discretization covers the whole chain exactly:
//!
//! ```text
//! x' = v
//! v' = a
//! a' = -2 a + 2 u
//! ```

use nalgebra::{Matrix3, RowVector3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, AccError, AccResult};

/// Continuous actuator pole magnitude (1/s).
pub const LAG_RATE: f64 = 2.0;

/// Slack for comparing grid times `k * Ts` against schedule boundaries.
pub(crate) const TIME_EPS: f64 = 1e-9;

/// Default spacing guard for the follow-the-leader model (m).
pub const DEFAULT_D_EPS: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct VehicleState {
    /// Position (m).
    pub x: f64,
    /// Velocity (m/s).
    pub v: f64,
    /// Actuator lag state, i.e. the realised acceleration (m/s²).
    pub a_lag: f64,
}

impl VehicleState {
    pub fn new(x: f64, v: f64) -> Self {
        Self { x, v, a_lag: 0.0 }
    }

    fn as_vector(&self) -> Vector3<f64> {
        Vector3::new(self.x, self.v, self.a_lag)
    }

    fn from_vector(s: &Vector3<f64>) -> Self {
        Self {
            x: s[0],
            v: s[1],
            a_lag: s[2],
        }
    }

    fn check_finite(&self) -> AccResult<()> {
        ensure_finite("x", self.x)?;
        ensure_finite("v", self.v)?;
        ensure_finite("a_lag", self.a_lag)
    }
}

/// Exact ZOH discretization of the vehicle chain, state order `(x, v, a_lag)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscretePlant {
    pub a_d: Matrix3<f64>,
    pub b_d: Vector3<f64>,
    /// Output row selecting velocity.
    pub c_d: RowVector3<f64>,
    pub ts: f64,
}

impl DiscretePlant {
    /// `e^(-2 Ts)`, the discrete image of the actuator pole.
    pub fn lag_eigenvalue(&self) -> f64 {
        self.a_d[(2, 2)]
    }

    /// One ZOH step under a constant command.
    pub fn step(&self, state: &VehicleState, u: f64) -> VehicleState {
        VehicleState::from_vector(&(self.a_d * state.as_vector() + self.b_d * u))
    }

    pub fn output(&self, state: &VehicleState) -> f64 {
        (self.c_d * state.as_vector())[0]
    }
}

pub fn discretize_plant(ts: f64) -> AccResult<DiscretePlant> {
    if !(ts > 0.0 && ts.is_finite()) {
        return Err(AccError::InvalidParameter(format!(
            "sample time must be positive and finite, got {ts}"
        )));
    }
    let r = LAG_RATE;
    let decay = (-r * ts).exp();
    // 1 - e^(-2Ts) evaluated without cancellation for small Ts.
    let one_minus = -(-r * ts).exp_m1();

    // Integrals of the lag impulse response, one per level of the chain.
    let v_from_a = one_minus / r;
    let x_from_a = ts / r - one_minus / (r * r);
    let v_from_u = ts - one_minus / r;
    let x_from_u = ts * ts / 2.0 - ts / r + one_minus / (r * r);

    #[rustfmt::skip]
    let a_d = Matrix3::new(
        1.0, ts,  x_from_a,
        0.0, 1.0, v_from_a,
        0.0, 0.0, decay,
    );
    let b_d = Vector3::new(x_from_u, v_from_u, one_minus);
    Ok(DiscretePlant {
        a_d,
        b_d,
        c_d: RowVector3::new(0.0, 1.0, 0.0),
        ts,
    })
}

pub fn step_vehicle(state: &VehicleState, plant: &DiscretePlant, accel_cmd: f64) -> AccResult<VehicleState> {
    state.check_finite()?;
    ensure_finite("accel_cmd", accel_cmd)?;
    Ok(plant.step(state, accel_cmd))
}

/// Follow-the-leader acceleration `alpha * v_rel / d_rel`.
pub fn follow_leader_accel(alpha: f64, v_rel: f64, d_rel: f64) -> AccResult<f64> {
    follow_leader_accel_guarded(alpha, v_rel, d_rel, DEFAULT_D_EPS)
}

pub fn follow_leader_accel_guarded(alpha: f64, v_rel: f64, d_rel: f64, d_eps: f64) -> AccResult<f64> {
    ensure_finite("alpha", alpha)?;
    ensure_finite("v_rel", v_rel)?;
    ensure_finite("d_rel", d_rel)?;
    if d_rel.abs() <= d_eps {
        return Err(AccError::Singularity { d_rel, d_eps });
    }
    Ok(alpha * v_rel / d_rel)
}

/// Velocity function used by the optimal-velocity model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum VelocityFunction {
    Identity,
    /// `clamp(offset + r, min, max)`.
    SaturatingLinear {
        offset: f64,
        min: f64,
        max: f64,
    },
}

impl Default for VelocityFunction {
    fn default() -> Self {
        VelocityFunction::SaturatingLinear {
            offset: 25.0,
            min: 0.0,
            max: 35.0,
        }
    }
}

impl VelocityFunction {
    pub fn eval(&self, r: f64) -> f64 {
        match *self {
            VelocityFunction::Identity => r,
            VelocityFunction::SaturatingLinear { offset, min, max } => (offset + r).clamp(min, max),
        }
    }
}

/// Optimal-velocity acceleration `beta * (fv(v_lead - v_ego) - v_ego)`.
pub fn optimal_velocity_accel(beta: f64, fv: &VelocityFunction, v_lead: f64, v_ego: f64) -> AccResult<f64> {
    ensure_finite("beta", beta)?;
    ensure_finite("v_lead", v_lead)?;
    ensure_finite("v_ego", v_ego)?;
    Ok(beta * (fv.eval(v_lead - v_ego) - v_ego))
}

pub fn combined_accel(
    alpha: f64,
    beta: f64,
    fv: &VelocityFunction,
    v_lead: f64,
    v_ego: f64,
    d_rel: f64,
) -> AccResult<f64> {
    let follow = follow_leader_accel(alpha, v_lead - v_ego, d_rel)?;
    let optimal = optimal_velocity_accel(beta, fv, v_lead, v_ego)?;
    Ok(follow + optimal)
}

/// What the optimal-velocity function is applied to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OvmArgument {
    /// `fv(v_lead - v_ego)`, the form written in the model equation.
    #[default]
    RelativeVelocity,
    /// `fv(d_rel)`, the form described in the surrounding prose.
    Spacing,
}

/// Parameterised car-following driver (follow-the-leader + optimal velocity).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CarFollowingModel {
    pub alpha: f64,
    pub beta: f64,
    #[serde(default)]
    pub fv: VelocityFunction,
    #[serde(default)]
    pub ovm_argument: OvmArgument,
    #[serde(default = "default_d_eps")]
    pub d_eps: f64,
}

fn default_d_eps() -> f64 {
    DEFAULT_D_EPS
}

impl Default for CarFollowingModel {
    fn default() -> Self {
        Self {
            alpha: 1.0,
            beta: 0.5,
            fv: VelocityFunction::default(),
            ovm_argument: OvmArgument::RelativeVelocity,
            d_eps: DEFAULT_D_EPS,
        }
    }
}

impl CarFollowingModel {
    pub fn accel(&self, v_lead: f64, v_ego: f64, d_rel: f64) -> AccResult<f64> {
        let follow = if self.alpha == 0.0 {
            0.0
        } else {
            follow_leader_accel_guarded(self.alpha, v_lead - v_ego, d_rel, self.d_eps)?
        };
        let optimal = match self.ovm_argument {
            OvmArgument::RelativeVelocity => optimal_velocity_accel(self.beta, &self.fv, v_lead, v_ego)?,
            OvmArgument::Spacing => {
                ensure_finite("d_rel", d_rel)?;
                self.beta * (self.fv.eval(d_rel) - v_ego)
            }
        };
        Ok(follow + optimal)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LeadSegment {
    pub t_start: f64,
    pub accel: f64,
}

/// Piecewise-constant acceleration schedule for the lead vehicle's driver.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<LeadSegment>", into = "Vec<LeadSegment>")]
pub struct LeadProfile {
    segments: Vec<LeadSegment>,
}

impl LeadProfile {
    /// Validates ordering only; see [`LeadProfile::check_velocity`] for the
    /// non-negative velocity check, which needs the initial speed and horizon.
    pub fn new(segments: Vec<LeadSegment>) -> AccResult<Self> {
        let first = segments
            .first()
            .ok_or_else(|| AccError::InvalidParameter("lead profile has no segments".into()))?;
        if first.t_start != 0.0 {
            return Err(AccError::InvalidParameter(format!(
                "lead profile must start at t=0, got {}",
                first.t_start
            )));
        }
        for seg in &segments {
            if !seg.t_start.is_finite() || !seg.accel.is_finite() {
                return Err(AccError::InvalidParameter("lead profile entries must be finite".into()));
            }
        }
        for pair in segments.windows(2) {
            if pair[1].t_start <= pair[0].t_start {
                return Err(AccError::InvalidParameter(format!(
                    "lead profile start times must be strictly increasing ({} then {})",
                    pair[0].t_start, pair[1].t_start
                )));
            }
        }
        Ok(Self { segments })
    }

    /// Builds a profile and rejects it if the commanded velocity would go
    /// negative before `horizon`.
    pub fn with_check(segments: Vec<LeadSegment>, v0: f64, horizon: f64) -> AccResult<Self> {
        let profile = Self::new(segments)?;
        profile.check_velocity(v0, horizon)?;
        Ok(profile)
    }

    pub fn constant() -> Self {
        Self {
            segments: vec![LeadSegment {
                t_start: 0.0,
                accel: 0.0,
            }],
        }
    }

    pub fn segments(&self) -> &[LeadSegment] {
        &self.segments
    }

    pub fn accel_at(&self, t: f64) -> f64 {
        self.segments
            .iter()
            .take_while(|seg| seg.t_start <= t + TIME_EPS)
            .last()
            .map_or(0.0, |seg| seg.accel)
    }

    /// Integrates the commanded (lag-free) velocity and checks it stays
    /// non-negative up to `horizon`. The lagged velocity differs from this by
    /// `-a_lag/2`, which is bounded by half the largest commanded magnitude.
    pub fn check_velocity(&self, v0: f64, horizon: f64) -> AccResult<()> {
        let mut v = v0;
        if v < 0.0 {
            return Err(AccError::InvalidParameter(format!(
                "initial lead velocity {v0} is negative"
            )));
        }
        for (i, seg) in self.segments.iter().enumerate() {
            if seg.t_start >= horizon {
                break;
            }
            let end = self
                .segments
                .get(i + 1)
                .map_or(horizon, |next| next.t_start.min(horizon));
            v += seg.accel * (end - seg.t_start);
            if v < -1e-9 {
                return Err(AccError::InvalidParameter(format!(
                    "lead velocity reaches {v:.3} m/s at t={end}"
                )));
            }
        }
        Ok(())
    }
}

impl Default for LeadProfile {
    /// Cruise at the initial speed, slow by 5 m/s over [15, 20] s, hold, and
    /// recover over [50, 55] s.
    fn default() -> Self {
        let seg = |t_start, accel| LeadSegment { t_start, accel };
        Self {
            segments: vec![
                seg(0.0, 0.0),
                seg(15.0, -1.0),
                seg(20.0, 0.0),
                seg(50.0, 1.0),
                seg(55.0, 0.0),
            ],
        }
    }
}

impl TryFrom<Vec<LeadSegment>> for LeadProfile {
    type Error = AccError;

    fn try_from(segments: Vec<LeadSegment>) -> AccResult<Self> {
        Self::new(segments)
    }
}

impl From<LeadProfile> for Vec<LeadSegment> {
    fn from(profile: LeadProfile) -> Self {
        profile.segments
    }
}

/// Advances the lead vehicle one sample under the profile command at `t`.
pub fn advance_lead(
    state: &VehicleState,
    profile: &LeadProfile,
    t: f64,
    plant: &DiscretePlant,
) -> AccResult<VehicleState> {
    if t < 0.0 {
        return Err(AccError::InvalidParameter(format!("negative time {t}")));
    }
    step_vehicle(state, plant, profile.accel_at(t))
}
