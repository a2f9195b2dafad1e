//! Two-mode ACC controller: safe-distance rule, mode selection, the MPC core
//! and the fallback compensator that takes over once an alarm is latched.

use nalgebra::{DMatrix, DVector, Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::dynamics::DiscretePlant;
use crate::error::{ensure_finite, AccError, AccResult};
use crate::qp::{qp_cost, solve_box_qp, QpSettings};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MpcParams {
    /// Prediction horizon (steps).
    pub horizon_p: usize,
    /// Control horizon (steps); the last move is held to the end of the prediction.
    pub horizon_m: usize,
    pub w_track: f64,
    pub w_du: f64,
    pub w_u: f64,
    pub max_iterations: usize,
    pub tolerance: f64,
}

impl Default for MpcParams {
    fn default() -> Self {
        Self {
            horizon_p: 30,
            horizon_m: 2,
            w_track: 1.0,
            w_du: 0.1,
            w_u: 0.0,
            max_iterations: 100,
            tolerance: 1e-8,
        }
    }
}

impl MpcParams {
    pub fn validate(&self) -> AccResult<()> {
        if self.horizon_m < 1 || self.horizon_m > self.horizon_p {
            return Err(AccError::InvalidParameter(format!(
                "need 1 <= horizon_m ({}) <= horizon_p ({})",
                self.horizon_m, self.horizon_p
            )));
        }
        if !(self.w_track > 0.0) || !(self.w_du >= 0.0) || !(self.w_u >= 0.0) {
            return Err(AccError::InvalidParameter(
                "MPC weights must be non-negative with w_track > 0".into(),
            ));
        }
        if self.max_iterations == 0 || !(self.tolerance > 0.0) {
            return Err(AccError::InvalidParameter(
                "MPC solver needs a positive iteration cap and tolerance".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AccConfig {
    /// Driver-set speed (m/s).
    pub v_set: f64,
    /// Headway time gap (s).
    pub t_gap: f64,
    /// Standstill spacing (m).
    pub d_default: f64,
    pub a_min: f64,
    pub a_max: f64,
    pub mpc: MpcParams,
    /// Compensator speed-mode gain (1/s).
    pub kp_speed: f64,
    /// Compensator spacing-mode gain on distance error (1/s²).
    pub kp_space: f64,
    /// Compensator spacing-mode gain on relative velocity (1/s). Zero gives a pure P law.
    pub kd_rel: f64,
}

impl Default for AccConfig {
    fn default() -> Self {
        Self {
            v_set: 30.0,
            t_gap: 1.4,
            d_default: 10.0,
            a_min: -3.0,
            a_max: 2.0,
            mpc: MpcParams::default(),
            kp_speed: 0.5,
            kp_space: 0.2,
            kd_rel: 0.6,
        }
    }
}

impl AccConfig {
    pub fn validate(&self) -> AccResult<()> {
        if !(self.a_min < 0.0 && 0.0 < self.a_max) {
            return Err(AccError::InvalidParameter(format!(
                "acceleration bounds must straddle zero, got [{}, {}]",
                self.a_min, self.a_max
            )));
        }
        if !(self.v_set > 0.0) || !(self.t_gap >= 0.0) || !(self.d_default > 0.0) {
            return Err(AccError::InvalidParameter(
                "need v_set > 0, t_gap >= 0 and d_default > 0".into(),
            ));
        }
        for (name, v) in [
            ("kp_speed", self.kp_speed),
            ("kp_space", self.kp_space),
            ("kd_rel", self.kd_rel),
        ] {
            ensure_finite(name, v).map_err(|e| AccError::InvalidParameter(e.to_string()))?;
        }
        self.mpc.validate()
    }

    pub fn clamp_accel(&self, u: f64) -> f64 {
        u.clamp(self.a_min, self.a_max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    SpeedControl,
    SpacingControl,
}

impl Mode {
    pub const ALL: [Mode; 2] = [Mode::SpeedControl, Mode::SpacingControl];

    pub fn as_str(&self) -> &'static str {
        match self {
            Mode::SpeedControl => "speed",
            Mode::SpacingControl => "spacing",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ActiveController {
    Mpc,
    Compensator,
    /// Car-following driver model in place of the ACC (baseline runs).
    Driver,
}

impl ActiveController {
    pub fn as_str(&self) -> &'static str {
        match self {
            ActiveController::Mpc => "mpc",
            ActiveController::Compensator => "compensator",
            ActiveController::Driver => "driver",
        }
    }
}

/// What the controller sees from the radar and the ego vehicle's own sensors.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Measurements {
    pub v_ego: f64,
    pub d_rel: f64,
    /// `v_lead - v_ego`.
    pub v_rel: f64,
    /// Realised ego acceleration (actuator lag state).
    pub a_ego: f64,
}

impl Measurements {
    fn check_finite(&self) -> AccResult<()> {
        ensure_finite("v_ego", self.v_ego)?;
        ensure_finite("d_rel", self.d_rel)?;
        ensure_finite("v_rel", self.v_rel)?;
        ensure_finite("a_ego", self.a_ego)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControlDecision {
    pub accel_cmd: f64,
    pub mode: Mode,
    pub active_controller: ActiveController,
    /// `v_set` in speed mode, the safe distance in spacing mode.
    pub reference_used: f64,
    /// Safe distance the mode rule was evaluated against.
    pub d_safe: f64,
}

pub fn safe_distance(v_ego: f64, t_gap: f64, d_default: f64) -> f64 {
    d_default + t_gap * v_ego
}

pub fn select_mode(d_rel: f64, d_safe: f64) -> Mode {
    if d_rel >= d_safe {
        Mode::SpeedControl
    } else {
        Mode::SpacingControl
    }
}

/// Condensed horizon problem `min 0.5 U'HU + g'U` over the move vector.
#[derive(Debug, Clone)]
pub struct MpcProblem {
    pub hessian: DMatrix<f64>,
    pub gradient: DVector<f64>,
    /// Cost at `U = 0`, so `constant + qp_cost(U)` is the full horizon cost.
    pub constant: f64,
}

impl MpcProblem {
    pub fn cost(&self, moves: &DVector<f64>) -> f64 {
        self.constant + qp_cost(&self.hessian, &self.gradient, moves)
    }
}

#[derive(Debug, Clone)]
pub struct MpcSolution {
    pub moves: DVector<f64>,
    pub cost: f64,
    pub iterations: usize,
}

/// Prediction model in relative coordinates: state `(d_rel, v_ego, a_ego)`,
/// lead speed held at `v_ego + v_rel` over the horizon.
struct Prediction {
    a: Matrix3<f64>,
    b: Vector3<f64>,
    drift: Vector3<f64>,
    output: Vector3<f64>,
}

impl Prediction {
    fn new(plant: &DiscretePlant, mode: Mode, t_gap: f64, v_lead: f64) -> Self {
        let ad = &plant.a_d;
        let bd = &plant.b_d;
        #[rustfmt::skip]
        let a = Matrix3::new(
            1.0, -ad[(0, 1)], -ad[(0, 2)],
            0.0,  ad[(1, 1)],  ad[(1, 2)],
            0.0,  ad[(2, 1)],  ad[(2, 2)],
        );
        let b = Vector3::new(-bd[0], bd[1], bd[2]);
        let drift = Vector3::new(plant.ts * v_lead, 0.0, 0.0);
        let output = match mode {
            Mode::SpeedControl => Vector3::new(0.0, 1.0, 0.0),
            // Constant time-gap spacing error: d_rel - t_gap * v_ego.
            Mode::SpacingControl => Vector3::new(1.0, -t_gap, 0.0),
        };
        Self { a, b, drift, output }
    }

    /// Outputs at steps 1..=p for a move sequence held after `moves.len()`.
    fn outputs(&self, s0: Vector3<f64>, with_drift: bool, moves: &[f64], p: usize) -> Vec<f64> {
        let mut s = s0;
        let last = moves.last().copied().unwrap_or(0.0);
        (0..p)
            .map(|k| {
                let u = moves.get(k).copied().unwrap_or(last);
                s = self.a * s + self.b * u;
                if with_drift {
                    s += self.drift;
                }
                self.output.dot(&s)
            })
            .collect()
    }
}

/// Builds the condensed quadratic tracking problem for one control step.
pub fn mpc_problem(
    cfg: &AccConfig,
    plant: &DiscretePlant,
    mode: Mode,
    meas: &Measurements,
    d_safe: f64,
    prev_u: f64,
) -> AccResult<MpcProblem> {
    meas.check_finite()?;
    ensure_finite("d_safe", d_safe)?;
    ensure_finite("prev_u", prev_u)?;
    let params = &cfg.mpc;
    params.validate()?;
    let (p, m) = (params.horizon_p, params.horizon_m);

    let prediction = Prediction::new(plant, mode, cfg.t_gap, meas.v_ego + meas.v_rel);
    let reference = match mode {
        Mode::SpeedControl => cfg.v_set,
        Mode::SpacingControl => d_safe - cfg.t_gap * meas.v_ego,
    };

    let s0 = Vector3::new(meas.d_rel, meas.v_ego, meas.a_ego);
    let free = prediction.outputs(s0, true, &[], p);
    let mut gain = DMatrix::zeros(p, m);
    for j in 0..m {
        let mut pulse = vec![0.0; m];
        pulse[j] = 1.0;
        for (k, y) in prediction
            .outputs(Vector3::zeros(), false, &pulse, p)
            .into_iter()
            .enumerate()
        {
            gain[(k, j)] = y;
        }
    }
    let error = DVector::from_iterator(p, free.iter().map(|y| y - reference));

    // First differences against the previously applied move.
    let mut diff = DMatrix::identity(m, m);
    for j in 1..m {
        diff[(j, j - 1)] = -1.0;
    }
    let mut diff_offset = DVector::zeros(m);
    diff_offset[0] = -prev_u;

    let gain_t = gain.transpose();
    let diff_t = diff.transpose();
    let hessian = (&gain_t * &gain) * (2.0 * params.w_track)
        + (&diff_t * &diff) * (2.0 * params.w_du)
        + DMatrix::identity(m, m) * (2.0 * params.w_u);
    let gradient = (&gain_t * &error) * (2.0 * params.w_track) + (&diff_t * &diff_offset) * (2.0 * params.w_du);
    let constant = params.w_track * error.norm_squared() + params.w_du * prev_u * prev_u;

    Ok(MpcProblem {
        hessian,
        gradient,
        constant,
    })
}

pub fn mpc_solve(
    cfg: &AccConfig,
    plant: &DiscretePlant,
    mode: Mode,
    meas: &Measurements,
    d_safe: f64,
    prev_u: f64,
) -> AccResult<MpcSolution> {
    let problem = mpc_problem(cfg, plant, mode, meas, d_safe, prev_u)?;
    let m = cfg.mpc.horizon_m;
    let lo = DVector::from_element(m, cfg.a_min);
    let hi = DVector::from_element(m, cfg.a_max);
    let warm = DVector::from_element(m, cfg.clamp_accel(prev_u));
    let settings = QpSettings {
        max_iterations: cfg.mpc.max_iterations,
        tolerance: cfg.mpc.tolerance,
    };
    let sol = solve_box_qp(&problem.hessian, &problem.gradient, &lo, &hi, Some(&warm), &settings)?;
    let cost = problem.cost(&sol.x);
    Ok(MpcSolution {
        moves: sol.x,
        cost,
        iterations: sol.iterations,
    })
}

/// First move of the receding-horizon solution.
pub fn mpc_step(
    cfg: &AccConfig,
    plant: &DiscretePlant,
    mode: Mode,
    meas: &Measurements,
    d_safe: f64,
    prev_u: f64,
) -> AccResult<f64> {
    let sol = mpc_solve(cfg, plant, mode, meas, d_safe, prev_u)?;
    Ok(cfg.clamp_accel(sol.moves[0]))
}

/// Fallback compensator: P on speed, PD on spacing.
pub fn p_step(cfg: &AccConfig, mode: Mode, meas: &Measurements, d_safe: f64) -> f64 {
    let u = match mode {
        Mode::SpeedControl => cfg.kp_speed * (cfg.v_set - meas.v_ego),
        Mode::SpacingControl => cfg.kp_space * (meas.d_rel - d_safe) + cfg.kd_rel * meas.v_rel,
    };
    cfg.clamp_accel(u)
}

/// One controller invocation. `d_safe_override` replaces the safe distance
/// the controller would compute from its own speed measurement.
pub fn control_step(
    cfg: &AccConfig,
    plant: &DiscretePlant,
    meas: &Measurements,
    d_safe_override: Option<f64>,
    alarm_latched: bool,
    prev_u: f64,
) -> AccResult<ControlDecision> {
    let d_safe = d_safe_override.unwrap_or_else(|| safe_distance(meas.v_ego, cfg.t_gap, cfg.d_default));
    let mode = select_mode(meas.d_rel, d_safe);
    let (accel_cmd, active_controller) = if alarm_latched {
        (p_step(cfg, mode, meas, d_safe), ActiveController::Compensator)
    } else {
        (mpc_step(cfg, plant, mode, meas, d_safe, prev_u)?, ActiveController::Mpc)
    };
    let reference_used = match mode {
        Mode::SpeedControl => cfg.v_set,
        Mode::SpacingControl => d_safe,
    };
    Ok(ControlDecision {
        accel_cmd,
        mode,
        active_controller,
        reference_used,
        d_safe,
    })
}
