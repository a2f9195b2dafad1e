//! Closed-loop harness: lead and ego plants, controller, attacks, IDS and the
//! controller switch, advanced on a fixed sample grid.
//!
//! Phase order inside one step `k` (time `t = k * ts`):
//!
//! 1. evaluate the lead profile command,
//! 2. measure (optionally with seeded noise),
//! 3. compute the safe distance and apply reference tampering,
//! 4. select the mode,
//! 5. the active controller computes its command,
//! 6. the IDS predicts, forms the residual and updates its latch (the latch
//!    switches controllers from step `k + 1`),
//! 7. actuation tampering,
//! 8. both plants advance to `t + ts`.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::attack::{spike_trigger_armed, tamper_actuation, tamper_reference, AttackSpec, Scenario};
use crate::controller::{
    control_step, safe_distance, select_mode, AccConfig, ActiveController, ControlDecision, Measurements, Mode,
};
use crate::dynamics::{
    advance_lead, discretize_plant, step_vehicle, CarFollowingModel, LeadProfile, VehicleState, TIME_EPS,
};
use crate::error::{AccError, AccResult};
use crate::ids::{
    calibrate_from_record, check_reference, detect, labelled_residuals, predict, train_identifier, IdsModelFile,
    IdsState, IoSample, ModeStats, RegressorSpec, ThresholdSet, TrainingParams,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IdsParams {
    /// Run the identifier and detector at all.
    pub enabled: bool,
    /// Hand control to the compensator once the alarm latches.
    pub compensation: bool,
    pub k: f64,
    pub n_consec: usize,
    pub sigma_floor: f64,
    /// Training and calibration window (s).
    pub safe_start: f64,
    pub safe_end: f64,
    /// Detection starts here; `(safe_end, arm_time)` is the held-out window.
    pub arm_time: f64,
    pub reference_check: bool,
    /// Allowed disagreement between used and recomputed safe distance (m).
    pub reference_tol: f64,
    pub regressor: RegressorSpec,
    pub training: TrainingParams,
}

impl Default for IdsParams {
    fn default() -> Self {
        Self {
            enabled: true,
            compensation: true,
            k: 4.0,
            n_consec: 2,
            sigma_floor: 1e-4,
            safe_start: 5.0,
            safe_end: 35.0,
            arm_time: 40.0,
            reference_check: true,
            reference_tol: 1e-3,
            regressor: RegressorSpec::default(),
            training: TrainingParams::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseConfig {
    /// Std of velocity measurements (m/s).
    pub velocity_std: f64,
    /// Std of distance measurements (m).
    pub distance_std: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EgoDriverKind {
    /// The ACC loop drives the ego vehicle.
    #[default]
    Acc,
    /// A car-following driver model replaces the ACC command.
    CarFollowing,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub duration: f64,
    pub ts: f64,
    pub seed: u64,
    pub x0_lead: f64,
    pub x0_ego: f64,
    pub v0_lead: f64,
    pub v0_ego: f64,
    pub ego_driver: EgoDriverKind,
    pub acc: AccConfig,
    pub attack: AttackSpec,
    pub ids: IdsParams,
    pub noise: NoiseConfig,
    pub car_following: CarFollowingModel,
    pub lead_profile: LeadProfile,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            duration: 80.0,
            ts: 0.1,
            seed: 1,
            x0_lead: 50.0,
            x0_ego: 10.0,
            v0_lead: 25.0,
            v0_ego: 20.0,
            ego_driver: EgoDriverKind::Acc,
            acc: AccConfig::default(),
            attack: AttackSpec::default(),
            ids: IdsParams::default(),
            noise: NoiseConfig::default(),
            car_following: CarFollowingModel::default(),
            lead_profile: LeadProfile::default(),
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> AccResult<()> {
        let bad = |msg: String| Err(AccError::InvalidParameter(msg));
        if !(self.ts > 0.0) || !(self.duration > 0.0) {
            return bad(format!(
                "need ts > 0 and duration > 0 (ts={}, duration={})",
                self.ts, self.duration
            ));
        }
        if !(self.x0_lead > self.x0_ego) {
            return bad("lead must start ahead of ego".into());
        }
        if !(self.noise.velocity_std >= 0.0) || !(self.noise.distance_std >= 0.0) {
            return bad("noise std must be non-negative".into());
        }
        let ids = &self.ids;
        if ids.enabled {
            if !(ids.k > 0.0) || ids.n_consec == 0 || !(ids.sigma_floor > 0.0) {
                return bad("IDS needs k > 0, n_consec >= 1 and sigma_floor > 0".into());
            }
            if !(0.0 <= ids.safe_start && ids.safe_start < ids.safe_end && ids.safe_end <= ids.arm_time) {
                return bad("IDS windows must satisfy 0 <= safe_start < safe_end <= arm_time".into());
            }
            if !(ids.reference_tol >= 0.0) {
                return bad("reference_tol must be non-negative".into());
            }
        }
        self.acc.validate()?;
        self.attack.validate()?;
        self.lead_profile.check_velocity(self.v0_lead, self.duration)
    }

    pub fn steps(&self) -> usize {
        (self.duration / self.ts + 1e-9).floor() as usize
    }
}

/// One row of the trace, columns in output order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRecord {
    pub t: f64,
    pub x_lead: f64,
    pub v_lead: f64,
    pub x_ego: f64,
    pub v_ego: f64,
    pub a_cmd: f64,
    pub a_applied: f64,
    pub d_rel: f64,
    pub d_safe_true: f64,
    pub d_safe_used: f64,
    pub mode: Mode,
    pub active_controller: ActiveController,
    pub y_nn: Option<f64>,
    pub residual: Option<f64>,
    pub alarm: bool,
}

pub const TRACE_COLUMNS: [&str; 15] = [
    "t",
    "x_lead",
    "v_lead",
    "x_ego",
    "v_ego",
    "a_cmd",
    "a_applied",
    "d_rel",
    "d_safe_true",
    "d_safe_used",
    "mode",
    "active_controller",
    "y_nn",
    "residual",
    "alarm",
];

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SimTrace {
    pub ts: f64,
    pub records: Vec<TraceRecord>,
    /// When the spike actually fired, if it did.
    pub spike_fire_time: Option<f64>,
    pub first_alarm_time: Option<f64>,
    pub alarm_channel: Option<crate::ids::AlarmChannel>,
    /// Armed samples whose residual left the band (counted whether or not
    /// the alarm has latched).
    pub residual_exceedances: usize,
    pub collision: bool,
}

/// Formats like C's `%.9g`.
pub fn format_sig9(value: f64) -> String {
    if value == 0.0 {
        return "0".into();
    }
    if !value.is_finite() {
        return value.to_string();
    }
    let exp = value.abs().log10().floor() as i32;
    let sci = format!("{value:.8e}");
    // Rounding may bump the exponent (9.999999999 -> 1.00000000e1).
    let exp = sci
        .rsplit_once('e')
        .and_then(|(_, e)| e.parse::<i32>().ok())
        .unwrap_or(exp);
    if (-5..9).contains(&exp) {
        let decimals = (8 - exp).max(0) as usize;
        let s = format!("{value:.decimals$}");
        trim_zeros(&s)
    } else {
        let (mantissa, e) = sci.split_once('e').unwrap_or((&sci, "0"));
        let e: i32 = e.parse().unwrap_or(0);
        let sign = if e < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim_zeros(mantissa), e.abs())
    }
}

fn trim_zeros(s: &str) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s.to_string()
    }
}

impl SimTrace {
    pub fn to_csv(&self) -> String {
        let mut out = TRACE_COLUMNS.join(",");
        out.push('\n');
        let opt = |v: Option<f64>| v.map(format_sig9).unwrap_or_default();
        for r in &self.records {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
                format_sig9(r.t),
                format_sig9(r.x_lead),
                format_sig9(r.v_lead),
                format_sig9(r.x_ego),
                format_sig9(r.v_ego),
                format_sig9(r.a_cmd),
                format_sig9(r.a_applied),
                format_sig9(r.d_rel),
                format_sig9(r.d_safe_true),
                format_sig9(r.d_safe_used),
                r.mode.as_str(),
                r.active_controller.as_str(),
                opt(r.y_nn),
                opt(r.residual),
                u8::from(r.alarm),
            );
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> AccResult<()> {
        let mut file = std::fs::File::create(path)?;
        file.write_all(self.to_csv().as_bytes())?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detection_latency: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub attack_onset: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub first_alarm_time: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alarm_channel: Option<crate::ids::AlarmChannel>,
    pub residual_exceedances: usize,
    pub min_d_rel: f64,
    /// Total time with `d_rel < d_safe_true` (s).
    pub violation_duration: f64,
    /// Mean of `d_safe_true - d_rel` over the final 10 s (m).
    pub steady_gap_deficit: f64,
    pub collision: bool,
}

/// Window for the steady-state gap deficit (s).
pub const STEADY_WINDOW: f64 = 10.0;

pub fn compute_metrics(trace: &SimTrace, attack: &AttackSpec) -> AccResult<Metrics> {
    let last = trace
        .records
        .last()
        .ok_or_else(|| AccError::InvalidState("empty trace".into()))?;
    let attack_onset = match attack.scenario {
        Scenario::None => None,
        Scenario::Spike => trace.spike_fire_time,
        Scenario::ReferenceBias => Some(attack.t_attack),
    };
    let detection_latency = match (attack_onset, trace.first_alarm_time) {
        (Some(onset), Some(alarm)) => Some(alarm - onset),
        _ => None,
    };
    let min_d_rel = trace.records.iter().map(|r| r.d_rel).fold(f64::INFINITY, f64::min);
    let violation_duration = trace.records.iter().filter(|r| r.d_rel < r.d_safe_true).count() as f64 * trace.ts;
    let window: Vec<f64> = trace
        .records
        .iter()
        .filter(|r| r.t >= last.t - STEADY_WINDOW - TIME_EPS)
        .map(|r| r.d_safe_true - r.d_rel)
        .collect();
    let steady_gap_deficit = window.iter().sum::<f64>() / window.len() as f64;
    Ok(Metrics {
        detection_latency,
        attack_onset,
        first_alarm_time: trace.first_alarm_time,
        alarm_channel: trace.alarm_channel,
        residual_exceedances: trace.residual_exceedances,
        min_d_rel,
        violation_duration,
        steady_gap_deficit,
        collision: trace.collision,
    })
}

impl Metrics {
    pub fn to_toml(&self) -> AccResult<String> {
        toml::to_string(self).map_err(|e| AccError::Config(e.to_string()))
    }

    pub fn write_toml(&self, path: &Path) -> AccResult<()> {
        std::fs::write(path, self.to_toml()?)?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainingSummary {
    pub samples: usize,
    pub parameters: usize,
    pub train_rmse: f64,
    pub holdout_rmse: f64,
    /// Residual std per mode on the held-out window (`None` if the mode is absent).
    pub holdout_sigma: [(Mode, Option<f64>); 2],
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Skip in-run training and use this detector.
    pub pretrained: Option<IdsModelFile>,
    /// Stop once the detector is trained (used by `train`).
    pub stop_after_training: bool,
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub trace: SimTrace,
    pub metrics: Metrics,
    pub ids_model: Option<IdsModelFile>,
    pub training: Option<TrainingSummary>,
}

struct Sensors {
    rng: ChaCha8Rng,
    velocity: Option<Normal<f64>>,
    distance: Option<Normal<f64>>,
}

impl Sensors {
    fn new(seed: u64, noise: &NoiseConfig) -> AccResult<Self> {
        let make = |std: f64| -> AccResult<Option<Normal<f64>>> {
            if std > 0.0 {
                Normal::new(0.0, std)
                    .map(Some)
                    .map_err(|e| AccError::InvalidParameter(e.to_string()))
            } else {
                Ok(None)
            }
        };
        Ok(Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
            velocity: make(noise.velocity_std)?,
            distance: make(noise.distance_std)?,
        })
    }

    fn measure(&mut self, lead: &VehicleState, ego: &VehicleState) -> Measurements {
        let mut draw = |dist: &Option<Normal<f64>>| dist.map_or(0.0, |d| d.sample(&mut self.rng));
        let v_ego = ego.v + draw(&self.velocity);
        let v_lead = lead.v + draw(&self.velocity);
        let d_rel = lead.x - ego.x + draw(&self.distance);
        Measurements {
            v_ego,
            d_rel,
            v_rel: v_lead - v_ego,
            a_ego: ego.a_lag,
        }
    }
}

/// Velocity noise enters the target and both output lags of the regressor.
const NOISE_RMSE_FACTOR: f64 = 3.0;

struct Detector {
    model: Option<IdsModelFile>,
    state: IdsState,
    /// Mode-labelled I/O from `safe_start` up to `arm_time`.
    record: Vec<(f64, Mode, IoSample)>,
    training: Option<TrainingSummary>,
}

impl Detector {
    /// `velocity_std` widens the RMSE cap by the noise it puts on the target.
    fn train(&mut self, params: &IdsParams, velocity_std: f64) -> AccResult<()> {
        let in_window = |t: f64| t >= params.safe_start - TIME_EPS && t <= params.safe_end + TIME_EPS;
        let safe: Vec<(Mode, IoSample)> = self
            .record
            .iter()
            .filter(|(t, _, _)| in_window(*t))
            .map(|(_, m, s)| (*m, *s))
            .collect();
        let samples: Vec<IoSample> = safe.iter().map(|(_, s)| *s).collect();
        let training = TrainingParams {
            rmse_cap: params.training.rmse_cap + NOISE_RMSE_FACTOR * velocity_std,
            ..params.training
        };
        let (identifier, report) = train_identifier(&samples, params.regressor, &training)?;
        let thresholds = calibrate_from_record(&identifier, &safe, params.k, params.sigma_floor)?;

        // Held-out window keeps the regressor context from the safe window.
        let full: Vec<(Mode, IoSample)> = self.record.iter().map(|(_, m, s)| (*m, *s)).collect();
        let labelled = labelled_residuals(&identifier, &full);
        let warm = full.len() - labelled.len();
        let holdout = &labelled[safe.len().saturating_sub(warm).min(labelled.len())..];
        let holdout_rmse = if holdout.is_empty() {
            report.train_rmse
        } else {
            (holdout.iter().map(|(_, e)| e * e).sum::<f64>() / holdout.len() as f64).sqrt()
        };
        if !(holdout_rmse <= training.rmse_cap) {
            return Err(AccError::TrainingFailure {
                rmse: holdout_rmse,
                cap: training.rmse_cap,
            });
        }
        let sigma_of = |mode: Mode| {
            let e: Vec<f64> = holdout.iter().filter(|(m, _)| *m == mode).map(|(_, e)| *e).collect();
            if e.len() < 2 {
                return None;
            }
            let mu = e.iter().sum::<f64>() / e.len() as f64;
            Some((e.iter().map(|v| (v - mu).powi(2)).sum::<f64>() / e.len() as f64).sqrt())
        };
        self.training = Some(TrainingSummary {
            samples: report.samples,
            parameters: report.parameters,
            train_rmse: report.train_rmse,
            holdout_rmse,
            holdout_sigma: [
                (Mode::SpeedControl, sigma_of(Mode::SpeedControl)),
                (Mode::SpacingControl, sigma_of(Mode::SpacingControl)),
            ],
        });
        self.model = Some(IdsModelFile::new(identifier, thresholds));
        Ok(())
    }
}

pub fn run_scenario(cfg: &SimConfig) -> AccResult<RunOutput> {
    run_scenario_with(cfg, &RunOptions::default())
}

pub fn run_scenario_with(cfg: &SimConfig, opts: &RunOptions) -> AccResult<RunOutput> {
    cfg.validate()?;
    let plant = discretize_plant(cfg.ts)?;
    let acc = &cfg.acc;
    let ids = &cfg.ids;
    let mut sensors = Sensors::new(cfg.seed, &cfg.noise)?;

    let mut lead = VehicleState::new(cfg.x0_lead, cfg.v0_lead);
    let mut ego = VehicleState::new(cfg.x0_ego, cfg.v0_ego);
    let mut prev_u = 0.0;
    let mut spike_fire_time: Option<f64> = None;
    let mut residual_exceedances = 0;
    let mut collision = false;
    let mut records = Vec::with_capacity(cfg.steps() + 1);

    let mut detector = Detector {
        model: opts.pretrained.clone(),
        state: IdsState::new(
            opts.pretrained
                .as_ref()
                .map_or(ids.regressor, |m| m.identifier.regressor),
        ),
        record: Vec::new(),
        training: None,
    };
    let mut thresholds: Option<ThresholdSet> = detector.model.as_ref().map(|m| m.thresholds.with_k(ids.k));

    for k in 0..=cfg.steps() {
        let t = k as f64 * cfg.ts;
        let d_rel_true = lead.x - ego.x;
        let d_safe_true = safe_distance(ego.v, acc.t_gap, acc.d_default);

        // 2. measure
        let meas = sensors.measure(&lead, &ego);

        // 3. reference, with the IDS keeping its own untampered copy
        let d_safe_measured = safe_distance(meas.v_ego, acc.t_gap, acc.d_default);
        let d_safe_tampered = tamper_reference(&cfg.attack, t, d_safe_measured);

        // 4-5. mode and command
        let compensating = ids.enabled && ids.compensation && detector.state.alarm_latched;
        let d_safe_used = if compensating { d_safe_measured } else { d_safe_tampered };
        let decision = match cfg.ego_driver {
            EgoDriverKind::Acc => control_step(acc, &plant, &meas, Some(d_safe_used), compensating, prev_u)?,
            EgoDriverKind::CarFollowing => {
                let v_lead = meas.v_ego + meas.v_rel;
                // Spacing inside the model's guard band is a collision.
                let u = match cfg.car_following.accel(v_lead, meas.v_ego, meas.d_rel) {
                    Err(AccError::Singularity { .. }) => {
                        collision = true;
                        break;
                    }
                    other => other?,
                };
                let mode = select_mode(meas.d_rel, d_safe_used);
                ControlDecision {
                    accel_cmd: acc.clamp_accel(u),
                    mode,
                    active_controller: ActiveController::Driver,
                    reference_used: if mode == Mode::SpeedControl {
                        acc.v_set
                    } else {
                        d_safe_used
                    },
                    d_safe: d_safe_used,
                }
            }
        };
        let u = decision.accel_cmd;

        // 6. IDS
        let (mut y_nn, mut residual) = (None, None);
        if ids.enabled {
            let armed = t >= ids.arm_time - TIME_EPS;
            if armed && detector.model.is_none() {
                detector.train(ids, cfg.noise.velocity_std)?;
                thresholds = detector.model.as_ref().map(|m| m.thresholds);
                if opts.stop_after_training {
                    break;
                }
            }
            let y_out = meas.v_ego;
            if let Some(model) = &detector.model {
                y_nn = predict(&model.identifier, &detector.state.buffer);
                residual = y_nn.map(|p| y_out - p);
            }
            if armed {
                if let (Some(th), Some(p)) = (&thresholds, y_nn) {
                    if th.exceeds(decision.mode, y_out - p) {
                        residual_exceedances += 1;
                    }
                    detector.state = detect(&detector.state, th, decision.mode, y_out, p, t, ids.n_consec);
                }
                if ids.reference_check {
                    detector.state = check_reference(
                        &detector.state,
                        decision.d_safe,
                        d_safe_measured,
                        ids.reference_tol,
                        t,
                        ids.n_consec,
                    );
                }
            } else if t >= ids.safe_start - TIME_EPS {
                detector.record.push((t, decision.mode, IoSample { u, y: y_out }));
            }
            detector.state.buffer.push(u, y_out);
        }

        // 7. actuation tampering
        if cfg.attack.scenario == Scenario::Spike
            && spike_fire_time.is_none()
            && t >= cfg.attack.t_attack - TIME_EPS
            && spike_trigger_armed(&cfg.attack, meas.d_rel, d_safe_measured)
        {
            spike_fire_time = Some(t);
        }
        let a_applied = match spike_fire_time {
            Some(fire) => tamper_actuation(
                &AttackSpec {
                    t_attack: fire,
                    ..cfg.attack
                },
                t,
                u,
            ),
            None => u,
        };

        records.push(TraceRecord {
            t,
            x_lead: lead.x,
            v_lead: lead.v,
            x_ego: ego.x,
            v_ego: ego.v,
            a_cmd: u,
            a_applied,
            d_rel: d_rel_true,
            d_safe_true,
            d_safe_used: decision.d_safe,
            mode: decision.mode,
            active_controller: decision.active_controller,
            y_nn,
            residual,
            alarm: detector.state.alarm_latched,
        });

        if d_rel_true <= 0.0 {
            collision = true;
            break;
        }

        // 8. plants
        lead = advance_lead(&lead, &cfg.lead_profile, t, &plant)?;
        ego = step_vehicle(&ego, &plant, a_applied)?;
        prev_u = u;
    }

    if records.is_empty() {
        return Err(AccError::InsufficientData { have: 0, need: 1 });
    }
    if ids.enabled && detector.model.is_none() && opts.stop_after_training {
        // Ran out of time before the safe interval closed.
        let have = detector.record.len();
        let need = ids.training.samples_per_parameter
            * crate::ids::Mlp::parameter_count(ids.regressor.width(), ids.training.hidden);
        return Err(AccError::InsufficientData { have, need });
    }

    let trace = SimTrace {
        ts: cfg.ts,
        records,
        spike_fire_time,
        first_alarm_time: detector.state.first_alarm_time,
        alarm_channel: detector.state.alarm_channel,
        residual_exceedances,
        collision,
    };
    let metrics = compute_metrics(&trace, &cfg.attack)?;
    Ok(RunOutput {
        trace,
        metrics,
        ids_model: detector.model,
        training: detector.training,
    })
}

/// Runs only the safe interval and returns the trained detector.
pub fn train_ids(cfg: &SimConfig) -> AccResult<(IdsModelFile, TrainingSummary)> {
    if !cfg.ids.enabled {
        return Err(AccError::Config("IDS is disabled in this configuration".into()));
    }
    if cfg.duration < cfg.ids.arm_time {
        let per_sample = cfg.ts;
        let have = ((cfg.duration.min(cfg.ids.safe_end) - cfg.ids.safe_start).max(0.0) / per_sample) as usize;
        let need = cfg.ids.training.samples_per_parameter
            * crate::ids::Mlp::parameter_count(cfg.ids.regressor.width(), cfg.ids.training.hidden);
        return Err(AccError::InsufficientData { have, need });
    }
    let out = run_scenario_with(
        cfg,
        &RunOptions {
            pretrained: None,
            stop_after_training: true,
        },
    )?;
    match (out.ids_model, out.training) {
        (Some(model), Some(summary)) => Ok((model, summary)),
        _ => Err(AccError::InsufficientData { have: 0, need: 1 }),
    }
}

/// Per-mode (mu, sigma) pairs for display.
pub fn threshold_summary(th: &ThresholdSet) -> [(Mode, ModeStats); 2] {
    [
        (Mode::SpeedControl, th.speed_control),
        (Mode::SpacingControl, th.spacing_control),
    ]
}
