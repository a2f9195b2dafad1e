#![allow(dead_code)]

use acc_core::controller::{AccConfig, Measurements, Mode, MpcParams};
use nalgebra::{Matrix3, Matrix4, Vector3};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// ZOH by the matrix exponential of the augmented continuous system
/// `[[A, B], [0, 0]]`, independent of the closed forms in the crate.
pub fn zoh_by_expm(ts: f64) -> (Matrix3<f64>, Vector3<f64>) {
    #[rustfmt::skip]
    let m = Matrix4::new(
        0.0, 1.0, 0.0, 0.0,
        0.0, 0.0, 1.0, 0.0,
        0.0, 0.0, -2.0, 2.0,
        0.0, 0.0, 0.0, 0.0,
    ) * ts;
    let e = m.exp();
    (
        e.fixed_view::<3, 3>(0, 0).into_owned(),
        e.fixed_view::<3, 1>(0, 3).into_owned(),
    )
}

/// Composite Simpson rule on `[a, b]` with `n` (even) panels.
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut sum = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        sum += w * f(a + i as f64 * h);
    }
    sum * h / 3.0
}

/// Horizon cost by forward simulation in absolute coordinates: the lead
/// cruises at constant speed, the ego follows the matrix-exponential ZOH.
pub fn simulated_cost(
    cfg: &AccConfig,
    mode: Mode,
    meas: &Measurements,
    d_safe: f64,
    prev_u: f64,
    moves: &[f64],
) -> f64 {
    thread_local!(static ZOH: (Matrix3<f64>, Vector3<f64>) = zoh_by_expm(0.1));
    let (a, b) = ZOH.with(|z| *z);
    let p = cfg.mpc.horizon_p;
    let v_lead = meas.v_ego + meas.v_rel;
    let mut x_lead = meas.d_rel;
    let mut ego = Vector3::new(0.0, meas.v_ego, meas.a_ego);
    let reference = match mode {
        Mode::SpeedControl => cfg.v_set,
        Mode::SpacingControl => d_safe - cfg.t_gap * meas.v_ego,
    };
    let mut cost = 0.0;
    for k in 0..p {
        let u = moves[k.min(moves.len() - 1)];
        ego = a * ego + b * u;
        x_lead += v_lead * 0.1;
        let y = match mode {
            Mode::SpeedControl => ego[1],
            Mode::SpacingControl => (x_lead - ego[0]) - cfg.t_gap * ego[1],
        };
        cost += cfg.mpc.w_track * (y - reference).powi(2);
    }
    let mut last = prev_u;
    for &u in moves {
        cost += cfg.mpc.w_du * (u - last).powi(2) + cfg.mpc.w_u * u * u;
        last = u;
    }
    cost
}

pub fn random_instance(rng: &mut ChaCha8Rng) -> (AccConfig, Mode, Measurements, f64, f64) {
    let horizon_p = rng.gen_range(1..=3);
    let cfg = AccConfig {
        mpc: MpcParams {
            horizon_p,
            horizon_m: rng.gen_range(1..=horizon_p),
            w_track: rng.gen_range(0.1..5.0),
            w_du: rng.gen_range(0.0..1.0),
            w_u: rng.gen_range(0.0..0.5),
            ..MpcParams::default()
        },
        ..AccConfig::default()
    };
    let mode = if rng.gen_bool(0.5) {
        Mode::SpeedControl
    } else {
        Mode::SpacingControl
    };
    let meas = Measurements {
        v_ego: rng.gen_range(5.0..35.0),
        d_rel: rng.gen_range(10.0..60.0),
        v_rel: rng.gen_range(-5.0..5.0),
        a_ego: rng.gen_range(-3.0..2.0),
    };
    let d_safe = cfg.d_default + cfg.t_gap * meas.v_ego + rng.gen_range(-5.0..5.0);
    let prev_u = rng.gen_range(-3.0..2.0);
    (cfg, mode, meas, d_safe, prev_u)
}
