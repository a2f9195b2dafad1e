mod common;

use acc_core::dynamics::{discretize_plant, VehicleState};
use approx::assert_abs_diff_eq;
use common::zoh_by_expm;

fn step_response(t: f64) -> f64 {
    t - 0.5 + 0.5 * (-2.0 * t).exp()
}

#[test]
fn closed_forms_match_matrix_exponential() {
    for ts in [0.001, 0.01, 0.05, 0.1, 0.2, 0.5, 1.0] {
        let plant = discretize_plant(ts).unwrap();
        let (a, b) = zoh_by_expm(ts);
        for i in 0..3 {
            assert_abs_diff_eq!(plant.b_d[i], b[i], epsilon = 1e-13);
            for j in 0..3 {
                assert_abs_diff_eq!(plant.a_d[(i, j)], a[(i, j)], epsilon = 1e-13);
            }
        }
    }
}

#[test]
fn unit_step_velocity_matches_analytic_response() {
    let plant = discretize_plant(0.1).unwrap();
    let mut s = VehicleState::new(0.0, 0.0);
    for k in 1..=10 {
        s = plant.step(&s, 1.0);
        let t = k as f64 * 0.1;
        assert_abs_diff_eq!(plant.output(&s), step_response(t), epsilon = 1e-9);
    }
    assert_abs_diff_eq!(s.v, 0.567667641618306, epsilon = 1e-12);
}

#[test]
fn unit_step_position_is_integral_of_velocity() {
    let plant = discretize_plant(0.1).unwrap();
    let mut s = VehicleState::new(0.0, 0.0);
    for k in 1..=30 {
        s = plant.step(&s, 1.0);
        let t = k as f64 * 0.1;
        let x = t * t / 2.0 - t / 2.0 + 0.25 * (1.0 - (-2.0 * t).exp());
        assert_abs_diff_eq!(s.x, x, epsilon = 1e-9);
    }
}

#[test]
fn fine_and_coarse_grids_agree_on_shared_instants() {
    let coarse = discretize_plant(0.1).unwrap();
    let fine = discretize_plant(0.01).unwrap();
    let input = |t: f64| (0.7 * t).sin() * 1.5 - 0.5;
    let mut sc = VehicleState::new(3.0, 20.0);
    let mut sf = sc;
    for k in 0..200 {
        let u = input(k as f64 * 0.1);
        sc = coarse.step(&sc, u);
        for _ in 0..10 {
            sf = fine.step(&sf, u);
        }
        assert_abs_diff_eq!(sc.x, sf.x, epsilon = 1e-9);
        assert_abs_diff_eq!(sc.v, sf.v, epsilon = 1e-10);
        assert_abs_diff_eq!(sc.a_lag, sf.a_lag, epsilon = 1e-11);
    }
}

#[test]
fn superposition_holds() {
    let plant = discretize_plant(0.1).unwrap();
    let run = |s0: VehicleState, gain: f64| {
        let mut s = s0;
        let mut out = Vec::new();
        for k in 0..50 {
            s = plant.step(&s, gain * ((k % 7) as f64 - 3.0));
            out.push(s);
        }
        out
    };
    let a = run(VehicleState::new(1.0, 2.0), 0.0);
    let b = run(VehicleState::new(0.0, 0.0), 1.0);
    let ab = run(VehicleState::new(1.0, 2.0), 1.0);
    for ((a, b), ab) in a.iter().zip(&b).zip(&ab) {
        assert_abs_diff_eq!(a.x + b.x, ab.x, epsilon = 1e-9);
        assert_abs_diff_eq!(a.v + b.v, ab.v, epsilon = 1e-12);
    }
}
