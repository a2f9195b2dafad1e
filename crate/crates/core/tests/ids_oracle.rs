mod common;

use acc_core::controller::Mode;
use acc_core::ids::{
    calibrate_from_record, calibrate_threshold, detect, false_positive_prob, one_step_rmse, residuals,
    train_identifier, IdsState, IoSample, RegressorSpec, TrainingParams,
};
use acc_core::scenario::Preset;
use acc_core::sim::run_scenario;
use common::{simpson, zoh_by_expm};
use nalgebra::Vector3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

fn gaussian_two_sided_tail(k: f64) -> f64 {
    let phi = |x: f64| (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt();
    2.0 * simpson(phi, k, k + 40.0, 40_000)
}

#[test]
fn erfc_law_matches_quadrature() {
    for k in [0.5, 1.0, 2.0, 3.0] {
        let oracle = gaussian_two_sided_tail(k);
        let p = false_positive_prob(k).unwrap();
        assert!((p - oracle).abs() <= 1e-8, "k={k}: {p} vs {oracle}");
    }
}

fn gaussian_residuals(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| StandardNormal.sample(&mut rng)).collect()
}

#[test]
fn monte_carlo_exceedance_rate_at_k3() {
    let e = gaussian_residuals(100_000, 17);
    let labelled: Vec<(Mode, f64)> = e.iter().map(|&r| (Mode::SpacingControl, r)).collect();
    let th = calibrate_threshold(&labelled, 3.0, 1e-4).unwrap();
    let out = e.iter().filter(|&&r| th.exceeds(Mode::SpacingControl, r)).count();
    let rate = out as f64 / e.len() as f64;
    assert!((rate - 0.0027).abs() <= 0.001, "rate {rate}");

    // Same residuals through the latch with a single-sample rule.
    let mut first = None;
    for (i, &r) in e.iter().enumerate() {
        let s = detect(
            &IdsState::new(RegressorSpec::default()),
            &th,
            Mode::SpacingControl,
            r,
            0.0,
            i as f64,
            1,
        );
        if s.alarm_latched {
            first.get_or_insert(i);
        }
    }
    assert_eq!(first, e.iter().position(|&r| th.exceeds(Mode::SpacingControl, r)));
}

#[test]
fn consecutive_rule_suppresses_calibration_alarms() {
    let e = gaussian_residuals(100_000, 23);
    let labelled: Vec<(Mode, f64)> = e.iter().map(|&r| (Mode::SpeedControl, r)).collect();
    let th = calibrate_threshold(&labelled, 3.0, 1e-4).unwrap();
    let mut state = IdsState::new(RegressorSpec::default());
    let mut alarms = 0;
    for (i, &r) in e.iter().enumerate() {
        state = detect(&state, &th, Mode::SpeedControl, r, 0.0, i as f64, 2);
        if state.alarm_latched {
            alarms += 1;
            state = IdsState::new(RegressorSpec::default());
        }
    }
    assert!((alarms as f64) / (e.len() as f64) <= 0.001, "{alarms} alarms");
}

#[test]
fn per_mode_statistics_are_separate() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let labelled: Vec<(Mode, f64)> = (0..4000)
        .map(|i| {
            let z: f64 = StandardNormal.sample(&mut rng);
            if i % 2 == 0 {
                (Mode::SpeedControl, 1.0 + 0.1 * z)
            } else {
                (Mode::SpacingControl, -2.0 + 3.0 * z)
            }
        })
        .collect();
    let th = calibrate_threshold(&labelled, 4.0, 1e-4).unwrap();
    let (s, p) = (th.stats(Mode::SpeedControl), th.stats(Mode::SpacingControl));
    assert!((s.mu - 1.0).abs() < 0.01 && (s.sigma - 0.1).abs() < 0.01);
    assert!((p.mu + 2.0).abs() < 0.2 && (p.sigma - 3.0).abs() < 0.2);
    assert!(!s.pooled_fallback && !p.pooled_fallback);
}

/// Velocity record from the matrix-exponential plant under a random
/// piecewise-constant command.
fn excited_record(n: usize, seed: u64) -> Vec<IoSample> {
    let (a, b) = zoh_by_expm(0.1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut s = Vector3::new(0.0, 25.0, 0.0);
    let (mut u, mut hold) = (0.0, 0);
    (0..n)
        .map(|_| {
            if hold == 0 {
                u = (rng.gen_range(-3.0f64..2.0) - 0.3 * (s[1] - 25.0)).clamp(-3.0, 2.0);
                hold = rng.gen_range(1..=10);
            }
            hold -= 1;
            let sample = IoSample { u, y: s[1] };
            s = a * s + b * u;
            sample
        })
        .collect()
}

#[test]
fn identifier_learns_the_linear_plant() {
    let record = excited_record(600, 1);
    let (model, report) =
        train_identifier(&record[..400], RegressorSpec::default(), &TrainingParams::default()).unwrap();
    assert!(report.train_rmse < 1e-3, "train rmse {}", report.train_rmse);
    assert!(one_step_rmse(&model, &record) < 1e-3);

    let in_sample: Vec<f64> = residuals(&model, &record[..400]).into_iter().flatten().collect();
    let within = in_sample.iter().filter(|e| e.abs() < 3.0 * report.train_rmse).count();
    assert!(within as f64 >= 0.99 * in_sample.len() as f64);
}

#[test]
fn held_out_spread_within_twice_calibration() {
    let record = excited_record(800, 4);
    let labelled: Vec<(Mode, IoSample)> = record
        .iter()
        .enumerate()
        .map(|(i, s)| {
            (
                if (i / 50) % 2 == 0 {
                    Mode::SpeedControl
                } else {
                    Mode::SpacingControl
                },
                *s,
            )
        })
        .collect();
    let (model, _) = train_identifier(&record[..400], RegressorSpec::default(), &TrainingParams::default()).unwrap();
    let th = calibrate_from_record(&model, &labelled[..400], 4.0, 1e-4).unwrap();
    let held = acc_core::ids::labelled_residuals(&model, &labelled[400..]);
    for mode in Mode::ALL {
        let e: Vec<f64> = held.iter().filter(|(m, _)| *m == mode).map(|(_, e)| *e).collect();
        let mu = e.iter().sum::<f64>() / e.len() as f64;
        let sd = (e.iter().map(|x| (x - mu).powi(2)).sum::<f64>() / e.len() as f64).sqrt();
        assert!(
            sd <= 2.0 * th.stats(mode).sigma,
            "{mode:?}: {sd} vs {}",
            th.stats(mode).sigma
        );
    }
}

#[test]
fn held_out_spread_within_twice_calibration_in_closed_loop() {
    let out = run_scenario(&Preset::Nominal.config()).unwrap();
    let th = out.ids_model.unwrap().thresholds;
    for (mode, sd) in out.training.unwrap().holdout_sigma {
        if let Some(sd) = sd {
            assert!(sd <= 2.0 * th.stats(mode).sigma, "{mode:?}: {sd}");
        }
    }
}

#[test]
fn spike_leaves_band_within_two_samples() {
    let out = run_scenario(&Preset::Attack1Nocomp.config()).unwrap();
    let th = out.ids_model.unwrap().thresholds;
    let fire = out.trace.spike_fire_time.expect("spike fired");
    let ts = out.trace.ts;
    let hit =
        out.trace.records.iter().any(|r| {
            r.t > fire + 0.5 * ts && r.t < fire + 2.5 * ts && r.residual.is_some_and(|e| th.exceeds(r.mode, e))
        });
    assert!(hit);
}
