use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn accsim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_accsim")).args(args).output().unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn scenario(dir: &TempDir, name: &str, body: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, body).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn metric(text: &str, key: &str) -> Option<String> {
    text.lines()
        .find_map(|l| l.strip_prefix(&format!("{key} = ")).map(str::to_owned))
}

fn sweep_column(csv: &str, name: &str) -> Vec<String> {
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let idx = header.iter().position(|h| *h == name).unwrap();
    lines.map(|l| l.split(',').nth(idx).unwrap().to_owned()).collect()
}

#[test]
fn nominal_run_reports_no_detection() {
    let dir = TempDir::new().unwrap();
    let file = scenario(&dir, "nominal.toml", "preset = \"nominal\"\n");
    let trace = dir.path().join("trace.csv");
    let metrics = dir.path().join("metrics.toml");
    let out = accsim(&["run", s(&file), "--out", s(&trace), "--metrics", s(&metrics)]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&metrics).unwrap();
    assert_eq!(text, stdout(&out));
    assert!(metric(&text, "detection_latency").is_none());
    assert_eq!(metric(&text, "residual_exceedances").as_deref(), Some("0"));
    assert_eq!(std::fs::read_to_string(&trace).unwrap().lines().count(), 802);
}

#[test]
fn spike_with_compensation_is_detected_quickly() {
    let out = accsim(&["run", "--preset", "attack1_comp"]);
    assert_eq!(code(&out), 0);
    let latency: f64 = metric(&stdout(&out), "detection_latency").unwrap().parse().unwrap();
    assert!(latency <= 0.5, "latency {latency}");
}

#[test]
fn config_errors_exit_with_two() {
    let dir = TempDir::new().unwrap();
    let missing = dir.path().join("absent.toml");
    let out = accsim(&["run", s(&missing)]);
    assert_eq!(code(&out), 2);
    let err = String::from_utf8(out.stderr).unwrap();
    assert_eq!(err.lines().count(), 1);
    assert!(err.starts_with("accsim: error:"));

    let bad = scenario(&dir, "bad.toml", "preset = \"nominal\"\nspeed_of_light = 1\n");
    assert_eq!(code(&accsim(&["run", s(&bad)])), 2);
    let invalid = scenario(&dir, "invalid.toml", "ts = -0.1\n");
    assert_eq!(code(&accsim(&["run", s(&invalid)])), 2);
    assert_eq!(
        code(&accsim(&["run", "--preset", "nominal", "--model", s(&missing)])),
        2
    );
}

#[test]
fn preset_flag_overrides_file_preset() {
    let dir = TempDir::new().unwrap();
    let file = scenario(&dir, "nominal.toml", "preset = \"nominal\"\n");
    let out = accsim(&["run", s(&file), "--preset", "attack2_comp"]);
    assert_eq!(code(&out), 0);
    assert_eq!(
        metric(&stdout(&out), "alarm_channel").as_deref(),
        Some("\"reference_consistency\"")
    );
}

#[test]
fn seed_flag_changes_noisy_runs_only() {
    let dir = TempDir::new().unwrap();
    let noisy = scenario(
        &dir,
        "noisy.toml",
        "preset = \"nominal\"\nseed = 1\n[noise]\nvelocity_std = 0.05\n[ids]\nenabled = false\n",
    );
    let run = |seed: &str, name: &str| {
        let trace = dir.path().join(name);
        assert_eq!(
            code(&accsim(&["run", s(&noisy), "--seed", seed, "--out", s(&trace)])),
            0
        );
        std::fs::read(trace).unwrap()
    };
    let (a, b, c) = (run("5", "a.csv"), run("5", "b.csv"), run("6", "c.csv"));
    assert_eq!(a, b);
    assert_ne!(a, c);
}

#[test]
fn sweep_threshold_width_is_monotone() {
    let dir = TempDir::new().unwrap();
    let file = scenario(&dir, "nominal.toml", "preset = \"nominal\"\n");
    let out = accsim(&["sweep", s(&file), "--param", "k", "--values", "2,3,4,5"]);
    assert_eq!(code(&out), 0);
    let csv = stdout(&out);
    assert!(csv.starts_with("ids.k,"));
    assert_eq!(sweep_column(&csv, "ids.k"), ["2", "3", "4", "5"]);
    let counts: Vec<u64> = sweep_column(&csv, "residual_exceedances")
        .iter()
        .map(|c| c.parse().unwrap())
        .collect();
    assert!(counts.windows(2).all(|w| w[0] >= w[1]), "{counts:?}");
}

#[test]
fn sweep_spike_amplitude_reports_latency_per_row() {
    let dir = TempDir::new().unwrap();
    let file = scenario(&dir, "a1.toml", "preset = \"attack1_nocomp\"\n");
    let table = dir.path().join("sweep.csv");
    let out = accsim(&[
        "sweep",
        s(&file),
        "--param",
        "spike_amplitude",
        "--values",
        "2,0.5,1",
        "--out",
        s(&table),
    ]);
    assert_eq!(code(&out), 0);
    let csv = std::fs::read_to_string(&table).unwrap();
    assert_eq!(sweep_column(&csv, "attack.spike_amplitude"), ["2", "0.5", "1"]);
    for latency in sweep_column(&csv, "detection_latency") {
        assert!(latency.parse::<f64>().unwrap() > 0.0);
    }
}

#[test]
fn sweep_rejects_bad_requests() {
    let dir = TempDir::new().unwrap();
    let file = scenario(&dir, "nominal.toml", "preset = \"nominal\"\n");
    assert_eq!(code(&accsim(&["sweep", s(&file), "--param", "k", "--values"])), 2);
    assert_eq!(
        code(&accsim(&["sweep", s(&file), "--param", "warp_factor", "--values", "1"])),
        2
    );
}

#[test]
fn train_writes_a_reproducible_model() {
    let dir = TempDir::new().unwrap();
    let file = scenario(&dir, "nominal.toml", "preset = \"nominal\"\n");
    let (m1, m2) = (dir.path().join("m1.toml"), dir.path().join("m2.toml"));
    let out = accsim(&["train", s(&file), "--model-out", s(&m1)]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    let rmse: f64 = metric(&text, "train_rmse").unwrap().parse().unwrap();
    assert!(rmse < 1e-3, "rmse {rmse}");
    assert!(text.contains("speed: mu = ") && text.contains("spacing: mu = "));
    assert_eq!(code(&accsim(&["train", s(&file), "--model-out", s(&m2)])), 0);
    assert_eq!(std::fs::read(&m1).unwrap(), std::fs::read(&m2).unwrap());

    // The trained model drives a run to the same outcome as in-run training.
    let with = accsim(&["run", "--preset", "attack1_comp", "--model", s(&m1)]);
    let trained = accsim(&["train", s(&file), "--preset", "attack1_comp", "--model-out", s(&m2)]);
    assert_eq!(code(&trained), 0);
    let reused = accsim(&["run", "--preset", "attack1_comp", "--model", s(&m2)]);
    let fresh = accsim(&["run", "--preset", "attack1_comp"]);
    assert_eq!(code(&with), 0);
    assert_eq!(stdout(&reused), stdout(&fresh));
}

#[test]
fn short_run_cannot_train() {
    let dir = TempDir::new().unwrap();
    let file = scenario(&dir, "short.toml", "preset = \"nominal\"\nduration = 20.0\n");
    assert_eq!(code(&accsim(&["train", s(&file)])), 3);
    // A run that ends before the arm time never needs the detector.
    let out = accsim(&["run", s(&file)]);
    assert_eq!(code(&out), 0);
    assert!(metric(&stdout(&out), "first_alarm_time").is_none());
}

#[test]
fn collision_exits_with_five() {
    let dir = TempDir::new().unwrap();
    let file = scenario(
        &dir,
        "crash.toml",
        "preset = \"nominal\"\nx0_lead = 11.0\nv0_lead = 0.0\nv0_ego = 30.0\n\
         [[lead_profile]]\nt_start = 0.0\naccel = 0.0\n",
    );
    let out = accsim(&["run", s(&file)]);
    assert_eq!(code(&out), 5, "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(metric(&stdout(&out), "collision").as_deref(), Some("true"));
}
