//! `accsim`: batch runner for the ACC attack/detection testbed.
//!
//! Exit codes: 0 ok, 2 config, 3 training, 4 controller fault, 5 collision.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use acc_core::ids::IdsModelFile;
use acc_core::scenario::{parse_value, resolve_parameter, Override, Preset, ScenarioFile};
use acc_core::sim::{format_sig9, run_scenario_with, threshold_summary, train_ids, Metrics, RunOptions};
use acc_core::AccError;
use clap::{Parser, Subcommand};
use rayon::prelude::*;

#[derive(Parser)]
#[command(name = "accsim", version, about = "Adaptive cruise control attack/detection testbed")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario and write its trace and metrics.
    Run {
        /// Scenario file; if omitted, --preset alone defines the run.
        scenario: Option<PathBuf>,
        #[arg(long)]
        preset: Option<Preset>,
        /// Trace CSV path.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Metrics TOML path; metrics always go to stdout as well.
        #[arg(long)]
        metrics: Option<PathBuf>,
        /// Load a trained detector instead of training in-run.
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        /// Parameter override, `name=value` (repeatable).
        #[arg(long = "set", value_name = "NAME=VALUE")]
        overrides: Vec<Override>,
    },
    /// Run a scenario once per value of one numeric parameter.
    Sweep {
        scenario: PathBuf,
        #[arg(long)]
        preset: Option<Preset>,
        #[arg(long)]
        param: String,
        #[arg(long, value_delimiter = ',', num_args = 0..)]
        values: Vec<f64>,
        /// Combined metrics CSV path; stdout if omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long = "set", value_name = "NAME=VALUE")]
        overrides: Vec<Override>,
    },
    /// Train and calibrate the detector on the safe interval only.
    Train {
        scenario: PathBuf,
        #[arg(long)]
        preset: Option<Preset>,
        #[arg(long)]
        model_out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long = "set", value_name = "NAME=VALUE")]
        overrides: Vec<Override>,
    },
}

enum Failure {
    Error(AccError),
    Collision(f64),
}

impl From<AccError> for Failure {
    fn from(e: AccError) -> Self {
        Failure::Error(e)
    }
}

fn exit_code(e: &AccError) -> u8 {
    match e {
        AccError::Config(_) | AccError::InvalidParameter(_) | AccError::Io(_) => 2,
        AccError::InsufficientData { .. } | AccError::TrainingFailure { .. } => 3,
        AccError::SolverNonConvergence { .. } | AccError::Singularity { .. } | AccError::InvalidState(_) => 4,
    }
}

fn load(
    scenario: Option<&Path>,
    preset: Option<Preset>,
    seed: Option<u64>,
    overrides: &[Override],
) -> Result<ScenarioFile, AccError> {
    let mut all = overrides.to_vec();
    if let Some(seed) = seed {
        all.push(Override {
            path: "seed".into(),
            value: toml::Value::Integer(seed as i64),
        });
    }
    match scenario {
        Some(path) => ScenarioFile::load(path, preset, &all),
        None => ScenarioFile::parse_with("", preset, &all),
    }
}

const SWEEP_COLUMNS: [&str; 8] = [
    "detection_latency",
    "first_alarm_time",
    "alarm_channel",
    "residual_exceedances",
    "min_d_rel",
    "violation_duration",
    "steady_gap_deficit",
    "collision",
];

fn opt(v: Option<f64>) -> String {
    v.map(format_sig9).unwrap_or_default()
}

fn sweep_row(value: f64, m: &Metrics) -> String {
    let channel = m.alarm_channel.map(|c| c.as_str()).unwrap_or("");
    format!(
        "{},{},{},{},{},{},{},{},{}",
        format_sig9(value),
        opt(m.detection_latency),
        opt(m.first_alarm_time),
        channel,
        m.residual_exceedances,
        format_sig9(m.min_d_rel),
        format_sig9(m.violation_duration),
        format_sig9(m.steady_gap_deficit),
        m.collision
    )
}

fn write_or_print(path: Option<&Path>, text: &str) -> Result<(), AccError> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| AccError::Config(format!("cannot write {}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Run {
            scenario,
            preset,
            out,
            metrics,
            model,
            seed,
            overrides,
        } => {
            let file = load(scenario.as_deref(), preset, seed, &overrides)?;
            // An explicit --model must exist; the scenario's own model path is
            // only read if a previous `train` wrote it.
            let pretrained = match (model, &file.output.model) {
                (Some(p), _) => Some(IdsModelFile::load(&p)?),
                (None, Some(p)) if p.exists() => Some(IdsModelFile::load(p)?),
                _ => None,
            };
            let output = run_scenario_with(
                &file.config,
                &RunOptions {
                    pretrained,
                    stop_after_training: false,
                },
            )?;
            if let Some(path) = out.or(file.output.trace.clone()) {
                output
                    .trace
                    .write_csv(&path)
                    .map_err(|e| AccError::Config(format!("cannot write {}: {e}", path.display())))?;
            }
            let text = output.metrics.to_toml()?;
            if let Some(path) = metrics.or(file.output.metrics.clone()) {
                write_or_print(Some(&path), &text)?;
            }
            print!("{text}");
            if output.metrics.collision {
                let t = output.trace.records.last().map_or(0.0, |r| r.t);
                return Err(Failure::Collision(t));
            }
            Ok(())
        }
        Command::Sweep {
            scenario,
            preset,
            param,
            values,
            out,
            seed,
            overrides,
        } => {
            if values.is_empty() {
                return Err(AccError::Config("sweep needs at least one value".into()).into());
            }
            let path = resolve_parameter(&param)?;
            let base = load(Some(&scenario), preset, seed, &overrides)?;
            let configs = values
                .iter()
                .map(|&v| {
                    let mut all = overrides.clone();
                    if let Some(seed) = seed {
                        all.push(Override {
                            path: "seed".into(),
                            value: toml::Value::Integer(seed as i64),
                        });
                    }
                    all.push(Override {
                        path: path.clone(),
                        value: parse_value(&format_sig9(v))?,
                    });
                    ScenarioFile::load(&scenario, Some(base.preset), &all).map(|f| f.config)
                })
                .collect::<Result<Vec<_>, _>>()?;
            let results: Vec<_> = configs
                .par_iter()
                .map(|cfg| run_scenario_with(cfg, &RunOptions::default()))
                .collect();
            let mut csv = format!("{},{}\n", path, SWEEP_COLUMNS.join(","));
            for (value, result) in values.iter().zip(results) {
                let output = result?;
                let _ = writeln!(csv, "{}", sweep_row(*value, &output.metrics));
            }
            write_or_print(out.as_deref(), &csv)?;
            Ok(())
        }
        Command::Train {
            scenario,
            preset,
            model_out,
            seed,
            overrides,
        } => {
            let file = load(Some(&scenario), preset, seed, &overrides)?;
            let (model, summary) = train_ids(&file.config)?;
            println!("samples = {}", summary.samples);
            println!("parameters = {}", summary.parameters);
            println!("train_rmse = {}", format_sig9(summary.train_rmse));
            println!("holdout_rmse = {}", format_sig9(summary.holdout_rmse));
            for (mode, stats) in threshold_summary(&model.thresholds) {
                println!(
                    "{}: mu = {} sigma = {} samples = {}{}",
                    mode.as_str(),
                    format_sig9(stats.mu),
                    format_sig9(stats.sigma),
                    stats.samples,
                    if stats.pooled_fallback { " (pooled)" } else { "" }
                );
            }
            if let Some(path) = model_out.or(file.output.model.clone()) {
                model
                    .save(&path)
                    .map_err(|e| AccError::Config(format!("cannot write {}: {e}", path.display())))?;
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Error(e)) => {
            eprintln!("accsim: error: {e}");
            ExitCode::from(exit_code(&e))
        }
        Err(Failure::Collision(t)) => {
            eprintln!("accsim: collision at t = {}", format_sig9(t));
            ExitCode::from(5)
        }
    }
}
