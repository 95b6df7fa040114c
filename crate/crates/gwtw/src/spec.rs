//! Experiment spec parsing and CSV emission for the command-line front end.
//!
//! Specs are JSON documents carrying the trial parameters, an optional
//! sweep block, and an output directory. All output files use fixed
//! six-digit decimal formatting and `\n` line endings so a seed replay is
//! byte-identical.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::config::{SimConfig, SpreadPolicy};
use crate::error::Error;
use crate::metrics::{Model, SweepAxis, SweepResult, TrialOutcome};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSweep {
    axis: String,
    values: Vec<f64>,
    trials: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpec {
    model: String,
    n_u: usize,
    n_s: usize,
    n_c: usize,
    kappa: usize,
    seed: u64,
    sigma: Option<usize>,
    f: Option<f64>,
    tau: Option<usize>,
    alpha: Option<f64>,
    lambda: Option<f64>,
    horizon: Option<f64>,
    sample_interval: Option<f64>,
    trials: Option<usize>,
    sweep: Option<RawSweep>,
    output: Option<String>,
}

/// Fully validated experiment description.
#[derive(Debug, Clone)]
pub struct ExperimentSpec {
    pub model: Model,
    pub config: SimConfig,
    pub trials: usize,
    pub sweep: Option<SweepSpec>,
    pub output: PathBuf,
}

#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub axis: SweepAxis,
    pub values: Vec<f64>,
    pub trials: usize,
}

/// Parses and validates a JSON experiment spec, applying the documented
/// defaults (lambda 1, alpha 0.65, sample_interval 1, trials 20, horizon
/// 1000 time units for the web model and 200 steps for video).
pub fn parse_spec(text: &str) -> Result<ExperimentSpec, Error> {
    let raw: RawSpec = serde_json::from_str(text)
        .map_err(|e| Error::config("spec", format!("invalid JSON spec: {e}")))?;
    let model = match raw.model.as_str() {
        "web" => Model::Web,
        "video" => Model::Video,
        other => {
            return Err(Error::config(
                "model",
                format!("expected \"web\" or \"video\", got \"{other}\""),
            ))
        }
    };
    let spread = match (raw.sigma, raw.f) {
        (Some(sigma), None) => SpreadPolicy::Uniform { sigma },
        (None, Some(f)) => SpreadPolicy::Mixed {
            two_choice_fraction: f,
        },
        (Some(_), Some(_)) => {
            return Err(Error::config("sigma", "sigma and f are mutually exclusive"))
        }
        (None, None) => return Err(Error::config("sigma", "either sigma or f is required")),
    };
    let tau = match (raw.tau, model) {
        (Some(tau), _) => tau,
        (None, Model::Video) => 1, // unused by the video model
        (None, Model::Web) => return Err(Error::config("tau", "required for the web model")),
    };
    let horizon = raw.horizon.unwrap_or(match model {
        Model::Web => 1000.0,
        Model::Video => 200.0,
    });
    let config = SimConfig {
        n_u: raw.n_u,
        n_s: raw.n_s,
        n_c: raw.n_c,
        alpha: raw.alpha.unwrap_or(0.65),
        lambda: raw.lambda.unwrap_or(1.0),
        kappa: raw.kappa,
        spread,
        tau,
        horizon,
        seed: raw.seed,
        sample_interval: raw.sample_interval.unwrap_or(1.0),
    };
    config.validate()?;
    let trials = raw.trials.unwrap_or(20);
    if trials == 0 {
        return Err(Error::config("trials", "must be >= 1"));
    }
    let sweep = match raw.sweep {
        Some(s) => {
            let axis = SweepAxis::parse(&s.axis)?;
            if s.values.is_empty() {
                return Err(Error::config("sweep.values", "must be non-empty"));
            }
            let sweep_trials = s.trials.unwrap_or(trials);
            if sweep_trials == 0 {
                return Err(Error::config("sweep.trials", "must be >= 1"));
            }
            Some(SweepSpec {
                axis,
                values: s.values,
                trials: sweep_trials,
            })
        }
        None => None,
    };
    Ok(ExperimentSpec {
        model,
        config,
        trials,
        sweep,
        output: PathBuf::from(raw.output.unwrap_or_else(|| ".".to_string())),
    })
}

fn fmt_opt(value: Option<f64>) -> String {
    match value {
        Some(v) => format!("{v:.6}"),
        None => String::new(),
    }
}

/// Renders a trial's trace as `trace.csv` content.
pub fn trace_csv(outcome: &TrialOutcome) -> String {
    let mut out = String::from("time,undecided_fraction,minmax_metric\n");
    for s in &outcome.trace {
        let _ = writeln!(
            out,
            "{:.6},{:.6},{:.6}",
            s.time, s.undecided_fraction, s.minmax_metric
        );
    }
    out
}

/// Renders a trial's classification as `outcome.csv` content.
pub fn outcome_csv(outcome: &TrialOutcome, seed: u64) -> String {
    format!(
        "status,convergence_time,seed\n{},{},{}\n",
        outcome.status.as_str(),
        fmt_opt(outcome.convergence_time),
        seed
    )
}

/// Renders sweep aggregates as `sweep.csv` content.
pub fn sweep_csv(result: &SweepResult) -> String {
    let mut out = String::from(
        "axis_value,trials,converged_optimal,converged_nonoptimal,timeout,\
         failure_rate,mean_convergence_time,median_convergence_time\n",
    );
    for p in &result.points {
        let _ = writeln!(
            out,
            "{:.6},{},{},{},{},{:.6},{},{}",
            p.axis_value,
            p.trials,
            p.converged_optimal,
            p.converged_nonoptimal,
            p.timeout,
            p.failure_rate,
            fmt_opt(p.mean_convergence_time),
            fmt_opt(p.median_convergence_time),
        );
    }
    out
}

pub fn write_file(dir: &Path, name: &str, content: &str) -> Result<PathBuf, Error> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir.display().to_string(), e))?;
    let path = dir.join(name);
    fs::write(&path, content).map_err(|e| Error::io(path.display().to_string(), e))?;
    Ok(path)
}
