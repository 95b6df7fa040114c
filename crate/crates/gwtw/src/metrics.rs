//! Trial orchestration and system-wide metrics: outcome classification,
//! failure rate and convergence time aggregates, hit-rate order statistics,
//! parameter sweeps, and the balls-into-bins load validator.

use rayon::prelude::*;
use serde::Serialize;

use crate::config::{SimConfig, SpreadPolicy};
use crate::dist::sample_servers;
use crate::error::Error;
use crate::rng::RngStream;
use crate::video::VideoState;
use crate::web::{TraceSample, WebState};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum TrialStatus {
    /// All users decided and no decided server is overbooked/overloaded.
    ConvergedOptimal,
    /// All users decided but some server is overbooked.
    ConvergedNonoptimal,
    /// Horizon reached with undecided users left.
    Timeout,
}

impl TrialStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            TrialStatus::ConvergedOptimal => "converged-optimal",
            TrialStatus::ConvergedNonoptimal => "converged-nonoptimal",
            TrialStatus::Timeout => "timeout",
        }
    }
}

#[derive(Debug, Clone)]
pub struct TrialOutcome {
    pub status: TrialStatus,
    /// Simulated time (web) or step (video) of the last decision; absent on
    /// timeout.
    pub convergence_time: Option<f64>,
    /// Per-user best-candidate windowed hit rate (web) or bitrate (video)
    /// at measurement time.
    pub final_user_hitrates: Vec<f64>,
    pub trace: Vec<TraceSample>,
    pub stream_id: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Model {
    Web,
    Video,
}

/// Runs one web trial to convergence or horizon and classifies it.
pub fn run_web_trial(config: &SimConfig, stream_id: u64) -> Result<TrialOutcome, Error> {
    let mut state = WebState::init(config, RngStream::new(config.seed, stream_id))?;
    state.run(config.horizon)?;
    let (status, convergence_time) = if state.is_converged() {
        let t = state.convergence_time();
        if state.is_optimal()? {
            (TrialStatus::ConvergedOptimal, t)
        } else {
            (TrialStatus::ConvergedNonoptimal, t)
        }
    } else {
        (TrialStatus::Timeout, None)
    };
    Ok(TrialOutcome {
        status,
        convergence_time,
        final_user_hitrates: state.user_hitrates(),
        trace: state.trace,
        stream_id,
    })
}

/// Runs one video trial for at most `horizon` steps.
pub fn run_video_trial(config: &SimConfig, stream_id: u64) -> Result<TrialOutcome, Error> {
    let mut state = VideoState::init(config, RngStream::new(config.seed, stream_id))?;
    let max_steps = config.horizon.max(1.0) as u64;
    let mut trace = Vec::with_capacity(max_steps as usize + 1);
    trace.push(TraceSample {
        time: 0.0,
        undecided_fraction: 1.0,
        minmax_metric: 0.0,
    });
    while state.step < max_steps {
        state.advance();
        trace.push(TraceSample {
            time: state.step as f64,
            undecided_fraction: state.undecided_fraction(),
            minmax_metric: state.minmax_bitrate()?,
        });
        if state.is_converged() && state.minmax_bitrate()? == 1.0 {
            break;
        }
    }
    let (status, convergence_time) = if state.is_converged() {
        (
            TrialStatus::ConvergedOptimal,
            state.convergence_step().map(|s| s as f64),
        )
    } else {
        (TrialStatus::Timeout, None)
    };
    let rates = state
        .users
        .iter()
        .map(|u| u.last_bitrates.iter().copied().fold(0.0, f64::max))
        .collect();
    Ok(TrialOutcome {
        status,
        convergence_time,
        final_user_hitrates: rates,
        trace,
        stream_id,
    })
}

pub fn run_trial(config: &SimConfig, model: Model, stream_id: u64) -> Result<TrialOutcome, Error> {
    match model {
        Model::Web => run_web_trial(config, stream_id),
        Model::Video => run_video_trial(config, stream_id),
    }
}

/// Aggregate over the trials at one sweep point.
#[derive(Debug, Clone, Serialize)]
pub struct SweepPoint {
    pub axis_value: f64,
    pub trials: usize,
    pub converged_optimal: usize,
    pub converged_nonoptimal: usize,
    pub timeout: usize,
    /// Non-optimal fraction among converged trials; 0 when nothing converged.
    pub failure_rate: f64,
    pub timeout_rate: f64,
    /// Mean/median over converged-optimal trials only.
    pub mean_convergence_time: Option<f64>,
    pub median_convergence_time: Option<f64>,
    pub std_err_convergence_time: Option<f64>,
}

/// Runs `trials` independent trials with stream ids 0..trials and
/// aggregates their statuses. Trials execute in parallel; stream ids make
/// the result identical to a serial run.
pub fn run_trials(config: &SimConfig, trials: usize, model: Model) -> Result<SweepPoint, Error> {
    run_trials_with(config, trials, model, |_| {})
}

/// Same as [`run_trials`] but hands each finished outcome to `inspect`
/// (after the parallel phase, in stream-id order).
pub fn run_trials_with(
    config: &SimConfig,
    trials: usize,
    model: Model,
    mut inspect: impl FnMut(&TrialOutcome),
) -> Result<SweepPoint, Error> {
    if trials == 0 {
        return Err(Error::domain("run_trials: trials must be >= 1"));
    }
    config.validate()?;
    let outcomes: Vec<TrialOutcome> = (0..trials as u64)
        .into_par_iter()
        .map(|id| run_trial(config, model, id))
        .collect::<Result<_, _>>()?;
    for outcome in &outcomes {
        inspect(outcome);
    }
    Ok(aggregate(f64::NAN, &outcomes))
}

fn aggregate(axis_value: f64, outcomes: &[TrialOutcome]) -> SweepPoint {
    let trials = outcomes.len();
    let converged_optimal = outcomes
        .iter()
        .filter(|o| o.status == TrialStatus::ConvergedOptimal)
        .count();
    let converged_nonoptimal = outcomes
        .iter()
        .filter(|o| o.status == TrialStatus::ConvergedNonoptimal)
        .count();
    let timeout = trials - converged_optimal - converged_nonoptimal;
    let converged = converged_optimal + converged_nonoptimal;
    let failure_rate = if converged > 0 {
        converged_nonoptimal as f64 / converged as f64
    } else {
        0.0
    };
    let mut times: Vec<f64> = outcomes
        .iter()
        .filter(|o| o.status == TrialStatus::ConvergedOptimal)
        .filter_map(|o| o.convergence_time)
        .collect();
    times.sort_by(f64::total_cmp);
    let (mean, median, std_err) = if times.is_empty() {
        (None, None, None)
    } else {
        let n = times.len() as f64;
        let mean = times.iter().sum::<f64>() / n;
        let median = if times.len() % 2 == 1 {
            times[times.len() / 2]
        } else {
            (times[times.len() / 2 - 1] + times[times.len() / 2]) / 2.0
        };
        let var = times.iter().map(|t| (t - mean).powi(2)).sum::<f64>() / n.max(1.0);
        (Some(mean), Some(median), Some((var / n).sqrt()))
    };
    SweepPoint {
        axis_value,
        trials,
        converged_optimal,
        converged_nonoptimal,
        timeout,
        failure_rate,
        timeout_rate: timeout as f64 / trials as f64,
        mean_convergence_time: mean,
        median_convergence_time: median,
        std_err_convergence_time: std_err,
    }
}

/// Nearest-rank order statistics on the ascending sort. Percentile 0
/// denotes the minimum; 50 the median.
pub fn order_statistics(values: &[f64], percentiles: &[f64]) -> Result<Vec<f64>, Error> {
    if values.is_empty() {
        return Err(Error::domain("order_statistics: empty input"));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    percentiles
        .iter()
        .map(|&p| {
            if !(0.0..=100.0).contains(&p) {
                return Err(Error::domain("order_statistics: percentile out of [0, 100]"));
            }
            let rank = ((p / 100.0) * n as f64).ceil() as usize;
            Ok(sorted[rank.clamp(1, n) - 1])
        })
        .collect()
}

/// Runs the web model under a mixed spread policy until `measure_at`, then
/// reports per-user hit-rate order statistics for `percentiles`.
pub fn mixed_spread_experiment(
    config: &SimConfig,
    measure_at: f64,
    percentiles: &[f64],
    stream_id: u64,
) -> Result<Vec<f64>, Error> {
    let mut state = WebState::init(config, RngStream::new(config.seed, stream_id))?;
    state.run_until(measure_at, false)?;
    order_statistics(&state.user_hitrates(), percentiles)
}

/// Max-load distribution when each of `n_u` users draws `sigma` distinct
/// servers out of `n_s`, one value per trial.
pub fn balls_in_bins_max_load(
    n_u: usize,
    n_s: usize,
    sigma: usize,
    trials: usize,
    seed: u64,
) -> Result<Vec<usize>, Error> {
    if n_u == 0 || n_s == 0 || trials == 0 {
        return Err(Error::domain("balls_in_bins: counts must be >= 1"));
    }
    (0..trials as u64)
        .map(|trial| {
            let mut rng = RngStream::new(seed, trial);
            let mut loads = vec![0usize; n_s];
            for _ in 0..n_u {
                for s in sample_servers(n_s, sigma, &mut rng)? {
                    loads[s as usize] += 1;
                }
            }
            Ok(loads.into_iter().max().unwrap())
        })
        .collect()
}

/// Parameter swept across the points of one experiment series.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    Tau,
    Sigma,
    Alpha,
    /// Users-per-server ratio at fixed load: n_s and kappa are both derived.
    NuOverNs,
    /// Two-choice user fraction of the mixed spread policy.
    F,
}

impl SweepAxis {
    pub fn parse(name: &str) -> Result<SweepAxis, Error> {
        match name {
            "tau" => Ok(SweepAxis::Tau),
            "sigma" => Ok(SweepAxis::Sigma),
            "alpha" => Ok(SweepAxis::Alpha),
            "nu_over_ns" => Ok(SweepAxis::NuOverNs),
            "f" => Ok(SweepAxis::F),
            _ => Err(Error::config(
                "sweep.axis",
                format!("unknown axis `{name}`; expected tau, sigma, alpha, nu_over_ns, or f"),
            )),
        }
    }
}

/// Derives the config at one sweep point from the base config.
pub fn apply_axis(base: &SimConfig, axis: SweepAxis, value: f64) -> Result<SimConfig, Error> {
    let mut config = base.clone();
    match axis {
        SweepAxis::Tau => {
            config.tau = value as usize;
        }
        SweepAxis::Sigma => {
            config.spread = SpreadPolicy::Uniform {
                sigma: value as usize,
            };
        }
        SweepAxis::Alpha => {
            config.alpha = value;
        }
        SweepAxis::NuOverNs => {
            if value <= 0.0 {
                return Err(Error::config("sweep.values", "nu_over_ns must be > 0"));
            }
            let load = base.load();
            let n_s = (base.n_u as f64 / value).round().max(1.0) as usize;
            let exact_kappa = base.n_u as f64 / (load * n_s as f64);
            let kappa = exact_kappa.round().max(1.0);
            if (kappa - exact_kappa).abs() > 0.1 * exact_kappa {
                return Err(Error::config(
                    "sweep.values",
                    format!("nu_over_ns={value} needs non-integral kappa {exact_kappa:.3}"),
                ));
            }
            config.n_s = n_s;
            config.kappa = kappa as usize;
        }
        SweepAxis::F => {
            if !(0.0..=1.0).contains(&value) {
                return Err(Error::config("sweep.values", "f must be in [0, 1]"));
            }
            config.spread = SpreadPolicy::Mixed {
                two_choice_fraction: value,
            };
        }
    }
    config.validate()?;
    Ok(config)
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepResult {
    pub axis: SweepAxis,
    pub points: Vec<SweepPoint>,
}

/// Runs `trials` trials per axis value, holding everything else fixed.
pub fn sweep(
    base: &SimConfig,
    axis: SweepAxis,
    values: &[f64],
    trials: usize,
    model: Model,
) -> Result<SweepResult, Error> {
    if values.is_empty() {
        return Err(Error::config("sweep.values", "must be non-empty"));
    }
    let mut points = Vec::with_capacity(values.len());
    for &value in values {
        let config = apply_axis(base, axis, value)?;
        let mut point = run_trials(&config, trials, model)?;
        point.axis_value = value;
        points.push(point);
    }
    Ok(SweepResult { axis, points })
}
