use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use gwtw::error::Error;
use gwtw::metrics::{run_trial, sweep};
use gwtw::spec::{outcome_csv, parse_spec, sweep_csv, trace_csv, write_file, ExperimentSpec};
use gwtw::validate;

const EXIT_CONFIG: u8 = 2;
const EXIT_IO: u8 = 3;
const EXIT_VALIDATION: u8 = 4;

#[derive(Parser)]
#[command(name = "gwtw", about = "Go-with-the-winner server selection simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Overrides {
    /// Override the spec's seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the spec's trial count.
    #[arg(long)]
    trials: Option<usize>,
    /// Override the spec's output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads for trial-level parallelism (default: all cores).
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Run a single trial and write trace.csv and outcome.csv.
    Run {
        spec: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Run a parameter sweep and write sweep.csv.
    Sweep {
        spec: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Run the self-check suite (LRU oracle, popularity fit, max load).
    Validate {
        /// Seed for the validator draws.
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long)]
        jobs: Option<usize>,
    },
}

fn load_spec(path: &PathBuf, overrides: &Overrides) -> Result<ExperimentSpec, Error> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    let mut spec = parse_spec(&text)?;
    if let Some(seed) = overrides.seed {
        spec.config.seed = seed;
    }
    if let Some(trials) = overrides.trials {
        if trials == 0 {
            return Err(Error::config("trials", "must be >= 1"));
        }
        spec.trials = trials;
        if let Some(sweep) = spec.sweep.as_mut() {
            sweep.trials = trials;
        }
    }
    if let Some(out) = &overrides.out {
        spec.output = out.clone();
    }
    Ok(spec)
}

fn configure_jobs(jobs: Option<usize>) -> Result<(), Error> {
    if let Some(jobs) = jobs {
        if jobs == 0 {
            return Err(Error::config("jobs", "must be >= 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .map_err(|e| Error::config("jobs", e.to_string()))?;
    }
    Ok(())
}

fn cmd_run(spec: &ExperimentSpec) -> Result<(), Error> {
    let outcome = run_trial(&spec.config, spec.model, 0)?;
    let trace_path = write_file(&spec.output, "trace.csv", &trace_csv(&outcome))?;
    let outcome_path = write_file(
        &spec.output,
        "outcome.csv",
        &outcome_csv(&outcome, spec.config.seed),
    )?;
    println!(
        "trial finished: {} (convergence_time: {})",
        outcome.status.as_str(),
        outcome
            .convergence_time
            .map_or_else(|| "-".to_string(), |t| format!("{t:.3}")),
    );
    println!("wrote {}", trace_path.display());
    println!("wrote {}", outcome_path.display());
    Ok(())
}

fn cmd_sweep(spec: &ExperimentSpec) -> Result<(), Error> {
    let sweep_spec = spec
        .sweep
        .as_ref()
        .ok_or_else(|| Error::config("sweep", "spec has no sweep block"))?;
    let result = sweep(
        &spec.config,
        sweep_spec.axis,
        &sweep_spec.values,
        sweep_spec.trials,
        spec.model,
    )?;
    let path = write_file(&spec.output, "sweep.csv", &sweep_csv(&result))?;
    for p in &result.points {
        println!(
            "axis={:<10} optimal={:<3} nonoptimal={:<3} timeout={:<3} failure_rate={:.3}",
            p.axis_value, p.converged_optimal, p.converged_nonoptimal, p.timeout, p.failure_rate
        );
    }
    println!("wrote {}", path.display());
    Ok(())
}

fn cmd_validate(seed: u64) -> Result<bool, Error> {
    let reports = validate::run_all(seed)?;
    let mut all_passed = true;
    for r in &reports {
        println!(
            "[{}] {}: {}",
            if r.passed { "PASS" } else { "FAIL" },
            r.name,
            r.detail
        );
        all_passed &= r.passed;
    }
    Ok(all_passed)
}

fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::Io { .. } => EXIT_IO,
        _ => EXIT_CONFIG,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run { spec, overrides } => configure_jobs(overrides.jobs)
            .and_then(|_| load_spec(spec, overrides))
            .and_then(|s| cmd_run(&s)),
        Command::Sweep { spec, overrides } => configure_jobs(overrides.jobs)
            .and_then(|_| load_spec(spec, overrides))
            .and_then(|s| cmd_sweep(&s)),
        Command::Validate { seed, jobs } => {
            match configure_jobs(*jobs).and_then(|_| cmd_validate(*seed)) {
                Ok(true) => return ExitCode::SUCCESS,
                Ok(false) => {
                    eprintln!("validation failed");
                    return ExitCode::from(EXIT_VALIDATION);
                }
                Err(e) => Err(e),
            }
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}
