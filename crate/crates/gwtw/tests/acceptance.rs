//! End-to-end acceptance suite. One test per criterion; each prints a
//! pass/fail line and pins its thresholds in code.

use gwtw::config::{SimConfig, SpreadPolicy};
use gwtw::metrics::{
    apply_axis, balls_in_bins_max_load, mixed_spread_experiment, order_statistics, run_trials_with,
    Model, SweepAxis, SweepPoint, TrialOutcome, TrialStatus,
};
use gwtw::rng::RngStream;
use gwtw::validate;
use gwtw::web::WebState;

const SEED: u64 = 42;

fn paper_config() -> SimConfig {
    SimConfig {
        n_u: 1000,
        n_s: 1000,
        n_c: 1000,
        alpha: 0.65,
        lambda: 1.0,
        kappa: 2,
        spread: SpreadPolicy::Uniform { sigma: 2 },
        tau: 20,
        horizon: 1000.0,
        seed: SEED,
        sample_interval: 1.0,
    }
}

/// Shared per-trial invariants: monotone undecided fraction over the trace
/// and a convergence time exactly when the trial converged.
fn assert_trial_invariants(outcome: &TrialOutcome) {
    let fracs: Vec<f64> = outcome.trace.iter().map(|s| s.undecided_fraction).collect();
    assert!(
        fracs.windows(2).all(|p| p[1] <= p[0]),
        "undecided fraction must be non-increasing (stream {})",
        outcome.stream_id
    );
    assert_eq!(
        outcome.convergence_time.is_some(),
        outcome.status != TrialStatus::Timeout
    );
}

fn assert_status_partition(point: &SweepPoint) {
    assert_eq!(
        point.converged_optimal + point.converged_nonoptimal + point.timeout,
        point.trials
    );
    assert!((0.0..=1.0).contains(&point.failure_rate));
    assert!((0.0..=1.0).contains(&point.timeout_rate));
}

fn run_checked(config: &SimConfig, trials: usize, model: Model) -> SweepPoint {
    let point = run_trials_with(config, trials, model, assert_trial_invariants).unwrap();
    assert_status_partition(&point);
    point
}

fn spearman(x: &[f64], y: &[f64]) -> f64 {
    fn ranks(v: &[f64]) -> Vec<f64> {
        let mut idx: Vec<usize> = (0..v.len()).collect();
        idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
        let mut r = vec![0.0; v.len()];
        for (rank, &i) in idx.iter().enumerate() {
            r[i] = rank as f64 + 1.0;
        }
        r
    }
    let rx = ranks(x);
    let ry = ranks(y);
    let n = x.len() as f64;
    let mx = rx.iter().sum::<f64>() / n;
    let my = ry.iter().sum::<f64>() / n;
    let cov: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = rx.iter().map(|a| (a - mx).powi(2)).sum();
    let vy: f64 = ry.iter().map(|b| (b - my).powi(2)).sum();
    cov / (vx.sqrt() * vy.sqrt())
}

#[test]
fn criterion_01_two_choices_convergence() {
    let point = run_checked(&paper_config(), 20, Model::Web);
    let optimal_fraction = point.converged_optimal as f64 / point.trials as f64;
    assert!(
        optimal_fraction >= 0.9,
        "only {}/{} trials converged optimally",
        point.converged_optimal,
        point.trials
    );
    println!(
        "criterion 1 PASS: {}/{} converged-optimal, mean time {:.1}",
        point.converged_optimal,
        point.trials,
        point.mean_convergence_time.unwrap()
    );
}

#[test]
fn criterion_02_one_choice_fails() {
    let config = SimConfig {
        spread: SpreadPolicy::Uniform { sigma: 1 },
        ..paper_config()
    };
    let mut worst_minmax: f64 = 0.0;
    let point = run_trials_with(&config, 10, Model::Web, |outcome| {
        assert_trial_invariants(outcome);
        let minmax = outcome
            .final_user_hitrates
            .iter()
            .copied()
            .fold(1.0, f64::min);
        assert!(
            minmax < 0.9,
            "stream {}: minmax hit rate {minmax} at horizon",
            outcome.stream_id
        );
        worst_minmax = worst_minmax.max(minmax);
    })
    .unwrap();
    assert_status_partition(&point);
    assert_eq!(point.converged_optimal, 0);
    println!("criterion 2 PASS: 0 optimal trials, max minmax hit rate {worst_minmax:.3}");
}

#[test]
fn criterion_03_tau_tradeoff() {
    let base = SimConfig {
        alpha: 0.6,
        ..paper_config()
    };
    let mut taus = Vec::new();
    let mut mean_times = Vec::new();
    for tau in 1..=20u32 {
        let config = apply_axis(&base, SweepAxis::Tau, tau as f64).unwrap();
        let point = run_checked(&config, 20, Model::Web);
        match tau {
            1..=4 => assert!(
                point.failure_rate >= 0.9,
                "tau={tau}: failure rate {}",
                point.failure_rate
            ),
            11..=20 => assert!(
                point.failure_rate <= 0.1,
                "tau={tau}: failure rate {}",
                point.failure_rate
            ),
            _ => {}
        }
        if tau >= 5 {
            if let Some(mean) = point.mean_convergence_time {
                taus.push(tau as f64);
                mean_times.push(mean);
            }
        }
    }
    let rho = spearman(&taus, &mean_times);
    assert!(rho > 0.9, "Spearman correlation {rho} over tau 5..=20");
    println!("criterion 3 PASS: Spearman {rho:.3} over {} tau points", taus.len());
}

#[test]
fn criterion_04_large_server_tau_robustness() {
    let base = SimConfig {
        n_s: 50,
        kappa: 40,
        alpha: 0.6,
        ..paper_config()
    };
    for tau in 5..=20usize {
        let config = SimConfig { tau, ..base.clone() };
        let point = run_checked(&config, 20, Model::Web);
        assert!(
            point.failure_rate <= 0.05,
            "tau={tau}: failure rate {}",
            point.failure_rate
        );
    }
    println!("criterion 4 PASS: failure rate <= 0.05 for all tau in 5..=20 at n_u/n_s=20");
}

#[test]
fn criterion_05_server_consolidation() {
    let base = paper_config();
    let mut means = Vec::new();
    for ratio in [20.0, 10.0, 1.0] {
        let config = apply_axis(&base, SweepAxis::NuOverNs, ratio).unwrap();
        let point = run_checked(&config, 20, Model::Web);
        means.push(point.mean_convergence_time.expect("no optimal trials"));
    }
    assert!(
        means[0] < means[1] && means[1] < means[2],
        "expected time(20) < time(10) < time(1), got {means:?}"
    );
    println!(
        "criterion 5 PASS: mean times {:.1} < {:.1} < {:.1} for n_u/n_s = 20, 10, 1",
        means[0], means[1], means[2]
    );
}

#[test]
fn criterion_06_spread_sweep() {
    let base = paper_config();
    let mut means = Vec::new();
    let mut errs = Vec::new();
    for sigma in 2..=6u32 {
        let config = apply_axis(&base, SweepAxis::Sigma, sigma as f64).unwrap();
        let point = run_checked(&config, 20, Model::Web);
        means.push(point.mean_convergence_time.expect("no optimal trials"));
        errs.push(point.std_err_convergence_time.unwrap());
    }
    let gap = (means[1] - means[0]).abs();
    assert!(
        gap <= 0.25 * means[0],
        "sigma 3 vs 2: gap {gap:.1} exceeds 25% of {:.1}",
        means[0]
    );
    // non-decreasing over sigma 3..=6, allowing one combined standard error
    for i in 1..means.len() - 1 {
        assert!(
            means[i + 1] >= means[i] - (errs[i] + errs[i + 1]),
            "sigma {} -> {}: {:.1} -> {:.1} (se {:.1}, {:.1})",
            i + 3,
            i + 4,
            means[i],
            means[i + 1],
            errs[i],
            errs[i + 1]
        );
    }
    println!("criterion 6 PASS: mean times by sigma {means:?}");
}

#[test]
fn criterion_07_mixed_spread_order_statistics() {
    let base = SimConfig {
        tau: 10,
        horizon: 200.0,
        ..paper_config()
    };
    let percentiles = [0.0, 1.0, 5.0, 50.0];
    let trials = 10;
    let averaged = |f: f64| -> Vec<f64> {
        let config = SimConfig {
            spread: SpreadPolicy::Mixed {
                two_choice_fraction: f,
            },
            ..base.clone()
        };
        let mut sums = vec![0.0; percentiles.len()];
        for stream in 0..trials {
            let stats = mixed_spread_experiment(&config, 200.0, &percentiles, stream).unwrap();
            for (acc, s) in sums.iter_mut().zip(stats) {
                *acc += s;
            }
        }
        sums.into_iter().map(|s| s / trials as f64).collect()
    };
    // index: 0 = min, 1 = 1st pct, 2 = 5th pct, 3 = median
    let at_10 = averaged(1.0);
    assert!(at_10[0] >= 0.99, "f=1.0 min hit rate {:.4}", at_10[0]);
    let at_07 = averaged(0.7);
    assert!(at_07[2] >= 0.99, "f=0.7 5th percentile {:.4}", at_07[2]);
    let at_09 = averaged(0.9);
    assert!(at_09[1] >= 0.99, "f=0.9 1st percentile {:.4}", at_09[1]);
    for (f, stats) in [(0.0, averaged(0.0)), (0.3, averaged(0.3))] {
        assert!(stats[3] >= 0.99, "f={f} median {:.4}", stats[3]);
    }
    assert!(at_07[3] >= 0.99 && at_10[3] >= 0.99);
    println!(
        "criterion 7 PASS: f=1.0 min {:.3}, f=0.9 p1 {:.3}, f=0.7 p5 {:.3}",
        at_10[0], at_09[1], at_07[2]
    );
}

#[test]
fn criterion_08_popularity_skew() {
    let base = paper_config();
    let mut means = Vec::new();
    let mut errs = Vec::new();
    for alpha in [0.0, 0.5, 1.0, 1.5] {
        let config = apply_axis(&base, SweepAxis::Alpha, alpha).unwrap();
        let point = run_checked(&config, 20, Model::Web);
        means.push(point.mean_convergence_time.expect("no optimal trials"));
        errs.push(point.std_err_convergence_time.unwrap());
    }
    // non-increasing in alpha, allowing one combined standard error
    for i in 0..means.len() - 1 {
        assert!(
            means[i + 1] <= means[i] + (errs[i] + errs[i + 1]),
            "alpha step {i}: {:.1} -> {:.1}",
            means[i],
            means[i + 1]
        );
    }
    println!("criterion 8 PASS: mean times by alpha {means:?}");
}

#[test]
fn criterion_09_video_convergence() {
    let config = SimConfig {
        kappa: 4,
        horizon: 50.0,
        ..paper_config()
    };
    let point = run_trials_with(&config, 20, Model::Video, |outcome| {
        assert_trial_invariants(outcome);
        let minmax = outcome
            .final_user_hitrates
            .iter()
            .copied()
            .fold(1.0, f64::min);
        assert_eq!(minmax, 1.0, "stream {}", outcome.stream_id);
    })
    .unwrap();
    assert_status_partition(&point);
    assert_eq!(point.converged_optimal, 20, "all trials must converge within 50 steps");

    let one_choice = SimConfig {
        spread: SpreadPolicy::Uniform { sigma: 1 },
        kappa: 2,
        horizon: 100.0,
        ..paper_config()
    };
    let mut starved = 0;
    let point = run_trials_with(&one_choice, 20, Model::Video, |outcome| {
        assert_trial_invariants(outcome);
        let minmax = outcome
            .final_user_hitrates
            .iter()
            .copied()
            .fold(1.0, f64::min);
        if minmax < 1.0 {
            starved += 1;
        }
    })
    .unwrap();
    assert_status_partition(&point);
    assert!(
        starved as f64 >= 0.9 * 20.0,
        "only {starved}/20 sigma=1 trials had minmax bitrate < 1"
    );
    println!("criterion 9 PASS: 20/20 two-choice trials converged; {starved}/20 one-choice starved");
}

#[test]
fn criterion_10_balls_into_bins() {
    let n_s = 100usize;
    let n_u = ((n_s as f64) * (n_s as f64).ln()).ceil() as usize;
    assert_eq!(n_u, 461);
    for sigma in [1usize, 2] {
        let loads = balls_in_bins_max_load(n_u, n_s, sigma, 100, SEED).unwrap();
        let bound = 3.0 * sigma as f64 * n_u as f64 / n_s as f64;
        let within = loads.iter().filter(|&&l| (l as f64) <= bound).count();
        assert!(
            within >= 95,
            "sigma={sigma}: {within}/100 trials within bound {bound:.1}"
        );
    }
    println!("criterion 10 PASS: max load within 3*sigma*n_u/n_s in >= 95% of trials");
}

#[test]
fn criterion_11_property_suites() {
    // LRU oracle equivalence over 10^4 random sequences and the popularity
    // sampler's chi-square fit, via the same checks `gwtw validate` runs
    for report in validate::run_all(SEED).unwrap() {
        assert!(report.passed, "{}: {}", report.name, report.detail);
    }

    // determinism: seed replay yields byte-identical CSV renderings
    let config = SimConfig {
        n_u: 200,
        n_s: 200,
        n_c: 200,
        horizon: 300.0,
        ..paper_config()
    };
    let a = gwtw::metrics::run_trial(&config, Model::Web, 0).unwrap();
    let b = gwtw::metrics::run_trial(&config, Model::Web, 0).unwrap();
    assert_eq!(gwtw::spec::trace_csv(&a), gwtw::spec::trace_csv(&b));
    assert_eq!(
        gwtw::spec::outcome_csv(&a, config.seed),
        gwtw::spec::outcome_csv(&b, config.seed)
    );

    // optimal-state stability: an optimal converged run keeps serving with
    // zero misses over 10/lambda further time units once content is resident
    let config = paper_config();
    let mut checked = 0;
    for stream in 0..5u64 {
        let mut state = WebState::init(&config, RngStream::new(config.seed, stream)).unwrap();
        state.run(config.horizon).unwrap();
        if state.is_converged() && state.is_optimal().unwrap() {
            assert!(
                state.check_stability(10.0 / config.lambda).unwrap(),
                "stream {stream}: misses after convergence to an optimal state"
            );
            checked += 1;
        }
    }
    assert!(checked > 0, "no optimal runs to check stability on");

    // order statistics sanity on a converged population
    let stats = order_statistics(&a.final_user_hitrates, &[0.0, 50.0, 100.0]).unwrap();
    assert!(stats.windows(2).all(|w| w[0] <= w[1]));

    println!("criterion 11 PASS: oracle, fit, determinism, and stability checks green");
}
