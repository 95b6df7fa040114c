//! Self-check suite behind `gwtw validate`: LRU oracle equivalence,
//! chi-square goodness of fit for the popularity sampler, and the
//! balls-into-bins max-load bound.

use rand::Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::cache::{AccessOutcome, LruCache};
use crate::dist::ZipfSampler;
use crate::error::Error;
use crate::metrics::balls_in_bins_max_load;
use crate::oracle::NaiveLru;
use crate::rng::RngStream;

/// Anything that behaves like an LRU cache, so the oracle check can also
/// be pointed at deliberately broken implementations in tests.
pub trait LruLike {
    fn access(&mut self, item: u32) -> AccessOutcome;
}

impl LruLike for LruCache {
    fn access(&mut self, item: u32) -> AccessOutcome {
        LruCache::access(self, item)
    }
}

#[derive(Debug, Clone)]
pub struct CheckReport {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl CheckReport {
    fn new(name: &str, passed: bool, detail: String) -> Self {
        CheckReport {
            name: name.to_string(),
            passed,
            detail,
        }
    }
}

/// Replays random access sequences against the history-based reference and
/// reports the first divergence, if any.
pub fn lru_oracle_check<C, F>(num_sequences: usize, seed: u64, make: F) -> CheckReport
where
    C: LruLike,
    F: Fn(usize) -> C,
{
    let mut rng = RngStream::new(seed, 0);
    for seq_idx in 0..num_sequences {
        let capacity = rng.random_range(1..=8usize);
        let len = rng.random_range(0..=200usize);
        let mut fast = make(capacity);
        let mut naive = NaiveLru::new(capacity);
        for step in 0..len {
            let item = rng.random_range(0..16u32);
            let a = fast.access(item);
            let b = naive.access(item);
            if a != b {
                return CheckReport::new(
                    "lru-oracle",
                    false,
                    format!(
                        "sequence {seq_idx} step {step}: impl {a:?} vs oracle {b:?} \
                         (capacity {capacity}, item {item})"
                    ),
                );
            }
        }
    }
    CheckReport::new(
        "lru-oracle",
        true,
        format!("{num_sequences} random sequences matched the reference"),
    )
}

/// Chi-square goodness of fit of `draws` samples against the analytic pmf
/// at the given significance level. Tail ranks are pooled until each bin's
/// expected count reaches 5, keeping the statistic well-behaved.
pub fn zipf_chi_square_check(
    n_c: usize,
    alpha: f64,
    draws: usize,
    significance: f64,
    seed: u64,
) -> Result<CheckReport, Error> {
    let sampler = ZipfSampler::new(n_c, alpha)?;
    let mut rng = RngStream::new(seed, 0);
    let mut counts = vec![0u64; n_c];
    for _ in 0..draws {
        counts[sampler.sample(&mut rng) - 1] += 1;
    }
    // pool consecutive ranks so each bin expects >= 5 draws
    let mut observed = Vec::new();
    let mut expected = Vec::new();
    let mut obs_acc = 0.0;
    let mut exp_acc = 0.0;
    for k in 1..=n_c {
        obs_acc += counts[k - 1] as f64;
        exp_acc += sampler.pmf(k)? * draws as f64;
        if exp_acc >= 5.0 {
            observed.push(obs_acc);
            expected.push(exp_acc);
            obs_acc = 0.0;
            exp_acc = 0.0;
        }
    }
    if exp_acc > 0.0 {
        match expected.last_mut() {
            Some(last) => {
                *last += exp_acc;
                *observed.last_mut().unwrap() += obs_acc;
            }
            None => {
                expected.push(exp_acc);
                observed.push(obs_acc);
            }
        }
    }
    let statistic: f64 = observed
        .iter()
        .zip(&expected)
        .map(|(o, e)| (o - e).powi(2) / e)
        .sum();
    let dof = (expected.len() - 1).max(1) as f64;
    let critical = ChiSquared::new(dof)
        .map_err(|e| Error::domain(format!("chi-squared dof {dof}: {e}")))?
        .inverse_cdf(1.0 - significance);
    let passed = statistic <= critical;
    Ok(CheckReport::new(
        &format!("zipf-chi-square(n_c={n_c}, alpha={alpha})"),
        passed,
        format!(
            "statistic {statistic:.2} vs critical {critical:.2} ({} bins, {draws} draws)",
            expected.len()
        ),
    ))
}

/// Checks that the observed max load stays within 3 * sigma * n_u / n_s in
/// at least `min_fraction` of trials.
pub fn balls_in_bins_check(
    n_u: usize,
    n_s: usize,
    sigma: usize,
    trials: usize,
    min_fraction: f64,
    seed: u64,
) -> Result<CheckReport, Error> {
    let loads = balls_in_bins_max_load(n_u, n_s, sigma, trials, seed)?;
    let bound = 3.0 * sigma as f64 * n_u as f64 / n_s as f64;
    let within = loads.iter().filter(|&&l| l as f64 <= bound).count();
    let fraction = within as f64 / trials as f64;
    let max_observed = loads.iter().max().copied().unwrap_or(0);
    Ok(CheckReport::new(
        &format!("balls-into-bins(sigma={sigma})"),
        fraction >= min_fraction,
        format!(
            "{within}/{trials} trials within bound {bound:.1}; max load observed {max_observed}"
        ),
    ))
}

/// The full default validator suite.
pub fn run_all(seed: u64) -> Result<Vec<CheckReport>, Error> {
    let mut reports = vec![lru_oracle_check(10_000, seed, |cap| {
        LruCache::new(cap).unwrap()
    })];
    for &(n_c, alpha) in &[(10usize, 0.0), (100, 0.65), (1000, 1.5)] {
        reports.push(zipf_chi_square_check(n_c, alpha, 100_000, 0.001, seed)?);
    }
    let n_s = 100usize;
    let n_u = ((n_s as f64) * (n_s as f64).ln()).ceil() as usize;
    for sigma in [1usize, 2] {
        reports.push(balls_in_bins_check(n_u, n_s, sigma, 100, 0.95, seed)?);
    }
    Ok(reports)
}
