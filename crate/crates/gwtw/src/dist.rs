//! Sampling primitives: truncated power-law content popularity, exponential
//! inter-arrival times, and uniform without-replacement server choice.

use crate::error::Error;
use crate::rng::RngStream;
use rand::Rng;

/// Generalized harmonic number H(n, alpha) = sum_{k=1..n} 1/k^alpha.
///
/// Summed in descending k so the smallest terms accumulate first.
pub fn harmonic(n: usize, alpha: f64) -> Result<f64, Error> {
    if n == 0 {
        return Err(Error::domain("harmonic: n must be >= 1"));
    }
    if alpha < 0.0 {
        return Err(Error::domain("harmonic: alpha must be >= 0"));
    }
    let mut sum = 0.0;
    for k in (1..=n).rev() {
        sum += (k as f64).powf(-alpha);
    }
    Ok(sum)
}

/// Probability that rank `k` (1-based) is requested out of `n_c` items.
pub fn zipf_pmf(k: usize, n_c: usize, alpha: f64) -> Result<f64, Error> {
    if k == 0 || k > n_c {
        return Err(Error::domain("zipf_pmf: rank out of range"));
    }
    Ok((k as f64).powf(-alpha) / harmonic(n_c, alpha)?)
}

/// Truncated power-law sampler over ranks 1..=n_c, drawn by inverse-CDF
/// binary search on a precomputed table.
#[derive(Debug, Clone)]
pub struct ZipfSampler {
    n_c: usize,
    alpha: f64,
    cdf: Vec<f64>,
}

impl ZipfSampler {
    pub fn new(n_c: usize, alpha: f64) -> Result<Self, Error> {
        if n_c == 0 {
            return Err(Error::domain("ZipfSampler: n_c must be >= 1"));
        }
        if alpha < 0.0 {
            return Err(Error::domain("ZipfSampler: alpha must be >= 0"));
        }
        let norm = harmonic(n_c, alpha)?;
        let mut cdf = Vec::with_capacity(n_c);
        // Kahan-compensated accumulation keeps each increment accurate to
        // ~1 ulp even for large n_c.
        let mut acc = 0.0;
        let mut comp = 0.0;
        for k in 1..=n_c {
            let term = (k as f64).powf(-alpha) / norm - comp;
            let next = acc + term;
            comp = (next - acc) - term;
            acc = next;
            cdf.push(acc);
        }
        // Pin the last entry so a u drawn arbitrarily close to 1 still maps
        // to a valid rank.
        *cdf.last_mut().unwrap() = 1.0;
        Ok(ZipfSampler { n_c, alpha, cdf })
    }

    pub fn n_items(&self) -> usize {
        self.n_c
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn pmf(&self, k: usize) -> Result<f64, Error> {
        zipf_pmf(k, self.n_c, self.alpha)
    }

    /// Draws a rank in 1..=n_c distributed per the popularity law.
    pub fn sample(&self, rng: &mut RngStream) -> usize {
        let u: f64 = rng.random();
        // First index whose cumulative probability covers u.
        self.cdf.partition_point(|&c| c < u) + 1
    }
}

/// Strictly positive exponential variate with the given rate.
pub fn sample_exponential(rate: f64, rng: &mut RngStream) -> Result<f64, Error> {
    if rate <= 0.0 {
        return Err(Error::domain("sample_exponential: rate must be > 0"));
    }
    // u uniform on (0, 1]: 1 - random() flips the half-open side so ln(u)
    // is finite and the variate stays strictly positive.
    let u: f64 = 1.0 - rng.random::<f64>();
    Ok(-u.ln() / rate)
}

/// Draws `sigma` distinct server ids uniformly from [0, n_s), ascending.
pub fn sample_servers(n_s: usize, sigma: usize, rng: &mut RngStream) -> Result<Vec<u32>, Error> {
    if sigma == 0 || sigma > n_s {
        return Err(Error::domain("sample_servers: need 1 <= sigma <= n_s"));
    }
    // Floyd's algorithm: sigma draws, no retry loop.
    let mut chosen: Vec<u32> = Vec::with_capacity(sigma);
    for j in (n_s - sigma)..n_s {
        let t = rng.random_range(0..=j as u32);
        if chosen.contains(&t) {
            chosen.push(j as u32);
        } else {
            chosen.push(t);
        }
    }
    chosen.sort_unstable();
    Ok(chosen)
}
