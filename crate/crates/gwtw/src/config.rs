//! Trial parameterization shared by the web and video engines.

use crate::error::Error;
use serde::{Deserialize, Serialize};

/// How many candidate servers each user tries out initially.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum SpreadPolicy {
    /// Every user draws the same number of candidates.
    Uniform { sigma: usize },
    /// A fraction `f` of users draw two candidates, the rest draw one,
    /// giving an average spread of 1 + f.
    Mixed { two_choice_fraction: f64 },
}

impl SpreadPolicy {
    /// Candidate count for user `user` out of `n_u`. Under the mixed policy
    /// exactly round(f * n_u) users get two choices.
    pub fn sigma_for(&self, user: usize, n_u: usize) -> usize {
        match *self {
            SpreadPolicy::Uniform { sigma } => sigma,
            SpreadPolicy::Mixed {
                two_choice_fraction,
            } => {
                let two_choice_users = (two_choice_fraction * n_u as f64).round() as usize;
                if user < two_choice_users {
                    2
                } else {
                    1
                }
            }
        }
    }

    pub fn max_sigma(&self) -> usize {
        match *self {
            SpreadPolicy::Uniform { sigma } => sigma,
            SpreadPolicy::Mixed { .. } => 2,
        }
    }
}

/// Full parameterization of one trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub n_u: usize,
    pub n_s: usize,
    pub n_c: usize,
    /// Popularity skew exponent; 0 is uniform.
    pub alpha: f64,
    /// Per-user request rate (web model only).
    pub lambda: f64,
    /// Cache slots (web) or bitrate units (video) per server.
    pub kappa: usize,
    pub spread: SpreadPolicy,
    /// Sliding window length in requests (web model only).
    pub tau: usize,
    /// Max simulated time (web) or steps (video).
    pub horizon: f64,
    pub seed: u64,
    /// Trace sampling period in simulated time units.
    pub sample_interval: f64,
}

impl SimConfig {
    pub fn validate(&self) -> Result<(), Error> {
        if self.n_u == 0 {
            return Err(Error::config("n_u", "must be >= 1"));
        }
        if self.n_s == 0 {
            return Err(Error::config("n_s", "must be >= 1"));
        }
        if self.n_c == 0 {
            return Err(Error::config("n_c", "must be >= 1"));
        }
        if !(self.alpha >= 0.0) {
            return Err(Error::config("alpha", "must be >= 0"));
        }
        if !(self.lambda > 0.0) {
            return Err(Error::config("lambda", "must be > 0"));
        }
        if self.kappa == 0 {
            return Err(Error::config("kappa", "must be >= 1"));
        }
        if self.tau == 0 {
            return Err(Error::config("tau", "must be >= 1"));
        }
        if !(self.horizon > 0.0) {
            return Err(Error::config("horizon", "must be > 0"));
        }
        if !(self.sample_interval > 0.0) {
            return Err(Error::config("sample_interval", "must be > 0"));
        }
        match self.spread {
            SpreadPolicy::Uniform { sigma } => {
                if sigma == 0 || sigma > self.n_s {
                    return Err(Error::config("sigma", "need 1 <= sigma <= n_s"));
                }
            }
            SpreadPolicy::Mixed {
                two_choice_fraction,
            } => {
                if !(0.0..=1.0).contains(&two_choice_fraction) {
                    return Err(Error::config("f", "must be in [0, 1]"));
                }
                if self.n_s < 2 {
                    return Err(Error::config("n_s", "mixed spread needs n_s >= 2"));
                }
            }
        }
        Ok(())
    }

    /// System load l = n_u / (kappa * n_s): users per unit of capacity.
    pub fn load(&self) -> f64 {
        self.n_u as f64 / (self.kappa as f64 * self.n_s as f64)
    }
}
