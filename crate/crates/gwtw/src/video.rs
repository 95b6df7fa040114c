//! Discrete-time simulation of the max-bitrate selection model: persistent
//! streaming connections, even capacity division per server, decide as soon
//! as a candidate delivers the required unit bitrate.

use crate::config::SimConfig;
use crate::dist::{sample_servers, ZipfSampler};
use crate::error::Error;
use crate::rng::RngStream;

#[derive(Debug, Clone)]
pub struct VideoUser {
    pub content: u32,
    /// Remaining candidates, ascending id order.
    pub candidates: Vec<u32>,
    pub decided: bool,
    pub decision_step: Option<u64>,
    /// Bitrate observed from each current candidate in the latest step.
    pub last_bitrates: Vec<f64>,
}

pub struct VideoState {
    pub config: SimConfig,
    pub step: u64,
    pub users: Vec<VideoUser>,
}

impl VideoState {
    /// Draws each user's content and candidate set; no steps executed yet.
    pub fn init(config: &SimConfig, mut rng: RngStream) -> Result<VideoState, Error> {
        config.validate()?;
        let sampler = ZipfSampler::new(config.n_c, config.alpha)?;
        let mut users = Vec::with_capacity(config.n_u);
        for id in 0..config.n_u {
            let content = sampler.sample(&mut rng) as u32;
            let sigma = config.spread.sigma_for(id, config.n_u);
            let candidates = sample_servers(config.n_s, sigma, &mut rng)?;
            users.push(VideoUser {
                content,
                candidates,
                decided: false,
                decision_step: None,
                last_bitrates: Vec::new(),
            });
        }
        Ok(VideoState {
            config: config.clone(),
            step: 0,
            users,
        })
    }

    /// Connected-user count per server, recomputed from the candidate sets.
    pub fn server_loads(&self) -> Vec<usize> {
        let mut loads = vec![0usize; self.config.n_s];
        for user in &self.users {
            for &s in &user.candidates {
                loads[s as usize] += 1;
            }
        }
        loads
    }

    /// One synchronous step: every server divides its capacity evenly over
    /// its connected users, every user observes B = min(1, kappa / N_s) per
    /// candidate, and undecided users with a unit-bitrate candidate decide
    /// on the lowest-id one. Loads are taken from the candidate sets at
    /// step start; all decisions apply at step end.
    pub fn advance(&mut self) {
        let loads = self.server_loads();
        let kappa = self.config.kappa as f64;
        for user in &mut self.users {
            user.last_bitrates = user
                .candidates
                .iter()
                .map(|&s| (kappa / loads[s as usize] as f64).min(1.0))
                .collect();
        }
        self.step += 1;
        let now = self.step;
        for user in &mut self.users {
            if user.decided {
                continue;
            }
            if let Some(i) = user.last_bitrates.iter().position(|&b| b == 1.0) {
                user.candidates = vec![user.candidates[i]];
                user.last_bitrates = vec![1.0];
                user.decided = true;
                user.decision_step = Some(now);
            }
        }
    }

    pub fn is_converged(&self) -> bool {
        self.users.iter().all(|u| u.decided)
    }

    pub fn undecided_fraction(&self) -> f64 {
        self.users.iter().filter(|u| !u.decided).count() as f64 / self.config.n_u as f64
    }

    /// Minmax bitrate over the latest step: the worst user's best candidate.
    /// Contract: at least one step must have executed.
    pub fn minmax_bitrate(&self) -> Result<f64, Error> {
        if self.step == 0 {
            return Err(Error::domain("minmax_bitrate: no step executed yet"));
        }
        Ok(self
            .users
            .iter()
            .map(|u| u.last_bitrates.iter().copied().fold(0.0, f64::max))
            .fold(1.0, f64::min))
    }

    pub fn convergence_step(&self) -> Option<u64> {
        if !self.is_converged() {
            return None;
        }
        self.users.iter().filter_map(|u| u.decision_step).max()
    }

    /// Runs until all users are decided and the minmax bitrate is 1, or
    /// `max_steps` steps have executed.
    pub fn run(&mut self, max_steps: u64) -> Result<(), Error> {
        if max_steps == 0 {
            return Err(Error::domain("video run: max_steps must be >= 1"));
        }
        while self.step < max_steps {
            self.advance();
            if self.is_converged() && self.minmax_bitrate()? == 1.0 {
                break;
            }
        }
        Ok(())
    }
}
