//! Continuous-time event-driven simulation of the go-with-the-winner web
//! model: Poisson per-user request processes, multi-candidate fan-out over
//! LRU caches, sliding-window hit-rate feedback, and the decide-on-100% rule.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::cache::LruCache;
use crate::config::SimConfig;
use crate::dist::{sample_exponential, sample_servers, ZipfSampler};
use crate::error::Error;
use crate::rng::RngStream;

/// Fixed-length ring of the last `tau` hit/miss outcomes, zero-initialized.
#[derive(Debug, Clone)]
pub struct HitWindow {
    bits: Vec<bool>,
    head: usize,
    hit_count: usize,
}

impl HitWindow {
    pub fn new(tau: usize) -> Self {
        HitWindow {
            bits: vec![false; tau],
            head: 0,
            hit_count: 0,
        }
    }

    /// Shifts the newest outcome in, dropping the oldest.
    pub fn push(&mut self, hit: bool) {
        if self.bits[self.head] {
            self.hit_count -= 1;
        }
        self.bits[self.head] = hit;
        if hit {
            self.hit_count += 1;
        }
        self.head = (self.head + 1) % self.bits.len();
    }

    /// Hit rate over the full window, zero-init slots counting as misses.
    pub fn hit_rate(&self) -> f64 {
        self.hit_count as f64 / self.bits.len() as f64
    }

    pub fn is_full_hit(&self) -> bool {
        self.hit_count == self.bits.len()
    }

    pub fn hit_count(&self) -> usize {
        self.hit_count
    }

    /// Recount of the raw bits, for invariant checks.
    pub fn recount(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }
}

#[derive(Debug, Clone)]
pub struct UserState {
    pub id: u32,
    /// Content rank this user requests for the whole trial (1-based).
    pub content: u32,
    /// Remaining candidate servers, ascending id order.
    pub candidates: Vec<u32>,
    /// One window per candidate, parallel to `candidates`.
    pub windows: Vec<HitWindow>,
    pub decided: bool,
    pub decision_time: Option<f64>,
    pub requests_sent: u64,
}

impl UserState {
    pub fn decided_server(&self) -> Option<u32> {
        if self.decided {
            Some(self.candidates[0])
        } else {
            None
        }
    }

    /// Best per-candidate window hit rate.
    pub fn best_hit_rate(&self) -> f64 {
        self.windows
            .iter()
            .map(HitWindow::hit_rate)
            .fold(0.0, f64::max)
    }
}

/// Pending request arrival. Ordered by (time, user, seq) so equal float
/// timestamps still break deterministically.
#[derive(Debug, Clone, Copy)]
pub struct RequestEvent {
    pub time: f64,
    pub user: u32,
    pub seq: u64,
}

impl PartialEq for RequestEvent {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for RequestEvent {}
impl PartialOrd for RequestEvent {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for RequestEvent {
    fn cmp(&self, other: &Self) -> Ordering {
        self.time
            .total_cmp(&other.time)
            .then(self.user.cmp(&other.user))
            .then(self.seq.cmp(&other.seq))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceSample {
    pub time: f64,
    pub undecided_fraction: f64,
    pub minmax_metric: f64,
}

pub struct WebState {
    pub config: SimConfig,
    pub clock: f64,
    pub users: Vec<UserState>,
    pub servers: Vec<LruCache>,
    queue: BinaryHeap<std::cmp::Reverse<RequestEvent>>,
    rng: RngStream,
    next_seq: u64,
    undecided: usize,
    pub trace: Vec<TraceSample>,
    next_sample: f64,
    /// Total cache accesses performed, for conservation checks.
    pub cache_accesses: u64,
}

impl WebState {
    /// Builds the initial state: per-user content rank and candidate set,
    /// empty caches, zeroed windows, and one Poisson arrival per user.
    pub fn init(config: &SimConfig, mut rng: RngStream) -> Result<WebState, Error> {
        config.validate()?;
        let sampler = ZipfSampler::new(config.n_c, config.alpha)?;
        let mut users = Vec::with_capacity(config.n_u);
        let mut queue = BinaryHeap::with_capacity(config.n_u);
        let mut next_seq = 0u64;
        for id in 0..config.n_u {
            let content = sampler.sample(&mut rng) as u32;
            let sigma = config.spread.sigma_for(id, config.n_u);
            let candidates = sample_servers(config.n_s, sigma, &mut rng)?;
            let windows = candidates.iter().map(|_| HitWindow::new(config.tau)).collect();
            let offset = sample_exponential(config.lambda, &mut rng)?;
            queue.push(std::cmp::Reverse(RequestEvent {
                time: offset,
                user: id as u32,
                seq: next_seq,
            }));
            next_seq += 1;
            users.push(UserState {
                id: id as u32,
                content,
                candidates,
                windows,
                decided: false,
                decision_time: None,
                requests_sent: 0,
            });
        }
        let servers = (0..config.n_s)
            .map(|_| LruCache::new(config.kappa))
            .collect::<Result<Vec<_>, _>>()?;
        let undecided = config.n_u;
        let mut state = WebState {
            config: config.clone(),
            clock: 0.0,
            users,
            servers,
            queue,
            rng,
            next_seq,
            undecided,
            trace: Vec::new(),
            next_sample: 0.0,
            cache_accesses: 0,
        };
        state.record_sample(0.0);
        state.next_sample = state.config.sample_interval;
        Ok(state)
    }

    fn record_sample(&mut self, time: f64) {
        let sample = TraceSample {
            time,
            undecided_fraction: self.undecided_fraction(),
            minmax_metric: self.minmax_hitrate(),
        };
        self.trace.push(sample);
    }

    /// Handles one arrival: fan the request out to every current candidate
    /// in ascending id order, update each window, then let an undecided
    /// user decide on the first candidate showing a full-hit window.
    /// Returns true iff every cache access of this request was a hit.
    fn process_request(&mut self, event: RequestEvent) -> Result<bool, Error> {
        self.clock = event.time;
        let user = &mut self.users[event.user as usize];
        let content = user.content;
        let mut winner: Option<usize> = None;
        let mut all_hits = true;
        for (i, &server) in user.candidates.iter().enumerate() {
            let outcome = self.servers[server as usize].access(content);
            self.cache_accesses += 1;
            all_hits &= outcome.hit;
            user.windows[i].push(outcome.hit);
            if winner.is_none() && !user.decided && user.windows[i].is_full_hit() {
                winner = Some(i);
            }
        }
        user.requests_sent += 1;
        if let Some(i) = winner {
            user.candidates = vec![user.candidates[i]];
            user.windows = vec![user.windows[i].clone()];
            user.decided = true;
            user.decision_time = Some(event.time);
            self.undecided -= 1;
        }
        let gap = sample_exponential(self.config.lambda, &mut self.rng)?;
        self.queue.push(std::cmp::Reverse(RequestEvent {
            time: event.time + gap,
            user: event.user,
            seq: self.next_seq,
        }));
        self.next_seq += 1;
        Ok(all_hits)
    }

    /// Drives the event loop until the clock would exceed `until` or, when
    /// `stop_on_convergence` is set, until every user has decided. Trace
    /// samples are appended every `sample_interval`.
    pub fn run_until(&mut self, until: f64, stop_on_convergence: bool) -> Result<(), Error> {
        if until < self.clock {
            return Err(Error::domain("run: until must be >= current clock"));
        }
        loop {
            if stop_on_convergence && self.is_converged() {
                return Ok(());
            }
            let next_time = match self.queue.peek() {
                Some(std::cmp::Reverse(e)) => e.time,
                None => break,
            };
            if next_time > until {
                break;
            }
            while self.next_sample <= next_time && self.next_sample <= until {
                let t = self.next_sample;
                self.record_sample(t);
                self.next_sample += self.config.sample_interval;
            }
            let std::cmp::Reverse(event) = self.queue.pop().unwrap();
            self.process_request(event)?;
        }
        // flush sample points up to `until` with the final state
        while self.next_sample <= until {
            let t = self.next_sample;
            self.record_sample(t);
            self.next_sample += self.config.sample_interval;
        }
        Ok(())
    }

    /// Convenience wrapper matching the common driver: run to `until`,
    /// stopping early once converged.
    pub fn run(&mut self, until: f64) -> Result<(), Error> {
        self.run_until(until, true)
    }

    pub fn is_converged(&self) -> bool {
        self.undecided == 0
    }

    pub fn undecided_fraction(&self) -> f64 {
        self.undecided as f64 / self.config.n_u as f64
    }

    /// Time the last user decided; only meaningful once converged.
    pub fn convergence_time(&self) -> Option<f64> {
        if !self.is_converged() {
            return None;
        }
        self.users
            .iter()
            .filter_map(|u| u.decision_time)
            .fold(None, |acc, t| Some(acc.map_or(t, |a: f64| a.max(t))))
    }

    /// True iff no decided server is overbooked: for every server, the
    /// users decided on it demand at most `kappa` distinct content items.
    /// Contract: only callable on a converged state.
    pub fn is_optimal(&self) -> Result<bool, Error> {
        if !self.is_converged() {
            return Err(Error::domain("is_optimal: state has not converged"));
        }
        let mut demanded: Vec<Vec<u32>> = vec![Vec::new(); self.config.n_s];
        for user in &self.users {
            let s = user.candidates[0] as usize;
            if !demanded[s].contains(&user.content) {
                demanded[s].push(user.content);
            }
        }
        Ok(demanded.iter().all(|d| d.len() <= self.config.kappa))
    }

    /// Minmax hit rate: the worst user's best per-candidate window rate.
    pub fn minmax_hitrate(&self) -> f64 {
        self.users
            .iter()
            .map(UserState::best_hit_rate)
            .fold(1.0, f64::min)
    }

    /// Per-user best-candidate window hit rates, in user id order.
    pub fn user_hitrates(&self) -> Vec<f64> {
        self.users.iter().map(UserState::best_hit_rate).collect()
    }

    /// Post-convergence stability probe: runs `extra_time` further and
    /// checks that once a user's content is resident on its decided server
    /// (first observed hit), no later request of that user misses.
    pub fn check_stability(&mut self, extra_time: f64) -> Result<bool, Error> {
        if !self.is_converged() {
            return Err(Error::domain("check_stability: state has not converged"));
        }
        let until = self.clock + extra_time;
        let mut resident = vec![false; self.config.n_u];
        loop {
            let next_time = match self.queue.peek() {
                Some(std::cmp::Reverse(e)) => e.time,
                None => break,
            };
            if next_time > until {
                break;
            }
            let std::cmp::Reverse(event) = self.queue.pop().unwrap();
            let uid = event.user as usize;
            let was_resident = resident[uid];
            let hit = self.process_request(event)?;
            if hit {
                resident[uid] = true;
            } else if was_resident {
                return Ok(false);
            }
        }
        Ok(true)
    }
}
