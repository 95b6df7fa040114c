//! Simulator and experiment harness for client-side go-with-the-winner
//! server selection in content delivery.
//!
//! Two engines share one configuration type: a continuous-time web model
//! where users pick among candidate LRU-cached servers by sliding-window
//! hit rate, and a discrete-time video model where servers split bitrate
//! capacity evenly and users pick the first candidate delivering the full
//! unit rate. A metrics layer runs seeded trial batches and parameter
//! sweeps, and the `gwtw` binary drives everything from JSON specs into
//! deterministic CSV output.

pub mod cache;
pub mod config;
pub mod dist;
pub mod error;
pub mod metrics;
pub mod oracle;
pub mod rng;
pub mod spec;
pub mod validate;
pub mod video;
pub mod web;

pub use config::{SimConfig, SpreadPolicy};
pub use error::Error;
pub use metrics::{Model, SweepAxis, TrialOutcome, TrialStatus};
pub use rng::RngStream;
