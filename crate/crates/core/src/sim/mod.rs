//! Event-driven zero-intelligence order book simulation.
//!
//! Each step submits one order: buy or sell with equal probability, market
//! with probability `pi`, otherwise a limit order placed in a range that
//! scales with the current spread. Resting volume is thinned by independent
//! per-unit cancellations. Everything runs in event time.

mod config;
mod engine;
mod trajectory;

use thiserror::Error;

use crate::book::BookError;
use crate::error::DomainError;

pub use config::SimConfig;
pub use engine::{init_book, run, run_replicas, step, Counters, Engine, StepEvents};
pub use trajectory::{Divergence, EventKind, EventRecord, QuoteState, Summary, Trajectory};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("invalid simulation config: {0}")]
    Config(String),
    #[error(transparent)]
    Book(#[from] BookError),
    #[error(transparent)]
    Domain(#[from] DomainError),
}
