//! Zero-intelligence limit order book with configurable placement of
//! limit orders inside the spread, the parity algebra of spread
//! transitions, and estimators for spread event series.
//!
//! The analytic layer ([`deposition`], [`analytics`]) is generic over the
//! probability scalar; the aliases below fix it to `f64` or exact rationals.

pub mod analytics;
pub mod book;
pub mod deposition;
pub mod error;
pub mod estimators;
pub mod num;
pub mod parity_chain;
pub mod rng;
pub mod sim;
pub mod tape;

use num_rational::Rational64;

pub type Mechanism = deposition::DepositionMechanism<f64>;
pub type ExactMechanism = deposition::DepositionMechanism<Rational64>;
pub type ParityTable = analytics::ParityTransitionTable<f64>;
pub type ExactParityTable = analytics::ParityTransitionTable<Rational64>;
