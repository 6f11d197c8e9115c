//! Estimators over spread event series, simulated or ingested.

mod acf;
mod io;
mod parity;
mod relaxation;
mod report;

use thiserror::Error;

use crate::sim::{EventKind, Trajectory};

pub use acf::{acf_abs_returns, AbsReturnAcf, ExpFit, FitWindow};
pub use io::{read_series_csv, write_series_csv};
pub use parity::{
    alpha_estimate, conditional_parity_frequency, delta_s_distribution, odd_fraction,
    AlphaCell, AlphaEstimate, ConditionalParity, DeltaSDistribution, ParityCell,
    DEFAULT_MIN_COUNT,
};
pub use relaxation::{relaxation_of, spread_relaxation, RelaxationCurve};
pub use report::{
    write_acf_csv, write_alpha_csv, write_conditional_parity_csv, write_delta_s_csv,
    write_odd_fraction_csv, write_relaxation_csv,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EstimatorError {
    #[error("empty series")]
    EmptySeries,
    #[error("no limit-order events at spread {0}")]
    NoSuchSpread(u32),
    #[error("series too short: {len} values, need more than {needed}")]
    SeriesTooShort { len: usize, needed: usize },
    #[error("absolute returns have zero variance")]
    ZeroVariance,
    #[error("no conditioning events with spread change {0}")]
    NoConditioningEvents(i64),
    #[error("invalid series at record {index}: {reason}")]
    InvalidSeries { index: usize, reason: String },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("parse error at line {line}: {reason}")]
    Parse { line: usize, reason: String },
}

/// Event kind as seen by the quote-only classifier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SeriesKind {
    MarketOrder,
    LimitOrder,
    Unknown,
}

impl SeriesKind {
    pub fn label(self) -> &'static str {
        match self {
            SeriesKind::MarketOrder => "market",
            SeriesKind::LimitOrder => "limit",
            SeriesKind::Unknown => "unknown",
        }
    }

    pub fn parse(s: &str) -> Option<SeriesKind> {
        match s.trim().to_ascii_lowercase().as_str() {
            "market" | "marketorder" | "m" => Some(SeriesKind::MarketOrder),
            "limit" | "limitorder" | "l" => Some(SeriesKind::LimitOrder),
            "unknown" | "cancel" | "cancellation" | "" => Some(SeriesKind::Unknown),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SeriesRecord {
    pub t: u64,
    pub s_pre: u32,
    pub s_post: u32,
    pub kind: SeriesKind,
    /// Mid-price in half ticks, when known.
    pub mid: Option<i64>,
}

/// Validated, time-ordered series of spread events.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SpreadEventSeries {
    records: Vec<SeriesRecord>,
}

impl SpreadEventSeries {
    pub fn new(records: Vec<SeriesRecord>) -> Result<Self, EstimatorError> {
        for (index, r) in records.iter().enumerate() {
            let bad = |reason: String| EstimatorError::InvalidSeries { index, reason };
            if r.s_pre == 0 || r.s_post == 0 {
                return Err(bad("spread must be at least 1".into()));
            }
            if index > 0 && r.t <= records[index - 1].t {
                return Err(bad(format!("t={} does not increase", r.t)));
            }
            match r.kind {
                SeriesKind::LimitOrder if r.s_post >= r.s_pre => {
                    return Err(bad(format!(
                        "limit order with s_pre={} s_post={}",
                        r.s_pre, r.s_post
                    )))
                }
                SeriesKind::MarketOrder if r.s_post <= r.s_pre => {
                    return Err(bad(format!(
                        "market order with s_pre={} s_post={}",
                        r.s_pre, r.s_post
                    )))
                }
                _ => {}
            }
        }
        Ok(SpreadEventSeries { records })
    }

    pub fn records(&self) -> &[SeriesRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Post-event spreads, the observed state sequence.
    pub fn spreads(&self) -> Vec<u32> {
        self.records.iter().map(|r| r.s_post).collect()
    }

    /// Mid-prices, if every record carries one.
    pub fn mids(&self) -> Option<Vec<i64>> {
        self.records.iter().map(|r| r.mid).collect()
    }

    /// Spread-reducing events, i.e. limit orders by the quote-only rule.
    pub(crate) fn reductions(&self) -> impl Iterator<Item = &SeriesRecord> {
        self.records.iter().filter(|r| r.s_post < r.s_pre)
    }
}

impl From<&Trajectory> for SpreadEventSeries {
    /// Keeps every engine record. Kinds whose direction does not match the
    /// classifier contract (cancellations, zero-change events) become `Unknown`.
    fn from(traj: &Trajectory) -> Self {
        let records = traj
            .records
            .iter()
            .map(|r| {
                let kind = match r.kind {
                    EventKind::LimitOrder if r.s_post < r.s_pre => SeriesKind::LimitOrder,
                    EventKind::MarketOrder if r.s_post > r.s_pre => SeriesKind::MarketOrder,
                    _ => SeriesKind::Unknown,
                };
                SeriesRecord {
                    t: r.t,
                    s_pre: r.s_pre,
                    s_post: r.s_post,
                    kind,
                    mid: Some(r.mid),
                }
            })
            .collect();
        SpreadEventSeries { records }
    }
}

/// Binomial standard error of a frequency `p` over `n` trials.
pub fn binomial_sigma(p: f64, n: u64) -> f64 {
    if n == 0 {
        return f64::INFINITY;
    }
    (p * (1.0 - p) / n as f64).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(t: u64, s_pre: u32, s_post: u32, kind: SeriesKind) -> SeriesRecord {
        SeriesRecord { t, s_pre, s_post, kind, mid: None }
    }

    #[test]
    fn rejects_contract_violations() {
        assert!(SpreadEventSeries::new(vec![rec(0, 2, 3, SeriesKind::LimitOrder)]).is_err());
        assert!(SpreadEventSeries::new(vec![rec(0, 3, 2, SeriesKind::MarketOrder)]).is_err());
        assert!(SpreadEventSeries::new(vec![rec(0, 0, 2, SeriesKind::Unknown)]).is_err());
        let regress = vec![rec(5, 3, 2, SeriesKind::LimitOrder), rec(5, 2, 3, SeriesKind::MarketOrder)];
        assert!(matches!(
            SpreadEventSeries::new(regress),
            Err(EstimatorError::InvalidSeries { index: 1, .. })
        ));
    }

    #[test]
    fn accepts_unknown_in_any_direction() {
        let s = SpreadEventSeries::new(vec![
            rec(0, 2, 2, SeriesKind::Unknown),
            rec(3, 2, 5, SeriesKind::Unknown),
        ])
        .unwrap();
        assert_eq!(s.spreads(), vec![2, 5]);
        assert_eq!(s.mids(), None);
    }

    #[test]
    fn kind_labels_round_trip() {
        for k in [SeriesKind::MarketOrder, SeriesKind::LimitOrder, SeriesKind::Unknown] {
            assert_eq!(SeriesKind::parse(k.label()), Some(k));
        }
        assert_eq!(SeriesKind::parse("bogus"), None);
    }
}
