//! Best-quote tapes: parsing, conversion to ticks, and classification of
//! spread changes into market and limit orders from quotes alone.
//!
//! The classifier labels every spread increase a market order and every
//! decrease a limit order. A cancellation that empties a best quote also
//! widens the spread and is therefore labelled a market order.

use std::cmp::Ordering;
use std::io::Read;

use thiserror::Error;

use crate::estimators::{SeriesKind, SeriesRecord, SpreadEventSeries};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TapeError {
    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("line {line}: timestamp `{timestamp}` is earlier than `{previous}`")]
    Ordering { line: usize, timestamp: String, previous: String },
    #[error("line {line}: price {price} is off the tick grid (residual {residual:.3e})")]
    OffGridPrice { line: usize, price: f64, residual: f64 },
    #[error("line {line}: quotes {bid}/{ask} do not give a positive spread in ticks")]
    NonPositiveSpread { line: usize, bid: i64, ask: i64 },
    #[error("invalid tick spec: {0}")]
    TickSpec(String),
    #[error("need at least two quotes, got {0}")]
    EmptySeries(usize),
}

/// Ordering key: numeric when it parses as a number, text otherwise.
#[derive(Debug, Clone, PartialEq)]
pub enum Timestamp {
    Number(f64),
    Text(String),
}

impl Timestamp {
    fn parse(raw: &str) -> Timestamp {
        match raw.parse::<f64>() {
            Ok(v) if v.is_finite() => Timestamp::Number(v),
            _ => Timestamp::Text(raw.to_string()),
        }
    }

    fn compare(&self, other: &Timestamp) -> Option<Ordering> {
        match (self, other) {
            (Timestamp::Number(a), Timestamp::Number(b)) => a.partial_cmp(b),
            (Timestamp::Text(a), Timestamp::Text(b)) => Some(a.cmp(b)),
            _ => None,
        }
    }
}

impl std::fmt::Display for Timestamp {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Timestamp::Number(v) => write!(f, "{v}"),
            Timestamp::Text(s) => f.write_str(s),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuoteRecord {
    /// 1-based line in the input file.
    pub line: usize,
    pub timestamp: Timestamp,
    pub bid: f64,
    pub ask: f64,
    pub day: Option<String>,
}

/// `lenient` skips malformed rows instead of failing; ordering errors are
/// always fatal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct TapeFormat {
    pub lenient: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParsedTape {
    pub records: Vec<QuoteRecord>,
    /// Rows skipped in lenient mode, as (line, reason).
    pub rejected: Vec<(usize, String)>,
}

/// Reads CSV with columns `timestamp` (or `t`), `bid`, `ask` and an
/// optional `day`. Lines starting with `#` are comments.
pub fn parse_tape<R: Read>(input: R, format: TapeFormat) -> Result<ParsedTape, TapeError> {
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(input);
    let headers = rdr
        .headers()
        .map_err(|e| TapeError::Parse { line: 1, reason: e.to_string() })?
        .clone();
    let col = |names: &[&str]| {
        headers.iter().position(|h| names.iter().any(|n| h.eq_ignore_ascii_case(n)))
    };
    let header_line = rdr.position().line().max(1) as usize;
    let need = |names: &[&str]| {
        col(names).ok_or_else(|| TapeError::Parse {
            line: header_line,
            reason: format!("missing column `{}`", names[0]),
        })
    };
    let (cts, cbid, cask) = (need(&["timestamp", "t"])?, need(&["bid"])?, need(&["ask"])?);
    let cday = col(&["day"]);

    let mut records: Vec<QuoteRecord> = Vec::new();
    let mut rejected = Vec::new();
    for row in rdr.records() {
        let parsed = match row {
            Err(e) => Err((e.position().map_or(0, |p| p.line() as usize), e.to_string())),
            Ok(row) => parse_row(&row, cts, cbid, cask, cday),
        };
        let rec = match parsed {
            Ok(rec) => rec,
            Err((line, reason)) if format.lenient => {
                rejected.push((line, reason));
                continue;
            }
            Err((line, reason)) => return Err(TapeError::Parse { line, reason }),
        };
        if let Some(prev) = records.last() {
            match rec.timestamp.compare(&prev.timestamp) {
                Some(Ordering::Less) => {
                    return Err(TapeError::Ordering {
                        line: rec.line,
                        timestamp: rec.timestamp.to_string(),
                        previous: prev.timestamp.to_string(),
                    })
                }
                None => {
                    return Err(TapeError::Parse {
                        line: rec.line,
                        reason: "timestamp type differs from previous rows".into(),
                    })
                }
                _ => {}
            }
        }
        records.push(rec);
    }
    Ok(ParsedTape { records, rejected })
}

fn parse_row(
    row: &csv::StringRecord,
    cts: usize,
    cbid: usize,
    cask: usize,
    cday: Option<usize>,
) -> Result<QuoteRecord, (usize, String)> {
    let line = row.position().map_or(0, |p| p.line() as usize);
    let field = |i: usize| row.get(i).ok_or((line, format!("missing field {}", i + 1)));
    let price = |i: usize, name: &str| -> Result<f64, (usize, String)> {
        let raw = field(i)?;
        match raw.parse::<f64>() {
            Ok(v) if v.is_finite() && v > 0.0 => Ok(v),
            Ok(v) => Err((line, format!("{name} price {v} is not positive"))),
            Err(_) => Err((line, format!("{name} price `{raw}` is not a number"))),
        }
    };
    let ts = field(cts)?;
    if ts.is_empty() {
        return Err((line, "empty timestamp".into()));
    }
    let bid = price(cbid, "bid")?;
    let ask = price(cask, "ask")?;
    if ask <= bid {
        return Err((line, format!("crossed quote: bid {bid} >= ask {ask}")));
    }
    let day = match cday {
        Some(c) => Some(field(c)?.to_string()),
        None => None,
    };
    Ok(QuoteRecord { line, timestamp: Timestamp::parse(ts), bid, ask, day })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TickSpec {
    pub tick_size: f64,
    /// Largest accepted distance from the grid, in price units.
    pub tolerance: f64,
}

impl TickSpec {
    pub fn new(tick_size: f64) -> Result<Self, TapeError> {
        let spec = TickSpec { tick_size, tolerance: 1e-6 };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), TapeError> {
        if !(self.tick_size > 0.0 && self.tick_size.is_finite()) {
            return Err(TapeError::TickSpec(format!("tick size {} must be positive", self.tick_size)));
        }
        if !(self.tolerance >= 0.0 && self.tolerance < self.tick_size / 2.0) {
            return Err(TapeError::TickSpec(format!(
                "tolerance {} must lie in [0, tick/2)",
                self.tolerance
            )));
        }
        Ok(())
    }

    /// Nearest tick index of `price`, if within tolerance.
    pub fn ticks(&self, price: f64) -> Result<i64, f64> {
        let n = (price / self.tick_size).round();
        let residual = price - n * self.tick_size;
        if residual.abs() <= self.tolerance {
            Ok(n as i64)
        } else {
            Err(residual)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TickQuote {
    pub line: usize,
    pub bid: i64,
    pub ask: i64,
    pub day: Option<String>,
}

impl TickQuote {
    pub fn spread(&self) -> i64 {
        self.ask - self.bid
    }
}

fn tick_quote(rec: &QuoteRecord, spec: &TickSpec) -> Result<TickQuote, TapeError> {
    let conv = |price: f64| {
        spec.ticks(price)
            .map_err(|residual| TapeError::OffGridPrice { line: rec.line, price, residual })
    };
    let (bid, ask) = (conv(rec.bid)?, conv(rec.ask)?);
    if ask <= bid {
        return Err(TapeError::NonPositiveSpread { line: rec.line, bid, ask });
    }
    Ok(TickQuote { line: rec.line, bid, ask, day: rec.day.clone() })
}

/// Converts every quote to integer ticks; the first off-grid price is an error.
pub fn to_ticks(records: &[QuoteRecord], spec: &TickSpec) -> Result<Vec<TickQuote>, TapeError> {
    spec.validate()?;
    records.iter().map(|r| tick_quote(r, spec)).collect()
}

/// Like [`to_ticks`] but drops unconvertible rows, returning them separately.
pub fn to_ticks_lenient(
    records: &[QuoteRecord],
    spec: &TickSpec,
) -> Result<(Vec<TickQuote>, Vec<TapeError>), TapeError> {
    spec.validate()?;
    let mut ok = Vec::with_capacity(records.len());
    let mut bad = Vec::new();
    for r in records {
        match tick_quote(r, spec) {
            Ok(q) => ok.push(q),
            Err(e) => bad.push(e),
        }
    }
    Ok((ok, bad))
}

/// One event per consecutive pair of quotes whose spread differs, within a
/// day. `t` is the index of the later quote; `mid` is `bid + ask`.
pub fn classify_events(quotes: &[TickQuote]) -> Result<SpreadEventSeries, TapeError> {
    if quotes.len() < 2 {
        return Err(TapeError::EmptySeries(quotes.len()));
    }
    let mut records = Vec::new();
    for (i, w) in quotes.windows(2).enumerate() {
        let (prev, cur) = (&w[0], &w[1]);
        if prev.day != cur.day {
            continue;
        }
        let (s_pre, s_post) = (prev.spread(), cur.spread());
        let kind = match s_post.cmp(&s_pre) {
            Ordering::Equal => continue,
            Ordering::Greater => SeriesKind::MarketOrder,
            Ordering::Less => SeriesKind::LimitOrder,
        };
        records.push(SeriesRecord {
            t: (i + 1) as u64,
            s_pre: s_pre as u32,
            s_post: s_post as u32,
            kind,
            mid: Some(cur.bid + cur.ask),
        });
    }
    SpreadEventSeries::new(records).map_err(|e| TapeError::Parse { line: 0, reason: e.to_string() })
}
