use std::io::{self, Write};

use crate::book::Side;

use super::engine::Counters;
use super::SimConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EventKind {
    MarketOrder,
    LimitOrder,
    Cancellation,
}

impl EventKind {
    pub fn label(self) -> &'static str {
        match self {
            EventKind::MarketOrder => "market",
            EventKind::LimitOrder => "limit",
            EventKind::Cancellation => "cancel",
        }
    }
}

/// One recorded event. `mid` is `a + b`, the mid-price in half ticks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EventRecord {
    pub t: u64,
    pub kind: EventKind,
    pub side: Side,
    pub s_pre: u32,
    pub s_post: u32,
    pub mid: i64,
    pub gran_bid: f64,
    pub gran_ask: f64,
}

impl EventRecord {
    /// Best bid and ask after the event, in ticks.
    pub fn quotes(&self) -> (i64, i64) {
        let s = self.s_post as i64;
        ((self.mid - s) / 2, (self.mid + s) / 2)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QuoteState {
    pub bid: i64,
    pub ask: i64,
}

/// Set when the spread exceeded the ceiling; the run stopped at `step`
/// (counted from the start of warm-up).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Divergence {
    pub step: u64,
    pub spread: u64,
    pub ceiling: u64,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub config: SimConfig,
    /// Quotes when recording started.
    pub initial: QuoteState,
    pub final_state: QuoteState,
    pub records: Vec<EventRecord>,
    pub divergence: Option<Divergence>,
    pub counters: Counters,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub events: usize,
    pub mean_spread: f64,
    pub odd_fraction: f64,
    pub spread_increases: u64,
    pub cancellation_events: u64,
    /// Cancellation events over all spread-increasing events.
    pub cancellation_at_best_rate: f64,
    pub diverged: bool,
}

impl Trajectory {
    pub fn spreads(&self) -> Vec<u32> {
        self.records.iter().map(|r| r.s_post).collect()
    }

    pub fn mids(&self) -> Vec<i64> {
        self.records.iter().map(|r| r.mid).collect()
    }

    pub fn mean_spread(&self) -> f64 {
        if self.records.is_empty() {
            return f64::NAN;
        }
        self.records.iter().map(|r| r.s_post as f64).sum::<f64>() / self.records.len() as f64
    }

    pub fn summary(&self) -> Summary {
        let n = self.records.len();
        let odd = self.records.iter().filter(|r| r.s_post % 2 == 1).count();
        let increases = self.records.iter().filter(|r| r.s_post > r.s_pre).count() as u64;
        let cancels = self
            .records
            .iter()
            .filter(|r| r.kind == EventKind::Cancellation)
            .count() as u64;
        Summary {
            events: n,
            mean_spread: self.mean_spread(),
            odd_fraction: if n == 0 { f64::NAN } else { odd as f64 / n as f64 },
            spread_increases: increases,
            cancellation_events: cancels,
            cancellation_at_best_rate: if increases == 0 {
                0.0
            } else {
                cancels as f64 / increases as f64
            },
            diverged: self.divergence.is_some(),
        }
    }

    fn write_preamble<W: Write>(&self, w: &mut W, what: &str) -> io::Result<()> {
        writeln!(w, "# {what}")?;
        w.write_all(self.config.describe_comment().as_bytes())?;
        if let Some(d) = self.divergence {
            writeln!(
                w,
                "# divergence: spread {} exceeded ceiling {} at step {}",
                d.spread, d.ceiling, d.step
            )?;
        }
        Ok(())
    }

    /// Event table `t,kind,side,s_pre,s_post,mid,gran_bid,gran_ask`, with
    /// `mid` in half ticks, preceded by `#` comment lines holding the config.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        self.write_preamble(&mut w, "trajectory (mid in half ticks)")?;
        writeln!(w, "t,kind,side,s_pre,s_post,mid,gran_bid,gran_ask")?;
        for r in &self.records {
            writeln!(
                w,
                "{},{},{},{},{},{},{:.6},{:.6}",
                r.t,
                r.kind.label(),
                r.side.label(),
                r.s_pre,
                r.s_post,
                r.mid,
                r.gran_bid,
                r.gran_ask
            )?;
        }
        Ok(())
    }

    /// Best-quote tape `timestamp,bid,ask` in price units: the state when
    /// recording started at timestamp 0, then the state after record `t`
    /// at timestamp `t + 1`.
    pub fn write_quote_tape<W: Write>(&self, mut w: W, tick_size: f64) -> io::Result<()> {
        let decimals = decimals_for(tick_size);
        self.write_preamble(&mut w, &format!("quote tape (tick_size={tick_size})"))?;
        writeln!(w, "timestamp,bid,ask")?;
        let px = |ticks: i64| ticks as f64 * tick_size;
        writeln!(
            w,
            "0,{:.*},{:.*}",
            decimals,
            px(self.initial.bid),
            decimals,
            px(self.initial.ask)
        )?;
        for r in &self.records {
            let (b, a) = r.quotes();
            writeln!(w, "{},{:.*},{:.*}", r.t + 1, decimals, px(b), decimals, px(a))?;
        }
        Ok(())
    }
}

/// Decimal places needed to print multiples of `tick_size` exactly.
fn decimals_for(tick_size: f64) -> usize {
    (0..12)
        .find(|&d| {
            let scaled = tick_size * 10f64.powi(d);
            (scaled - scaled.round()).abs() < 1e-9
        })
        .unwrap_or(12) as usize
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quotes_from_mid_and_spread() {
        let r = EventRecord {
            t: 0,
            kind: EventKind::LimitOrder,
            side: Side::Buy,
            s_pre: 3,
            s_post: 3,
            mid: 203,
            gran_bid: 1.0,
            gran_ask: 1.0,
        };
        assert_eq!(r.quotes(), (100, 103));
    }

    #[test]
    fn tick_decimals() {
        assert_eq!(decimals_for(0.01), 2);
        assert_eq!(decimals_for(1.0), 0);
        assert_eq!(decimals_for(0.05), 2);
        assert_eq!(decimals_for(0.125), 3);
    }
}
