use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};

use crate::book::{BookError, OrderBook, Side, TickPrice};
use crate::deposition::DepositionMechanism;
use crate::rng::replica_rng;

use super::trajectory::{Divergence, EventKind, EventRecord, QuoteState, Trajectory};
use super::{SimConfig, SimError};

/// Bookkeeping for the corners the model leaves open.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Counters {
    pub steps: u64,
    pub market_orders: u64,
    pub limit_orders: u64,
    /// Limit orders that landed strictly inside the spread.
    pub interior_limit_orders: u64,
    /// Market orders whose side was flipped because the opposite side
    /// held at most one unit.
    pub market_redraws: u64,
    /// Market orders dropped because neither side could absorb one.
    pub market_skipped: u64,
    pub cancelled_units: u64,
    /// Cancellation draws that hit the last unit of a side and were skipped.
    pub protected_units: u64,
    /// Steps in which cancellations moved a best quote.
    pub cancellation_events: u64,
    pub recenterings: u64,
    /// Volume lost off the window edges while recentring.
    pub dropped_volume: u64,
    /// Limit orders whose price fell outside the window or below tick 1.
    pub dropped_orders: u64,
}

/// What one step produced: the order event and, when cancellations moved a
/// best quote afterwards, a separate cancellation event.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepEvents {
    pub order: EventRecord,
    pub cancellation: Option<EventRecord>,
}

/// Book seeded with `initial_depth` unit quotes per side, best bid at
/// `window / 2` and best ask one tick above it.
pub fn init_book(config: &SimConfig) -> Result<OrderBook, SimError> {
    config.validate()?;
    let mut book = OrderBook::new(1, config.window);
    let best_bid = config.window as i64 / 2;
    for d in 0..config.initial_depth as i64 {
        book.apply_limit_order(Side::Buy, TickPrice::new(best_bid - d)?)?;
        book.apply_limit_order(Side::Sell, TickPrice::new(best_bid + 1 + d)?)?;
    }
    Ok(book)
}

fn observe(book: &OrderBook) -> Result<(i64, i64), SimError> {
    let (b, a) = book.best_quotes()?;
    Ok((b.get(), a.get()))
}

fn record(
    book: &OrderBook,
    kind: EventKind,
    side: Side,
    s_pre: u64,
) -> Result<EventRecord, SimError> {
    let (b, a) = observe(book)?;
    Ok(EventRecord {
        t: 0,
        kind,
        side,
        s_pre: s_pre as u32,
        s_post: (a - b) as u32,
        mid: a + b,
        gran_bid: book.granularity(Side::Buy)?.0,
        gran_ask: book.granularity(Side::Sell)?.0,
    })
}

/// Slides the window when the placement range of the next order could
/// leave it.
fn ensure_room(book: &mut OrderBook, config: &SimConfig, counters: &mut Counters) -> Result<(), SimError> {
    let (b, a) = observe(book)?;
    let reach = (config.k * (a - b) as f64).ceil() as i64 + 1;
    let lo = book.origin();
    let hi = lo + book.width() as i64 - 1;
    if b + reach > hi || a - reach < lo {
        let dropped = book.recenter()?;
        counters.recenterings += 1;
        counters.dropped_volume += dropped;
    }
    Ok(())
}

/// Advances the book by one event.
///
/// With probability `pi` a market order on a uniformly chosen side;
/// otherwise a limit order whose candidate quote is uniform over the
/// `ceil(k s)` quotes of its placement range. A candidate inside the spread
/// under non-uniform deposition is re-drawn from `g(i|s)`. Each resting
/// unit is then cancelled with probability `cancel_rate`.
pub fn step<R: Rng + ?Sized>(
    book: &mut OrderBook,
    config: &SimConfig,
    rng: &mut R,
    counters: &mut Counters,
) -> Result<StepEvents, SimError> {
    ensure_room(book, config, counters)?;
    counters.steps += 1;
    let (b, a) = observe(book)?;
    let s = (a - b) as u64;

    let mut side = if rng.random::<bool>() { Side::Buy } else { Side::Sell };
    let order = if rng.random::<f64>() < config.pi {
        counters.market_orders += 1;
        if book.side(side.opposite()).total_volume() <= 1 {
            side = side.opposite();
            counters.market_redraws += 1;
        }
        if book.side(side.opposite()).total_volume() <= 1 {
            counters.market_skipped += 1;
        } else {
            book.apply_market_order(side)?;
        }
        record(book, EventKind::MarketOrder, side, s)?
    } else {
        counters.limit_orders += 1;
        let range = (config.k * s as f64).ceil() as u64;
        let j = rng.random_range(1..=range);
        // distance from the order's own best when it lands inside the spread
        let interior = if j < s {
            counters.interior_limit_orders += 1;
            Some(match &config.mechanism {
                DepositionMechanism::Uniform => s - j,
                mech => mech.sample(s, rng)?,
            })
        } else {
            None
        };
        let price = match (side, interior) {
            (Side::Sell, Some(i)) => a - i as i64,
            (Side::Sell, None) => b + j as i64,
            (Side::Buy, Some(i)) => b + i as i64,
            (Side::Buy, None) => a - j as i64,
        };
        match TickPrice::new(price).map(|p| book.apply_limit_order(side, p)) {
            Ok(Ok(())) => {}
            Ok(Err(BookError::OutOfWindow(_))) | Err(_) => counters.dropped_orders += 1,
            Ok(Err(e)) => return Err(e.into()),
        }
        record(book, EventKind::LimitOrder, side, s)?
    };

    let cancellation = cancel(book, config, rng, counters, &order)?;
    Ok(StepEvents { order, cancellation })
}

fn cancel<R: Rng + ?Sized>(
    book: &mut OrderBook,
    config: &SimConfig,
    rng: &mut R,
    counters: &mut Counters,
    order: &EventRecord,
) -> Result<Option<EventRecord>, SimError> {
    let total = book.total_volume();
    if config.cancel_rate == 0.0 || total == 0 {
        return Ok(None);
    }
    let n = Binomial::new(total, config.cancel_rate)
        .expect("cancel_rate validated in [0, 1)")
        .sample(rng);
    if n == 0 {
        return Ok(None);
    }
    let before = observe(book)?;
    for _ in 0..n {
        let bid_volume = book.bids().total_volume();
        let u = rng.random_range(0..book.total_volume());
        let (side, k) = if u < bid_volume {
            (Side::Buy, u)
        } else {
            (Side::Sell, u - bid_volume)
        };
        let book_side = book.side(side);
        if book_side.total_volume() <= 1 {
            counters.protected_units += 1;
            continue;
        }
        let price = book_side.nth_unit(k).expect("k below side volume");
        book.cancel(side, price)?;
        counters.cancelled_units += 1;
    }
    let after = observe(book)?;
    if after == before {
        return Ok(None);
    }
    counters.cancellation_events += 1;
    let side = if after.1 != before.1 { Side::Sell } else { Side::Buy };
    Ok(Some(record(book, EventKind::Cancellation, side, order.s_post as u64)?))
}

/// A running simulation: book, random stream and counters.
pub struct Engine {
    config: SimConfig,
    book: OrderBook,
    rng: ChaCha8Rng,
    counters: Counters,
}

impl Engine {
    pub fn new(config: SimConfig) -> Result<Self, SimError> {
        let book = init_book(&config)?;
        let rng = replica_rng(config.seed, config.stream);
        Ok(Engine {
            config,
            book,
            rng,
            counters: Counters::default(),
        })
    }

    pub fn book(&self) -> &OrderBook {
        &self.book
    }

    pub fn config(&self) -> &SimConfig {
        &self.config
    }

    pub fn counters(&self) -> &Counters {
        &self.counters
    }

    pub fn step(&mut self) -> Result<StepEvents, SimError> {
        step(&mut self.book, &self.config, &mut self.rng, &mut self.counters)
    }

    fn quotes(&self) -> Result<QuoteState, SimError> {
        let (b, a) = observe(&self.book)?;
        Ok(QuoteState { bid: b, ask: a })
    }

    /// Runs warm-up then `steps` recorded steps. Stops early, with the
    /// divergence flag set, once the spread exceeds the ceiling.
    pub fn run(mut self) -> Result<Trajectory, SimError> {
        let ceiling = self.config.ceiling();
        let total_steps = self.config.warmup + self.config.steps;
        let mut records = Vec::with_capacity(self.config.steps as usize + self.config.steps as usize / 64);
        let mut initial = None;
        let mut divergence = None;
        for n in 0..total_steps {
            if n == self.config.warmup {
                initial = Some(self.quotes()?);
            }
            let events = self.step()?;
            if n >= self.config.warmup {
                for mut rec in std::iter::once(events.order).chain(events.cancellation) {
                    rec.t = records.len() as u64;
                    records.push(rec);
                }
            }
            let s = self.book.spread()?;
            if s > ceiling {
                divergence = Some(Divergence { step: n, spread: s, ceiling });
                break;
            }
        }
        let final_state = self.quotes()?;
        Ok(Trajectory {
            initial: initial.unwrap_or(final_state),
            final_state,
            records,
            divergence,
            counters: self.counters,
            config: self.config,
        })
    }
}

/// Runs one simulation.
pub fn run(config: &SimConfig) -> Result<Trajectory, SimError> {
    Engine::new(config.clone())?.run()
}

/// Runs `replicas` independent copies of `config`, replica `r` on stream
/// `config.stream + r`, in parallel.
pub fn run_replicas(config: &SimConfig, replicas: u64) -> Vec<Result<Trajectory, SimError>> {
    use rayon::prelude::*;
    (0..replicas)
        .into_par_iter()
        .map(|r| {
            let cfg = SimConfig {
                stream: config.stream + r,
                ..config.clone()
            };
            run(&cfg)
        })
        .collect()
}
