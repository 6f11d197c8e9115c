//! Discrete-tick, unit-volume limit order book.
//!
//! Each side keeps a dense array of resting volume over a fixed-width price
//! window plus a Fenwick tree over it, so best and farthest quotes and the
//! k-th resting unit are all `O(log width)`. The window can be slid
//! ([`OrderBook::recenter`]) when the quotes drift towards its edges.

mod fenwick;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use fenwick::Fenwick;

/// Price in ticks. Always `>= 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TickPrice(i64);

impl TickPrice {
    pub fn new(ticks: i64) -> Result<Self, BookError> {
        if ticks >= 1 {
            Ok(TickPrice(ticks))
        } else {
            Err(BookError::InvalidPrice(ticks))
        }
    }

    pub fn get(self) -> i64 {
        self.0
    }
}

impl fmt::Display for TickPrice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Buy,
    Sell,
}

impl Side {
    pub fn opposite(self) -> Side {
        match self {
            Side::Buy => Side::Sell,
            Side::Sell => Side::Buy,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Side::Buy => "buy",
            Side::Sell => "sell",
        }
    }
}

/// Resting volume per tick of occupied span on one side of the book.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Granularity(pub f64);

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BookError {
    #[error("{0:?} side of the book is empty")]
    EmptySide(Side),
    #[error("{side:?} limit order at {price} crosses the opposite best {opposite_best}")]
    CrossingOrder {
        side: Side,
        price: TickPrice,
        opposite_best: TickPrice,
    },
    #[error("price {0} is outside the book window")]
    OutOfWindow(i64),
    #[error("no resting volume at {0}")]
    NoVolume(TickPrice),
    #[error("price {0} is not a positive tick count")]
    InvalidPrice(i64),
}

/// One side of the book over a price window `[origin, origin + width)`.
#[derive(Debug, Clone)]
pub struct BookSide {
    side: Side,
    origin: i64,
    volumes: Vec<u32>,
    tree: Fenwick,
    total: u64,
}

impl BookSide {
    pub fn new(side: Side, origin: i64, width: usize) -> Self {
        BookSide {
            side,
            origin,
            volumes: vec![0; width],
            tree: Fenwick::new(width),
            total: 0,
        }
    }

    pub fn side(&self) -> Side {
        self.side
    }

    pub fn origin(&self) -> i64 {
        self.origin
    }

    pub fn width(&self) -> usize {
        self.volumes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.total == 0
    }

    pub fn total_volume(&self) -> u64 {
        self.total
    }

    fn slot(&self, price: i64) -> Option<usize> {
        let off = price - self.origin;
        (off >= 0 && (off as usize) < self.volumes.len()).then_some(off as usize)
    }

    fn price_at(&self, slot: usize) -> TickPrice {
        TickPrice(self.origin + slot as i64)
    }

    pub fn volume_at(&self, price: TickPrice) -> u32 {
        self.slot(price.0).map_or(0, |i| self.volumes[i])
    }

    pub fn add(&mut self, price: TickPrice, volume: u32) -> Result<(), BookError> {
        let slot = self.slot(price.0).ok_or(BookError::OutOfWindow(price.0))?;
        self.volumes[slot] += volume;
        self.tree.add(slot, volume as i64);
        self.total += volume as u64;
        Ok(())
    }

    pub fn remove_one(&mut self, price: TickPrice) -> Result<(), BookError> {
        let slot = self
            .slot(price.0)
            .filter(|&i| self.volumes[i] > 0)
            .ok_or(BookError::NoVolume(price))?;
        self.volumes[slot] -= 1;
        self.tree.add(slot, -1);
        self.total -= 1;
        Ok(())
    }

    fn lowest(&self) -> Option<TickPrice> {
        (self.total > 0).then(|| self.price_at(self.tree.find(1)))
    }

    fn highest(&self) -> Option<TickPrice> {
        (self.total > 0).then(|| self.price_at(self.tree.find(self.total as i64)))
    }

    /// Highest occupied bid or lowest occupied ask.
    pub fn best(&self) -> Option<TickPrice> {
        match self.side {
            Side::Buy => self.highest(),
            Side::Sell => self.lowest(),
        }
    }

    /// Occupied quote farthest from the best.
    pub fn farthest(&self) -> Option<TickPrice> {
        match self.side {
            Side::Buy => self.lowest(),
            Side::Sell => self.highest(),
        }
    }

    /// Price of the `k`-th resting unit (0-based) in ascending price order.
    pub fn nth_unit(&self, k: u64) -> Option<TickPrice> {
        (k < self.total).then(|| self.price_at(self.tree.find(k as i64 + 1)))
    }

    /// Occupied levels in ascending price order.
    pub fn levels(&self) -> impl Iterator<Item = (TickPrice, u32)> + '_ {
        self.volumes
            .iter()
            .enumerate()
            .filter(|(_, &v)| v > 0)
            .map(|(i, &v)| (self.price_at(i), v))
    }

    /// Total volume over `|best - farthest| + 1` ticks.
    pub fn granularity(&self) -> Result<Granularity, BookError> {
        let (best, far) = self
            .best()
            .zip(self.farthest())
            .ok_or(BookError::EmptySide(self.side))?;
        let span = (best.0 - far.0).unsigned_abs() + 1;
        Ok(Granularity(self.total as f64 / span as f64))
    }

    /// Moves the window to start at `origin`; volume falling outside is
    /// discarded and its amount returned.
    pub fn rebase(&mut self, origin: i64) -> u64 {
        let width = self.volumes.len();
        let mut next = vec![0u32; width];
        let mut dropped = 0u64;
        for (i, &v) in self.volumes.iter().enumerate() {
            if v == 0 {
                continue;
            }
            let price = self.origin + i as i64;
            let off = price - origin;
            if off >= 0 && (off as usize) < width {
                next[off as usize] = v;
            } else {
                dropped += v as u64;
            }
        }
        self.origin = origin;
        self.tree = Fenwick::from_counts(&next);
        self.volumes = next;
        self.total -= dropped;
        dropped
    }
}

/// Bid and ask sides sharing one price window.
#[derive(Debug, Clone)]
pub struct OrderBook {
    bids: BookSide,
    asks: BookSide,
}

impl OrderBook {
    /// Empty book over `[origin, origin + width)`; `origin >= 1`.
    pub fn new(origin: i64, width: usize) -> Self {
        let origin = origin.max(1);
        OrderBook {
            bids: BookSide::new(Side::Buy, origin, width),
            asks: BookSide::new(Side::Sell, origin, width),
        }
    }

    /// Book holding the given `(price, volume)` levels, with the window
    /// centred on the quotes.
    pub fn from_levels(
        width: usize,
        bids: &[(i64, u32)],
        asks: &[(i64, u32)],
    ) -> Result<Self, BookError> {
        let prices = bids.iter().chain(asks).map(|&(p, _)| p);
        let (lo, hi) = prices.fold((i64::MAX, i64::MIN), |(lo, hi), p| (lo.min(p), hi.max(p)));
        let origin = if lo > hi { 1 } else { (lo + hi) / 2 - width as i64 / 2 };
        let mut book = OrderBook::new(origin, width);
        for &(p, v) in bids {
            book.bids.add(TickPrice::new(p)?, v)?;
        }
        for &(p, v) in asks {
            book.asks.add(TickPrice::new(p)?, v)?;
        }
        if let (Some(b), Some(a)) = (book.best_bid(), book.best_ask()) {
            if b >= a {
                return Err(BookError::CrossingOrder {
                    side: Side::Buy,
                    price: b,
                    opposite_best: a,
                });
            }
        }
        Ok(book)
    }

    pub fn side(&self, side: Side) -> &BookSide {
        match side {
            Side::Buy => &self.bids,
            Side::Sell => &self.asks,
        }
    }

    fn side_mut(&mut self, side: Side) -> &mut BookSide {
        match side {
            Side::Buy => &mut self.bids,
            Side::Sell => &mut self.asks,
        }
    }

    pub fn bids(&self) -> &BookSide {
        &self.bids
    }

    pub fn asks(&self) -> &BookSide {
        &self.asks
    }

    pub fn origin(&self) -> i64 {
        self.bids.origin
    }

    pub fn width(&self) -> usize {
        self.bids.width()
    }

    pub fn best_bid(&self) -> Option<TickPrice> {
        self.bids.best()
    }

    pub fn best_ask(&self) -> Option<TickPrice> {
        self.asks.best()
    }

    pub fn best_quotes(&self) -> Result<(TickPrice, TickPrice), BookError> {
        let b = self.best_bid().ok_or(BookError::EmptySide(Side::Buy))?;
        let a = self.best_ask().ok_or(BookError::EmptySide(Side::Sell))?;
        Ok((b, a))
    }

    /// `a(t) - b(t)` in ticks.
    pub fn spread(&self) -> Result<u64, BookError> {
        let (b, a) = self.best_quotes()?;
        Ok((a.0 - b.0) as u64)
    }

    /// `a(t) + b(t)`, i.e. the mid-price in half ticks.
    pub fn mid_half_ticks(&self) -> Result<i64, BookError> {
        let (b, a) = self.best_quotes()?;
        Ok(a.0 + b.0)
    }

    pub fn granularity(&self, side: Side) -> Result<Granularity, BookError> {
        self.side(side).granularity()
    }

    pub fn total_volume(&self) -> u64 {
        self.bids.total + self.asks.total
    }

    /// Executes one unit against the opposite best quote and returns the
    /// execution price. A buy consumes the best ask.
    pub fn apply_market_order(&mut self, side: Side) -> Result<TickPrice, BookError> {
        let book_side = self.side_mut(side.opposite());
        let best = book_side.best().ok_or(BookError::EmptySide(side.opposite()))?;
        book_side.remove_one(best)?;
        Ok(best)
    }

    /// Rests one unit at `price`. Sells must sit above the best bid, buys
    /// below the best ask.
    pub fn apply_limit_order(&mut self, side: Side, price: TickPrice) -> Result<(), BookError> {
        let crosses = match side {
            Side::Sell => self.best_bid().filter(|&b| price <= b),
            Side::Buy => self.best_ask().filter(|&a| price >= a),
        };
        if let Some(opposite_best) = crosses {
            return Err(BookError::CrossingOrder {
                side,
                price,
                opposite_best,
            });
        }
        self.side_mut(side).add(price, 1)
    }

    /// Removes one resting unit at `price` on `side`.
    pub fn cancel(&mut self, side: Side, price: TickPrice) -> Result<(), BookError> {
        self.side_mut(side).remove_one(price)
    }

    /// Whether either best quote lies within `margin` ticks of the window edge.
    pub fn near_edge(&self, margin: i64) -> bool {
        let lo = self.origin();
        let hi = lo + self.width() as i64 - 1;
        let low = self.best_bid().or(self.best_ask());
        let high = self.best_ask().or(self.best_bid());
        matches!(low, Some(b) if b.0 - lo < margin) || matches!(high, Some(a) if hi - a.0 < margin)
    }

    /// Slides the window so the mid-price sits at its centre (never below
    /// price 1). Returns the volume that fell off the edges.
    pub fn recenter(&mut self) -> Result<u64, BookError> {
        let mid2 = self.mid_half_ticks()?;
        let origin = (mid2 / 2 - self.width() as i64 / 2).max(1);
        if origin == self.origin() {
            return Ok(0);
        }
        Ok(self.bids.rebase(origin) + self.asks.rebase(origin))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p(v: i64) -> TickPrice {
        TickPrice::new(v).unwrap()
    }

    fn book(bids: &[(i64, u32)], asks: &[(i64, u32)]) -> OrderBook {
        OrderBook::from_levels(200, bids, asks).unwrap()
    }

    #[test]
    fn tick_price_must_be_positive() {
        assert!(TickPrice::new(0).is_err());
        assert_eq!(TickPrice::new(1).unwrap().get(), 1);
    }

    #[test]
    fn spread_examples() {
        assert_eq!(book(&[(100, 1)], &[(101, 1)]).spread().unwrap(), 1);
        assert_eq!(
            book(&[(98, 1), (100, 1)], &[(103, 1), (105, 1)]).spread().unwrap(),
            3
        );
        assert_eq!(
            book(&[(100, 1)], &[]).spread(),
            Err(BookError::EmptySide(Side::Sell))
        );
    }

    #[test]
    fn granularity_examples() {
        let mut side = BookSide::new(Side::Buy, 50, 100);
        assert!(side.granularity().is_err());
        side.add(p(100), 1).unwrap();
        assert_eq!(side.granularity().unwrap(), Granularity(1.0));
        side.add(p(98), 1).unwrap();
        side.add(p(96), 1).unwrap();
        assert!((side.granularity().unwrap().0 - 0.6).abs() < 1e-15);

        let mut ask = BookSide::new(Side::Sell, 50, 100);
        ask.add(p(100), 2).unwrap();
        ask.add(p(99), 2).unwrap();
        assert_eq!(ask.granularity().unwrap(), Granularity(2.0));
    }

    #[test]
    fn market_order_examples() {
        let mut b = book(&[(100, 1)], &[(101, 1), (103, 1)]);
        assert_eq!(b.apply_market_order(Side::Buy).unwrap(), p(101));
        assert_eq!(b.best_ask(), Some(p(103)));
        assert_eq!(b.spread().unwrap(), 3);

        let mut b = book(&[(100, 1)], &[(101, 2)]);
        b.apply_market_order(Side::Buy).unwrap();
        assert_eq!(b.asks().volume_at(p(101)), 1);
        assert_eq!(b.spread().unwrap(), 1);

        let mut b = book(&[], &[(101, 1)]);
        assert_eq!(
            b.apply_market_order(Side::Sell),
            Err(BookError::EmptySide(Side::Buy))
        );
    }

    #[test]
    fn limit_order_examples() {
        let mut b = book(&[(100, 1)], &[(105, 1)]);
        b.apply_limit_order(Side::Sell, p(102)).unwrap();
        assert_eq!(b.best_ask(), Some(p(102)));
        assert_eq!(b.spread().unwrap(), 2);

        let mut b = book(&[(100, 1)], &[(105, 1)]);
        b.apply_limit_order(Side::Sell, p(106)).unwrap();
        assert_eq!(b.spread().unwrap(), 5);
        assert_eq!(b.asks().total_volume(), 2);

        let mut b = book(&[(100, 1)], &[(105, 1)]);
        assert!(matches!(
            b.apply_limit_order(Side::Buy, p(105)),
            Err(BookError::CrossingOrder { .. })
        ));
        assert!(matches!(
            b.apply_limit_order(Side::Sell, p(100)),
            Err(BookError::CrossingOrder { .. })
        ));
    }

    #[test]
    fn from_levels_rejects_crossed_book() {
        assert!(OrderBook::from_levels(200, &[(101, 1)], &[(101, 1)]).is_err());
    }

    #[test]
    fn recenter_keeps_quotes_and_drops_far_volume() {
        let mut b = OrderBook::new(1, 100);
        for px in [5, 90] {
            b.apply_limit_order(Side::Buy, p(px)).unwrap();
        }
        b.apply_limit_order(Side::Sell, p(91)).unwrap();
        assert!(b.near_edge(20));
        assert!(!b.near_edge(5));
        assert_eq!(b.recenter().unwrap(), 1);
        assert_eq!(b.origin(), 40);
        assert_eq!(b.best_quotes().unwrap(), (p(90), p(91)));
        assert_eq!(b.bids().total_volume(), 1);
        assert_eq!(b.recenter().unwrap(), 0);

        // the window never slides below price 1
        let mut low = OrderBook::new(1, 100);
        low.apply_limit_order(Side::Buy, p(3)).unwrap();
        low.apply_limit_order(Side::Sell, p(4)).unwrap();
        assert!(low.near_edge(5));
        assert_eq!(low.recenter().unwrap(), 0);
        assert_eq!(low.origin(), 1);
    }

    #[test]
    fn nth_unit_walks_volume() {
        let b = book(&[], &[(101, 2), (104, 1)]);
        let asks = b.asks();
        assert_eq!(asks.nth_unit(0), Some(p(101)));
        assert_eq!(asks.nth_unit(1), Some(p(101)));
        assert_eq!(asks.nth_unit(2), Some(p(104)));
        assert_eq!(asks.nth_unit(3), None);
        assert_eq!(asks.farthest(), Some(p(104)));
        assert_eq!(asks.levels().collect::<Vec<_>>(), vec![(p(101), 2), (p(104), 1)]);
    }

    #[derive(Debug, Clone)]
    enum Op {
        Market(Side),
        Limit(Side, i64),
    }

    fn op() -> impl Strategy<Value = Op> {
        let side = prop_oneof![Just(Side::Buy), Just(Side::Sell)];
        prop_oneof![
            side.clone().prop_map(Op::Market),
            (side, 1i64..12).prop_map(|(s, d)| Op::Limit(s, d)),
        ]
    }

    proptest! {
        #[test]
        fn operations_preserve_book_invariants(ops in proptest::collection::vec(op(), 1..200)) {
            let mut b = book(&[(95, 1), (100, 1)], &[(101, 1), (104, 1)]);
            for op in ops {
                let before = b.spread().ok();
                let vol = b.total_volume();
                match op {
                    Op::Market(side) => {
                        if b.side(side.opposite()).total_volume() <= 1 {
                            continue;
                        }
                        b.apply_market_order(side).unwrap();
                        prop_assert_eq!(b.total_volume(), vol - 1);
                        if let (Some(s0), Ok(s1)) = (before, b.spread()) {
                            prop_assert!(s1 >= s0);
                        }
                    }
                    Op::Limit(side, d) => {
                        let (bid, ask) = b.best_quotes().unwrap();
                        // place relative to the opposite best so it never crosses
                        let price = match side {
                            Side::Sell => bid.get() + d,
                            Side::Buy => ask.get() - d,
                        };
                        let behind = match side {
                            Side::Sell => price >= ask.get(),
                            Side::Buy => price <= bid.get(),
                        };
                        b.apply_limit_order(side, p(price)).unwrap();
                        prop_assert_eq!(b.total_volume(), vol + 1);
                        let s1 = b.spread().unwrap();
                        prop_assert!(s1 <= before.unwrap());
                        if behind {
                            prop_assert_eq!(s1, before.unwrap());
                        }
                    }
                }
                let (bid, ask) = b.best_quotes().unwrap();
                prop_assert!(bid < ask);
            }
        }
    }
}
