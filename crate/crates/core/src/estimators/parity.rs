use std::collections::BTreeMap;

use super::{EstimatorError, SpreadEventSeries};

/// Cells with fewer qualifying events are flagged as low statistics.
pub const DEFAULT_MIN_COUNT: u64 = 50;

/// Fraction of records whose post-event spread is odd.
pub fn odd_fraction(series: &SpreadEventSeries) -> Result<f64, EstimatorError> {
    if series.is_empty() {
        return Err(EstimatorError::EmptySeries);
    }
    let odd = series.records().iter().filter(|r| r.s_post % 2 == 1).count();
    Ok(odd as f64 / series.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParityCell {
    pub s: u32,
    pub n: u64,
    pub odd: u64,
    pub low_statistics: bool,
}

impl ParityCell {
    pub fn freq_odd(&self) -> f64 {
        self.odd as f64 / self.n as f64
    }

    pub fn freq_even(&self) -> f64 {
        1.0 - self.freq_odd()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConditionalParity {
    pub min_count: u64,
    pub cells: BTreeMap<u32, ParityCell>,
}

impl ConditionalParity {
    pub fn total(&self) -> u64 {
        self.cells.values().map(|c| c.n).sum()
    }
}

/// Frequency of an odd post-event spread, per pre-event spread, over
/// spread-reducing events.
pub fn conditional_parity_frequency(
    series: &SpreadEventSeries,
    min_count: u64,
) -> Result<ConditionalParity, EstimatorError> {
    let mut cells: BTreeMap<u32, ParityCell> = BTreeMap::new();
    for r in series.reductions() {
        let c = cells.entry(r.s_pre).or_insert(ParityCell {
            s: r.s_pre,
            n: 0,
            odd: 0,
            low_statistics: false,
        });
        c.n += 1;
        c.odd += u64::from(r.s_post % 2 == 1);
    }
    if cells.is_empty() {
        return Err(EstimatorError::EmptySeries);
    }
    for c in cells.values_mut() {
        c.low_statistics = c.n < min_count;
    }
    Ok(ConditionalParity { min_count, cells })
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeltaSDistribution {
    pub s: u32,
    pub n: u64,
    /// Counts indexed by Δs; entries `1..s`.
    pub counts: BTreeMap<u32, u64>,
}

impl DeltaSDistribution {
    pub fn freq(&self, delta: u32) -> f64 {
        self.counts.get(&delta).copied().unwrap_or(0) as f64 / self.n as f64
    }

    pub fn freqs(&self) -> BTreeMap<u32, f64> {
        self.counts.iter().map(|(&d, &c)| (d, c as f64 / self.n as f64)).collect()
    }
}

/// Histogram of Δs = s_pre − s_post over spread-reducing events at `s`.
pub fn delta_s_distribution(
    series: &SpreadEventSeries,
    s: u32,
) -> Result<DeltaSDistribution, EstimatorError> {
    let mut counts = BTreeMap::new();
    let mut n = 0;
    for r in series.reductions().filter(|r| r.s_pre == s) {
        *counts.entry(r.s_pre - r.s_post).or_insert(0) += 1;
        n += 1;
    }
    if n == 0 {
        return Err(EstimatorError::NoSuchSpread(s));
    }
    Ok(DeltaSDistribution { s, n, counts })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlphaCell {
    pub s: u32,
    pub n: u64,
    pub adjacent: u64,
}

impl AlphaCell {
    pub fn alpha(&self) -> f64 {
        self.adjacent as f64 / self.n as f64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AlphaEstimate {
    pub cells: BTreeMap<u32, AlphaCell>,
}

impl AlphaEstimate {
    /// Count-weighted average over spreads.
    pub fn pooled(&self) -> f64 {
        let (n, a) = self
            .cells
            .values()
            .fold((0u64, 0u64), |(n, a), c| (n + c.n, a + c.adjacent));
        a as f64 / n as f64
    }

    pub fn total(&self) -> u64 {
        self.cells.values().map(|c| c.n).sum()
    }
}

/// Frequency of Δs = 1 among spread-reducing events, per pre-spread s ≥ 3.
pub fn alpha_estimate(series: &SpreadEventSeries) -> Result<AlphaEstimate, EstimatorError> {
    let mut cells: BTreeMap<u32, AlphaCell> = BTreeMap::new();
    for r in series.reductions().filter(|r| r.s_pre >= 3) {
        let c = cells.entry(r.s_pre).or_insert(AlphaCell { s: r.s_pre, n: 0, adjacent: 0 });
        c.n += 1;
        c.adjacent += u64::from(r.s_pre - r.s_post == 1);
    }
    if cells.is_empty() {
        return Err(EstimatorError::EmptySeries);
    }
    Ok(AlphaEstimate { cells })
}

#[cfg(test)]
mod tests {
    use super::super::{SeriesKind, SeriesRecord};
    use super::*;

    fn series(pairs: &[(u32, u32)]) -> SpreadEventSeries {
        let records = pairs
            .iter()
            .enumerate()
            .map(|(t, &(a, b))| SeriesRecord {
                t: t as u64,
                s_pre: a,
                s_post: b,
                kind: SeriesKind::Unknown,
                mid: None,
            })
            .collect();
        SpreadEventSeries::new(records).unwrap()
    }

    #[test]
    fn odd_fraction_counts_post_spreads() {
        let s = series(&[(2, 1), (1, 2), (2, 3)]);
        assert!((odd_fraction(&s).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(odd_fraction(&series(&[(1, 2), (2, 4)])).unwrap(), 0.0);
        assert_eq!(odd_fraction(&series(&[])), Err(EstimatorError::EmptySeries));
    }

    #[test]
    fn forced_transition_from_two() {
        let s = series(&[(2, 1); 10]);
        let cp = conditional_parity_frequency(&s, DEFAULT_MIN_COUNT).unwrap();
        let c = cp.cells[&2];
        assert_eq!(c.freq_odd(), 1.0);
        assert_eq!(c.n, 10);
        assert!(c.low_statistics);
    }

    #[test]
    fn conditional_parity_ignores_increases() {
        let s = series(&[(1, 3), (3, 5)]);
        assert_eq!(
            conditional_parity_frequency(&s, 1),
            Err(EstimatorError::EmptySeries)
        );
    }

    #[test]
    fn delta_s_histogram() {
        let s = series(&[(4, 3), (4, 3), (4, 2), (4, 1), (3, 2)]);
        let d = delta_s_distribution(&s, 4).unwrap();
        assert_eq!(d.freq(1), 0.5);
        assert_eq!(d.freq(2), 0.25);
        assert_eq!(d.freq(3), 0.25);
        assert_eq!(d.freqs().values().sum::<f64>(), 1.0);
        assert_eq!(delta_s_distribution(&s, 7), Err(EstimatorError::NoSuchSpread(7)));
    }

    #[test]
    fn alpha_counts_adjacent_placements() {
        let s = series(&[(4, 3), (4, 3), (4, 2), (4, 3), (2, 1), (2, 1)]);
        let a = alpha_estimate(&s).unwrap();
        assert_eq!(a.cells[&4].alpha(), 0.75);
        assert!(!a.cells.contains_key(&2));
        assert_eq!(a.pooled(), 0.75);
        assert_eq!(alpha_estimate(&series(&[(2, 1)])), Err(EstimatorError::EmptySeries));
    }
}
