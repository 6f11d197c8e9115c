use super::{EstimatorError, SpreadEventSeries};

/// `G(τ|Δ)`: mean spread `τ` events after a jump of `Δ`, minus the mean
/// spread of the whole series. Lags with no data hold `None`.
#[derive(Debug, Clone, PartialEq)]
pub struct RelaxationCurve {
    pub delta: i64,
    pub mean_spread: f64,
    pub values: Vec<Option<f64>>,
    pub counts: Vec<u64>,
}

impl RelaxationCurve {
    pub fn max_lag(&self) -> usize {
        self.values.len() - 1
    }

    /// Number of conditioning events (the count at lag 0).
    pub fn events(&self) -> u64 {
        self.counts[0]
    }

    /// First lag at which `|G|` drops below `threshold`.
    pub fn first_lag_below(&self, threshold: f64) -> Option<usize> {
        self.values
            .iter()
            .position(|v| matches!(v, Some(g) if g.abs() < threshold))
    }
}

/// Relaxation curve over the post-event spread sequence of `series`.
pub fn spread_relaxation(
    series: &SpreadEventSeries,
    delta: i64,
    max_lag: usize,
) -> Result<RelaxationCurve, EstimatorError> {
    relaxation_of(&series.spreads(), delta, max_lag)
}

/// Relaxation curve of a raw spread sequence. Every `t ≥ 1` with
/// `s[t] − s[t−1] = delta` conditions, overlapping windows included.
pub fn relaxation_of(
    spreads: &[u32],
    delta: i64,
    max_lag: usize,
) -> Result<RelaxationCurve, EstimatorError> {
    if delta == 0 {
        return Err(EstimatorError::InvalidArgument("delta must be nonzero".into()));
    }
    if spreads.is_empty() {
        return Err(EstimatorError::EmptySeries);
    }
    let n = spreads.len();
    let mean = spreads.iter().map(|&s| s as f64).sum::<f64>() / n as f64;
    let mut sums = vec![0.0f64; max_lag + 1];
    let mut counts = vec![0u64; max_lag + 1];
    for t in 1..n {
        if spreads[t] as i64 - spreads[t - 1] as i64 != delta {
            continue;
        }
        let reach = max_lag.min(n - 1 - t);
        for tau in 0..=reach {
            sums[tau] += spreads[t + tau] as f64;
            counts[tau] += 1;
        }
    }
    if counts[0] == 0 {
        return Err(EstimatorError::NoConditioningEvents(delta));
    }
    let values = sums
        .iter()
        .zip(&counts)
        .map(|(&s, &c)| (c > 0).then(|| s / c as f64 - mean))
        .collect();
    Ok(RelaxationCurve { delta, mean_spread: mean, values, counts })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hand_computed_five_point_series() {
        let g = relaxation_of(&[2, 4, 3, 3, 2], 2, 5).unwrap();
        assert!((g.mean_spread - 2.8).abs() < 1e-12);
        assert!((g.values[0].unwrap() - 1.2).abs() < 1e-12);
        assert!((g.values[1].unwrap() - 0.2).abs() < 1e-12);
        assert!((g.values[3].unwrap() + 0.8).abs() < 1e-12);
        assert_eq!(g.values[4], None);
        assert_eq!(g.counts, vec![1, 1, 1, 1, 0, 0]);
        assert_eq!(g.first_lag_below(0.5), Some(1));
    }

    #[test]
    fn negative_jumps_and_missing_delta() {
        let g = relaxation_of(&[2, 4, 3, 3, 2], -1, 1).unwrap();
        assert_eq!(g.events(), 2);
        assert_eq!(
            relaxation_of(&[2, 4, 3, 3, 2], 3, 1),
            Err(EstimatorError::NoConditioningEvents(3))
        );
        assert!(relaxation_of(&[2, 4], 0, 1).is_err());
    }
}
