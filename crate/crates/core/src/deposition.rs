//! Where a limit order lands once it falls strictly inside the spread.
//!
//! With spread `s` there are `s - 1` interior quotes. The distance `i` is
//! measured from the order's own best quote (best bid for a buy, best ask
//! for a sell), so an interior placement at distance `i` shrinks the spread
//! by exactly `i`: `s' = s - i`.

use rand::Rng;

use crate::error::DomainError;
use crate::num::Probability;

/// Interior placement profile `g(i | s)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DepositionMechanism<T> {
    /// Every interior quote equally likely.
    Uniform,
    /// Mass `alpha` on the quote adjacent to the best, the rest spread
    /// evenly over the remaining `s - 2` interior quotes.
    NonUniform { alpha: T },
}

impl<T: Probability> DepositionMechanism<T> {
    pub fn uniform() -> Self {
        DepositionMechanism::Uniform
    }

    pub fn non_uniform(alpha: T) -> Result<Self, DomainError> {
        check_alpha(&alpha)?;
        Ok(DepositionMechanism::NonUniform { alpha })
    }

    pub fn alpha(&self) -> Option<&T> {
        match self {
            DepositionMechanism::Uniform => None,
            DepositionMechanism::NonUniform { alpha } => Some(alpha),
        }
    }

    pub fn is_uniform(&self) -> bool {
        matches!(self, DepositionMechanism::Uniform)
    }

    /// `g(i | s)` for `1 <= i <= s - 1`.
    pub fn pmf(&self, s: u64, i: u64) -> Result<T, DomainError> {
        check_spread(s)?;
        if i == 0 || i >= s {
            return Err(DomainError::new(format!(
                "interior distance {i} outside [1, {}] for spread {s}",
                s - 1
            )));
        }
        if s == 2 {
            return Ok(T::one());
        }
        Ok(match self {
            DepositionMechanism::Uniform => T::ratio(1, s - 1),
            DepositionMechanism::NonUniform { alpha } => {
                check_alpha(alpha)?;
                if i == 1 {
                    alpha.clone()
                } else {
                    (T::one() - alpha.clone()) / T::count(s - 2)
                }
            }
        })
    }

    /// Draws an interior distance `i` in `[1, s - 1]` by inverse CDF.
    ///
    /// Consumes exactly one uniform variate per call, including the forced
    /// `s = 2` case, so the stream position never depends on the branch taken.
    pub fn sample<R: Rng + ?Sized>(&self, s: u64, rng: &mut R) -> Result<u64, DomainError> {
        check_spread(s)?;
        let u: f64 = rng.random();
        if s == 2 {
            return Ok(1);
        }
        let interior = (s - 1) as f64;
        let i = match self {
            DepositionMechanism::Uniform => 1 + (u * interior) as u64,
            DepositionMechanism::NonUniform { alpha } => {
                let alpha = alpha.to_f64_lossy();
                if u < alpha {
                    1
                } else {
                    let v = (u - alpha) / (1.0 - alpha);
                    2 + (v * (s - 2) as f64) as u64
                }
            }
        };
        Ok(i.min(s - 1))
    }
}

impl DepositionMechanism<f64> {
    /// Short label used in reports: `uniform` or `nonuniform`.
    pub fn label(&self) -> &'static str {
        match self {
            DepositionMechanism::Uniform => "uniform",
            DepositionMechanism::NonUniform { .. } => "nonuniform",
        }
    }
}

fn check_spread(s: u64) -> Result<(), DomainError> {
    if s < 2 {
        return Err(DomainError::new(format!(
            "spread {s} has no interior quote (need s >= 2)"
        )));
    }
    Ok(())
}

pub(crate) fn check_alpha<T: Probability>(alpha: &T) -> Result<(), DomainError> {
    if *alpha > T::zero() && *alpha < T::one() {
        Ok(())
    } else {
        Err(DomainError::new(format!("alpha {alpha:?} outside (0, 1)")))
    }
}
