//! Closed-form parity transitions and spread-change expectations.
//!
//! A limit order that lands inside a spread `s` at distance `i` from its
//! best quote leaves a new spread `s' = s - i`. Everything here conditions on
//! such an interior placement having happened, which removes any dependence
//! on the placement-range multiplier.

use crate::deposition::{check_alpha, DepositionMechanism};
use crate::error::DomainError;
use crate::num::Probability;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn of(n: u64) -> Parity {
        if n % 2 == 0 {
            Parity::Even
        } else {
            Parity::Odd
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Parity::Even => "even",
            Parity::Odd => "odd",
        }
    }
}

/// Distribution of the parity of `s'` given the pre-event spread `s`.
///
/// Only the row of the parity of `s` is meaningful; the accessors for the
/// other row return `None`.
#[derive(Debug, Clone, PartialEq)]
pub struct ParityTransitionTable<T> {
    pub s: u64,
    pub to_odd: T,
    pub to_even: T,
}

impl<T: Probability> ParityTransitionTable<T> {
    pub fn from_parity(&self) -> Parity {
        Parity::of(self.s)
    }

    /// `P(to | from, s)`; `None` when `from` is not the parity of `s`.
    pub fn prob(&self, to: Parity, from: Parity) -> Option<T> {
        if from != self.from_parity() {
            return None;
        }
        Some(match to {
            Parity::Odd => self.to_odd.clone(),
            Parity::Even => self.to_even.clone(),
        })
    }

    pub fn p_odd_given_odd(&self) -> Option<T> {
        self.prob(Parity::Odd, Parity::Odd)
    }

    pub fn p_even_given_odd(&self) -> Option<T> {
        self.prob(Parity::Even, Parity::Odd)
    }

    pub fn p_odd_given_even(&self) -> Option<T> {
        self.prob(Parity::Odd, Parity::Even)
    }

    pub fn p_even_given_even(&self) -> Option<T> {
        self.prob(Parity::Even, Parity::Even)
    }

    pub fn to_f64(&self) -> ParityTransitionTable<f64> {
        ParityTransitionTable {
            s: self.s,
            to_odd: self.to_odd.to_f64_lossy(),
            to_even: self.to_even.to_f64_lossy(),
        }
    }
}

/// Uniform interior deposition.
///
/// Odd `s`: both parities equally likely. Even `s`: `P(o|e) = s / (2(s-1))`,
/// `P(e|e) = (s-2) / (2(s-1))`.
pub fn uniform_parity<T: Probability>(s: u64) -> Result<ParityTransitionTable<T>, DomainError> {
    if s < 2 {
        return Err(DomainError::new(format!("parity table needs s >= 2, got {s}")));
    }
    let (to_odd, to_even) = if s % 2 == 1 {
        (T::half(), T::half())
    } else {
        (T::ratio(s, 2 * (s - 1)), T::ratio(s - 2, 2 * (s - 1)))
    };
    Ok(ParityTransitionTable { s, to_odd, to_even })
}

/// Piecewise deposition with mass `alpha` next to the best, for `s >= 3`.
pub fn nonuniform_parity<T: Probability>(
    alpha: T,
    s: u64,
) -> Result<ParityTransitionTable<T>, DomainError> {
    if s < 3 {
        return Err(DomainError::new(format!(
            "piecewise deposition is defined for s >= 3, got {s}"
        )));
    }
    check_alpha(&alpha)?;
    let rest = T::one() - alpha.clone();
    let (to_odd, to_even) = if s % 2 == 1 {
        let to_even = alpha + rest.clone() * T::ratio(s - 3, 2 * (s - 2));
        let to_odd = rest * T::ratio(s - 1, 2 * (s - 2));
        (to_odd, to_even)
    } else {
        let half_rest = rest * T::half();
        (alpha + half_rest.clone(), half_rest)
    };
    Ok(ParityTransitionTable { s, to_odd, to_even })
}

/// Parity table for an arbitrary mechanism, by summing `g(i|s)` over the
/// interior distances whose landing spread `s - i` has each parity.
pub fn general_parity<T: Probability>(
    mech: &DepositionMechanism<T>,
    s: u64,
) -> Result<ParityTransitionTable<T>, DomainError> {
    if s < 2 {
        return Err(DomainError::new(format!("parity table needs s >= 2, got {s}")));
    }
    let mut to_odd = T::zero();
    let mut to_even = T::zero();
    for i in 1..s {
        let mass = mech.pmf(s, i)?;
        match Parity::of(s - i) {
            Parity::Odd => to_odd = to_odd + mass,
            Parity::Even => to_even = to_even + mass,
        }
    }
    Ok(ParityTransitionTable { s, to_odd, to_even })
}

/// Parity table used for simulation of a given mechanism: the closed form
/// where it is defined, the pmf sum at `s = 2`.
pub fn parity_table<T: Probability>(
    mech: &DepositionMechanism<T>,
    s: u64,
) -> Result<ParityTransitionTable<T>, DomainError> {
    match mech {
        _ if s == 2 => general_parity(mech, s),
        DepositionMechanism::Uniform => uniform_parity(s),
        DepositionMechanism::NonUniform { alpha } => nonuniform_parity(alpha.clone(), s),
    }
}

/// `<Δs> / s` for an interior limit order, with `Δs = s - s'`.
///
/// Uniform gives exactly one half. Piecewise gives
/// `alpha/s + (1-alpha)(s(s-1) - 2) / (2 s (s-2))` for `s >= 3`. At `s = 2`
/// the only move is `Δs = 1`, so one half for every mechanism.
pub fn mean_relative_spread_change<T: Probability>(
    mech: &DepositionMechanism<T>,
    s: u64,
) -> Result<T, DomainError> {
    if s < 2 {
        return Err(DomainError::new(format!(
            "spread change needs an interior quote (s >= 2), got {s}"
        )));
    }
    if s == 2 {
        return Ok(T::half());
    }
    match mech {
        DepositionMechanism::Uniform => Ok(T::half()),
        DepositionMechanism::NonUniform { alpha } => {
            check_alpha(alpha)?;
            let rest = T::one() - alpha.clone();
            let numer = T::count(s * (s - 1) - 2);
            let denom = T::count(2 * s * (s - 2));
            Ok(alpha.clone() / T::count(s) + rest * numer / denom)
        }
    }
}

/// Largest spread at which piecewise deposition still closes at least half
/// the spread on average: `(alpha + 1) / alpha`.
pub fn coupling_boundary<T: Probability>(alpha: T) -> Result<T, DomainError> {
    check_alpha(&alpha)?;
    Ok((alpha.clone() + T::one()) / alpha)
}
