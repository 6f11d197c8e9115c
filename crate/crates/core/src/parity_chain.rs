//! Parity-transition Monte Carlo over virtual stocks: i.i.d. spreads with a
//! prescribed mean, one parity transition per spread, odd fraction out.

use std::collections::BTreeMap;
use std::io::{self, Write};

use rand::Rng;
use rand_distr::{Distribution, Geometric, Poisson};
use rayon::prelude::*;
use thiserror::Error;

use crate::analytics::parity_table;
use crate::deposition::DepositionMechanism;
use crate::error::DomainError;
use crate::rng::replica_rng;

/// Fewer surviving transitions than this is an error.
pub const MIN_TRANSITIONS: u64 = 100;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ChainError {
    #[error(transparent)]
    Domain(#[from] DomainError),
    #[error("only {got} transitions after excluding s = 1, need {MIN_TRANSITIONS}")]
    InsufficientSamples { got: u64 },
}

/// Marginal law of the spread sequence, on `{1, 2, ...}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SpreadLaw {
    /// `1 + Geometric(1/mean)` failures.
    #[default]
    Geometric,
    /// `1 + Poisson(mean - 1)`.
    ShiftedPoisson,
}

impl SpreadLaw {
    pub fn label(self) -> &'static str {
        match self {
            SpreadLaw::Geometric => "geometric",
            SpreadLaw::ShiftedPoisson => "poisson",
        }
    }

    pub fn parse(s: &str) -> Option<SpreadLaw> {
        match s.trim().to_ascii_lowercase().as_str() {
            "geometric" => Some(SpreadLaw::Geometric),
            "poisson" | "shifted-poisson" => Some(SpreadLaw::ShiftedPoisson),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VirtualStock {
    pub mean_spread: f64,
    pub n_samples: u64,
    pub mechanism: DepositionMechanism<f64>,
    pub law: SpreadLaw,
}

impl VirtualStock {
    pub fn new(
        mean_spread: f64,
        n_samples: u64,
        mechanism: DepositionMechanism<f64>,
    ) -> Result<Self, DomainError> {
        let stock = VirtualStock { mean_spread, n_samples, mechanism, law: SpreadLaw::Geometric };
        stock.validate()?;
        Ok(stock)
    }

    pub fn with_law(mut self, law: SpreadLaw) -> Self {
        self.law = law;
        self
    }

    pub fn validate(&self) -> Result<(), DomainError> {
        if !(self.mean_spread > 1.0 && self.mean_spread.is_finite()) {
            return Err(DomainError::new(format!(
                "mean spread must be > 1, got {}",
                self.mean_spread
            )));
        }
        if self.n_samples == 0 {
            return Err(DomainError::new("n_samples must be positive"));
        }
        if let Some(&a) = self.mechanism.alpha() {
            crate::deposition::check_alpha(&a)?;
        }
        Ok(())
    }
}

/// Draws `n_samples` i.i.d. spreads from the stock's law.
pub fn sample_spread_sequence<R: Rng + ?Sized>(
    stock: &VirtualStock,
    rng: &mut R,
) -> Result<Vec<u64>, DomainError> {
    stock.validate()?;
    let n = stock.n_samples as usize;
    let bad = |e: String| DomainError::new(format!("spread law: {e}"));
    Ok(match stock.law {
        SpreadLaw::Geometric => {
            let d = Geometric::new(1.0 / stock.mean_spread).map_err(|e| bad(e.to_string()))?;
            (0..n).map(|_| 1 + d.sample(rng)).collect()
        }
        SpreadLaw::ShiftedPoisson => {
            let d = Poisson::new(stock.mean_spread - 1.0).map_err(|e| bad(e.to_string()))?;
            (0..n).map(|_| 1 + d.sample(rng) as u64).collect()
        }
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct TransitionCell {
    pub n: u64,
    pub odd: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChainOutcome {
    pub odd_fraction: f64,
    pub n_transitions: u64,
    /// Samples with `s = 1`, which admit no interior placement.
    pub n_excluded: u64,
    /// Outcome counts per starting spread.
    pub cells: BTreeMap<u64, TransitionCell>,
}

impl ChainOutcome {
    pub fn sigma(&self) -> f64 {
        let p = self.odd_fraction;
        (p * (1.0 - p) / self.n_transitions as f64).sqrt()
    }
}

/// Samples a spread sequence and applies one parity transition per `s >= 2`.
pub fn odd_fraction_after_transition<R: Rng + ?Sized>(
    stock: &VirtualStock,
    rng: &mut R,
) -> Result<ChainOutcome, ChainError> {
    let spreads = sample_spread_sequence(stock, rng)?;
    transition_counts(&stock.mechanism, &spreads, rng)
}

/// Applies one parity transition to each spread of a given sequence.
pub fn transition_counts<R: Rng + ?Sized>(
    mech: &DepositionMechanism<f64>,
    spreads: &[u64],
    rng: &mut R,
) -> Result<ChainOutcome, ChainError> {
    let mut p_odd: Vec<f64> = Vec::new();
    let mut cells: BTreeMap<u64, TransitionCell> = BTreeMap::new();
    let (mut odd, mut n, mut excluded) = (0u64, 0u64, 0u64);
    for &s in spreads {
        if s < 2 {
            excluded += 1;
            continue;
        }
        let idx = s as usize;
        if idx >= p_odd.len() {
            for t in p_odd.len()..=idx {
                let p = if t < 2 { f64::NAN } else { odd_probability(mech, t as u64)? };
                p_odd.push(p);
            }
        }
        let is_odd = rng.random::<f64>() < p_odd[idx];
        let cell = cells.entry(s).or_default();
        cell.n += 1;
        cell.odd += u64::from(is_odd);
        n += 1;
        odd += u64::from(is_odd);
    }
    if n < MIN_TRANSITIONS {
        return Err(ChainError::InsufficientSamples { got: n });
    }
    Ok(ChainOutcome {
        odd_fraction: odd as f64 / n as f64,
        n_transitions: n,
        n_excluded: excluded,
        cells,
    })
}

fn odd_probability(mech: &DepositionMechanism<f64>, s: u64) -> Result<f64, DomainError> {
    let table = parity_table(mech, s)?;
    Ok(table.to_odd)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub mean_spread: f64,
    pub mechanism: DepositionMechanism<f64>,
    pub outcome: ChainOutcome,
}

/// Every (mean, mechanism) pair, rows ordered mean-major. Row `r` draws from
/// stream `r` under `seed`, so rows are independent of thread scheduling.
pub fn parity_sweep(
    means: &[f64],
    mechanisms: &[DepositionMechanism<f64>],
    n_samples: u64,
    law: SpreadLaw,
    seed: u64,
) -> Result<Vec<SweepRow>, ChainError> {
    let jobs: Vec<(f64, DepositionMechanism<f64>)> = means
        .iter()
        .flat_map(|&m| mechanisms.iter().map(move |mech| (m, *mech)))
        .collect();
    jobs.into_par_iter()
        .enumerate()
        .map(|(r, (mean, mech))| {
            let stock = VirtualStock::new(mean, n_samples, mech)?.with_law(law);
            let mut rng = replica_rng(seed, r as u64);
            let outcome = odd_fraction_after_transition(&stock, &mut rng)?;
            Ok(SweepRow { mean_spread: mean, mechanism: mech, outcome })
        })
        .collect()
}

/// `mean_spread,mechanism,alpha,odd_fraction,n_transitions` after the
/// given `#` comment lines. `alpha` is empty for the uniform mechanism.
pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], comments: &[String], mut w: W) -> io::Result<()> {
    for c in comments {
        writeln!(w, "# {c}")?;
    }
    writeln!(w, "mean_spread,mechanism,alpha,odd_fraction,n_transitions")?;
    for row in rows {
        let alpha = row.mechanism.alpha().map(|a| a.to_string()).unwrap_or_default();
        writeln!(
            w,
            "{},{},{},{:.6},{}",
            row.mean_spread,
            row.mechanism.label(),
            alpha,
            row.outcome.odd_fraction,
            row.outcome.n_transitions
        )?;
    }
    Ok(())
}
