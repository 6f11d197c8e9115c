#![allow(dead_code)]

use statrs::distribution::{ChiSquared, ContinuousCDF};

/// Pearson chi-square p-value of `observed` counts against `probs`.
pub fn chi_square_p(observed: &[u64], probs: &[f64]) -> f64 {
    assert_eq!(observed.len(), probs.len());
    let n: u64 = observed.iter().sum();
    let stat: f64 = observed
        .iter()
        .zip(probs)
        .map(|(&o, &p)| {
            let e = p * n as f64;
            (o as f64 - e).powi(2) / e
        })
        .sum();
    ChiSquared::new((observed.len() - 1) as f64).unwrap().sf(stat)
}

pub fn binomial_sigma(p: f64, n: u64) -> f64 {
    (p * (1.0 - p) / n as f64).sqrt()
}
