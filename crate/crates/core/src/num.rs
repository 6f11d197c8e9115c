//! Scalar abstraction for the closed-form probability code.
//!
//! The deposition pmf and the parity tables are plain field arithmetic, so
//! they are written once over [`Probability`] and instantiated either with
//! floats or with exact rationals. The rational instantiation lets the
//! uniform-deposition checks compare for equality without a tolerance.

use std::fmt::Debug;

use num_bigint::BigInt;
use num_rational::{BigRational, Ratio};
use num_traits::{FromPrimitive, Num, ToPrimitive};

/// Field-like scalar used for probabilities and expectations.
pub trait Probability: Num + Clone + PartialOrd + Debug + FromPrimitive + ToPrimitive {
    /// Exact conversion of a (small) count into the scalar.
    fn count(n: u64) -> Self {
        Self::from_u64(n).expect("count representable in scalar type")
    }

    /// `numer / denom` with both given as counts.
    fn ratio(numer: u64, denom: u64) -> Self {
        Self::count(numer) / Self::count(denom)
    }

    fn half() -> Self {
        Self::ratio(1, 2)
    }

    /// Lossy view used by samplers and reporting.
    fn to_f64_lossy(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Probability for f32 {}
impl Probability for f64 {}
impl Probability for Ratio<i64> {}
impl Probability for Ratio<i128> {}
impl Probability for BigRational {}

/// Builds an exact rational from a decimal literal such as `0.7`.
///
/// Goes through the shortest decimal representation of the float, so
/// `exact_decimal(0.7) == 7/10` rather than the binary expansion of 0.7.
pub fn exact_decimal(x: f64) -> Option<BigRational> {
    if !x.is_finite() {
        return None;
    }
    let text = format!("{x}");
    let (int_part, frac_part) = match text.split_once('.') {
        Some((i, f)) => (i, f),
        None => (text.as_str(), ""),
    };
    let digits: BigInt = format!("{int_part}{frac_part}").parse().ok()?;
    let scale = BigInt::from(10u32).pow(frac_part.len() as u32);
    Some(BigRational::new(digits, scale))
}
