//! Closed-form parity tables and spread-change moments against brute-force
//! enumeration of interior placements, using a pmf written out here
//! independently of the library.

use num_rational::{BigRational, Rational64};
use num_traits::{One, Zero};
use spreadlab::analytics::{
    coupling_boundary, general_parity, mean_relative_spread_change, nonuniform_parity,
    uniform_parity, Parity, ParityTransitionTable,
};
use spreadlab::deposition::DepositionMechanism;
use spreadlab::ExactMechanism;

fn r(n: i64, d: i64) -> Rational64 {
    Rational64::new(n, d)
}

/// `g(i|s)` with `alpha = None` for uniform placement.
fn oracle_pmf(alpha: Option<Rational64>, s: i64, i: i64) -> Rational64 {
    match alpha {
        None => r(1, s - 1),
        Some(_) if s == 2 => Rational64::one(),
        Some(a) if i == 1 => a,
        Some(a) => (Rational64::one() - a) / r(s - 2, 1),
    }
}

/// (P(odd s'), P(even s')) with s' = s - i.
fn oracle_parity(alpha: Option<Rational64>, s: i64) -> (Rational64, Rational64) {
    let mut odd = Rational64::zero();
    let mut even = Rational64::zero();
    for i in 1..s {
        let g = oracle_pmf(alpha, s, i);
        if (s - i) % 2 == 1 {
            odd += g;
        } else {
            even += g;
        }
    }
    (odd, even)
}

fn live_row<T: spreadlab::num::Probability>(t: &ParityTransitionTable<T>) -> (T, T) {
    let from = t.from_parity();
    (t.prob(Parity::Odd, from).unwrap(), t.prob(Parity::Even, from).unwrap())
}

fn alphas() -> impl Iterator<Item = Rational64> {
    (1..20).map(|k| r(k, 20))
}

#[test]
fn uniform_closed_form_is_exact() {
    for s in 2..=500 {
        let closed = uniform_parity::<Rational64>(s as u64).unwrap();
        assert_eq!(live_row(&closed), oracle_parity(None, s), "s={s}");
        let general = general_parity(&ExactMechanism::Uniform, s as u64).unwrap();
        assert_eq!(live_row(&general), oracle_parity(None, s), "s={s}");
    }
}

#[test]
fn nonuniform_closed_form_exact_and_float() {
    for a in alphas() {
        for s in 3..=500i64 {
            let oracle = oracle_parity(Some(a), s);
            let exact = nonuniform_parity(a, s as u64).unwrap();
            assert_eq!(live_row(&exact), oracle, "alpha={a} s={s}");
            let af = *a.numer() as f64 / *a.denom() as f64;
            let float = nonuniform_parity(af, s as u64).unwrap();
            let (o, e) = live_row(&float);
            let to_f = |x: Rational64| *x.numer() as f64 / *x.denom() as f64;
            assert!((o - to_f(oracle.0)).abs() <= 1e-12 && (e - to_f(oracle.1)).abs() <= 1e-12);
            assert!((o + e - 1.0).abs() <= 1e-12);
        }
    }
}

#[test]
fn reduction_to_uniform() {
    for s in 3..=500i64 {
        let exact = nonuniform_parity(r(1, s - 1), s as u64).unwrap();
        assert_eq!(live_row(&exact), live_row(&uniform_parity::<Rational64>(s as u64).unwrap()));
        let float = nonuniform_parity(1.0 / (s - 1) as f64, s as u64).unwrap();
        let u = uniform_parity::<f64>(s as u64).unwrap();
        assert!((float.to_odd - u.to_odd).abs() <= 1e-12, "s={s}");
        assert!((float.to_even - u.to_even).abs() <= 1e-12, "s={s}");
    }
}

#[test]
fn uniform_tends_to_half_monotonically_for_even_spreads() {
    let mut prev = f64::INFINITY;
    for s in (2..=500u64).step_by(2) {
        let p = uniform_parity::<f64>(s).unwrap().p_odd_given_even().unwrap();
        assert!(p < prev && p > 0.5);
        prev = p;
    }
    assert!((prev - 0.5 - 1.0 / 998.0).abs() < 1e-15);
}

#[test]
fn nonuniform_even_row_is_constant() {
    for a in alphas() {
        let half_rest = (Rational64::one() - a) / r(2, 1);
        for s in (4..=500u64).step_by(2) {
            let t = nonuniform_parity(a, s).unwrap();
            assert_eq!(t.p_odd_given_even(), Some(a + half_rest));
            assert_eq!(t.p_even_given_even(), Some(half_rest));
        }
    }
}

#[test]
fn mean_relative_change_matches_enumeration() {
    for a in alphas() {
        for s in 3..=500i64 {
            let brute: Rational64 = (1..s).map(|i| r(i, 1) * oracle_pmf(Some(a), s, i)).sum::<Rational64>() / r(s, 1);
            let mech = ExactMechanism::non_uniform(a).unwrap();
            assert_eq!(mean_relative_spread_change(&mech, s as u64).unwrap(), brute, "alpha={a} s={s}");
            let af = *a.numer() as f64 / *a.denom() as f64;
            let float = mean_relative_spread_change(&DepositionMechanism::non_uniform(af).unwrap(), s as u64).unwrap();
            assert!((float - *brute.numer() as f64 / *brute.denom() as f64).abs() <= 1e-12);
        }
    }
    for s in 2..=500u64 {
        assert_eq!(mean_relative_spread_change(&ExactMechanism::Uniform, s).unwrap(), r(1, 2));
    }
}

#[test]
fn spot_values() {
    let u4 = uniform_parity::<Rational64>(4).unwrap();
    assert_eq!(u4.p_odd_given_even(), Some(r(2, 3)));
    assert_eq!(u4.p_even_given_even(), Some(r(1, 3)));
    let n5 = nonuniform_parity(r(7, 10), 5).unwrap();
    assert_eq!(n5.p_even_given_odd(), Some(r(4, 5)));
    assert_eq!(n5.p_odd_given_odd(), Some(r(1, 5)));
    assert_eq!(coupling_boundary(r(1, 2)).unwrap(), r(3, 1));
}

#[test]
fn arbitrary_precision_scalar() {
    let a = BigRational::new(7.into(), 10.into());
    let t = nonuniform_parity(a, 5).unwrap();
    assert_eq!(t.p_even_given_odd(), Some(BigRational::new(4.into(), 5.into())));
}
