//! Exact-arithmetic oracles for the evaluation statistics.

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Signed, ToPrimitive, Zero};
use podpreview::evallab::{binomial_two_sided, two_proportion_z};
use proptest::prelude::*;

fn binomials(n: u64) -> Vec<BigUint> {
    let mut row = vec![BigUint::one()];
    for j in 1..=n {
        let prev = row.last().unwrap().clone();
        row.push(prev * BigUint::from(n - j + 1) / BigUint::from(j));
    }
    row
}

/// Sum of C(n, j) over outcomes no more likely than k, divided by 2^n,
/// compared in exact integers.
pub fn binomial_oracle(k: u64, n: u64) -> f64 {
    let row = binomials(n);
    let pk = &row[k as usize];
    let tail: BigUint = row.iter().filter(|c| *c <= pk).sum();
    // both sides are at most 2^n, which fits f64 for n < 1024
    (tail.to_f64().unwrap() / 2f64.powi(n as i32)).min(1.0)
}

/// z from z^2 = (k1 n2 - k2 n1)^2 N / (n1 n2 K (N - K)), evaluated as one
/// exact fraction.
pub fn z_oracle(k1: u64, n1: u64, k2: u64, n2: u64) -> Option<f64> {
    let (n, k) = (n1 + n2, k1 + k2);
    if k == 0 || k == n {
        return None;
    }
    let cross = BigInt::from(k1) * BigInt::from(n2) - BigInt::from(k2) * BigInt::from(n1);
    if cross.is_zero() {
        return Some(0.0);
    }
    let num = &cross * &cross * BigInt::from(n);
    let den = BigInt::from(n1) * BigInt::from(n2) * BigInt::from(k) * BigInt::from(n - k);
    let ratio = num.to_f64().unwrap() / den.to_f64().unwrap();
    let z = ratio.sqrt();
    Some(if cross.is_negative() { -z } else { z })
}

#[test]
fn known_binomial_value() {
    let exact = binomial_oracle(129, 174);
    assert!((exact - 1.3685431744000198e-10).abs() / exact < 1e-12, "{exact}");
    let p = binomial_two_sided(129, 174).unwrap();
    assert!((p - exact).abs() / exact < 1e-9);
    assert!((p - 1.37e-10).abs() / 1.37e-10 < 0.1);
}

#[test]
fn ties_as_trials_value() {
    let exact = binomial_oracle(129, 238);
    assert!((exact - 0.218).abs() < 0.01, "{exact}");
    assert!((binomial_two_sided(129, 238).unwrap() - exact).abs() < 1e-12);
}

#[test]
fn z_spot_value() {
    let z = z_oracle(193, 238, 150, 238).unwrap();
    assert!((z - 4.392371363288128).abs() < 1e-12, "{z}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(400))]

    #[test]
    fn binomial_matches_exact_sum(n in 1u64..300, frac in 0.0f64..=1.0) {
        let k = ((n as f64) * frac).round() as u64;
        let exact = binomial_oracle(k, n);
        let p = binomial_two_sided(k, n).unwrap();
        prop_assert!((p - exact).abs() <= 1e-9 * exact.max(1e-300), "k={} n={} p={} exact={}", k, n, p, exact);
    }

    #[test]
    fn z_matches_exact_fraction(n1 in 1u64..5000, n2 in 1u64..5000, a in 0.0f64..=1.0, b in 0.0f64..=1.0) {
        let k1 = ((n1 as f64) * a).floor() as u64;
        let k2 = ((n2 as f64) * b).floor() as u64;
        let t = two_proportion_z(k1, n1, k2, n2).unwrap();
        match z_oracle(k1, n1, k2, n2) {
            None => prop_assert!(t.degenerate && t.z == 0.0 && t.p == 1.0),
            Some(0.0) => prop_assert_eq!(t.z, 0.0),
            Some(z) => prop_assert!((t.z - z).abs() <= 1e-12 * z.abs(), "{} vs {}", t.z, z),
        }
    }

    #[test]
    fn z_antisymmetry(n1 in 1u64..1000, n2 in 1u64..1000, a in 0.0f64..=1.0, b in 0.0f64..=1.0) {
        let k1 = ((n1 as f64) * a).floor() as u64;
        let k2 = ((n2 as f64) * b).floor() as u64;
        let x = two_proportion_z(k1, n1, k2, n2).unwrap();
        let y = two_proportion_z(k2, n2, k1, n1).unwrap();
        prop_assert_eq!(x.z, -y.z);
        prop_assert_eq!(x.p, y.p);
    }
}
