use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use super::EvalError;

/// Relative slack when comparing outcome probabilities against the observed one.
const MASS_SLACK: f64 = 1e-12;

fn ln_binomial_pmfs(n: u64) -> Vec<f64> {
    // ln C(n, j) - n ln 2, built incrementally
    let ln2n = n as f64 * std::f64::consts::LN_2;
    let mut out = Vec::with_capacity(n as usize + 1);
    let mut ln_c = 0.0f64;
    out.push(-ln2n);
    for j in 1..=n {
        ln_c += ((n - j + 1) as f64).ln() - (j as f64).ln();
        out.push(ln_c - ln2n);
    }
    out
}

/// Exact two-sided binomial test at p = 0.5: total probability of outcomes no
/// more likely than `k`.
pub fn binomial_two_sided(k: u64, n: u64) -> Result<f64, EvalError> {
    if n == 0 || k > n {
        return Err(EvalError::InvalidCounts(format!("k = {k}, n = {n}")));
    }
    let ln_p = ln_binomial_pmfs(n);
    let cutoff = ln_p[k as usize] + MASS_SLACK.ln_1p();
    let tail: Vec<f64> = ln_p.iter().copied().filter(|lp| *lp <= cutoff).collect();
    let max = tail.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let sum: f64 = tail.iter().map(|lp| (lp - max).exp()).sum();
    Ok((max + sum.ln()).exp().min(1.0))
}

/// Normal approximation to the same test, without continuity correction.
pub fn binomial_two_sided_normal(k: u64, n: u64) -> Result<f64, EvalError> {
    if n == 0 || k > n {
        return Err(EvalError::InvalidCounts(format!("k = {k}, n = {n}")));
    }
    let z = (k as f64 - n as f64 / 2.0) / (n as f64 / 4.0).sqrt();
    Ok(normal_two_sided(z))
}

pub fn normal_two_sided(z: f64) -> f64 {
    erfc(z.abs() / std::f64::consts::SQRT_2).min(1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZTest {
    pub z: f64,
    pub p: f64,
    /// Pooled proportion was 0 or 1; z is reported as 0 and p as 1.
    pub degenerate: bool,
}

/// Pooled two-proportion z-test of `k1/n1` against `k2/n2`, two-sided.
pub fn two_proportion_z(k1: u64, n1: u64, k2: u64, n2: u64) -> Result<ZTest, EvalError> {
    if n1 == 0 || n2 == 0 || k1 > n1 || k2 > n2 {
        return Err(EvalError::InvalidCounts(format!("({k1}/{n1}) vs ({k2}/{n2})")));
    }
    let pooled = (k1 + k2) as f64 / (n1 + n2) as f64;
    if k1 + k2 == 0 || k1 + k2 == n1 + n2 {
        return Ok(ZTest { z: 0.0, p: 1.0, degenerate: true });
    }
    // exact integer numerator keeps near-equal proportions from cancelling
    let cross = k1 as i128 * n2 as i128 - k2 as i128 * n1 as i128;
    let diff = cross as f64 / (n1 as f64 * n2 as f64);
    let se = (pooled * (1.0 - pooled) * (1.0 / n1 as f64 + 1.0 / n2 as f64)).sqrt();
    let z = diff / se;
    Ok(ZTest { z, p: normal_two_sided(z), degenerate: false })
}
