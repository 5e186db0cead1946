//! Error-probability bounds for a pair of probability assignments with
//! disjoint decision regions, and the free-parameter (`x`) refinement of the
//! lower bounds.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, BoundError, Result};
use crate::exponents::MuTriple;
use crate::numeric::log_sum_exp;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairwiseBounds {
    /// lower bound on `ln P_{e,1}`
    pub log_lower_1: f64,
    /// lower bound on `ln P_{e,2}`
    pub log_lower_2: f64,
    pub log_upper_1: f64,
    pub log_upper_2: f64,
    pub mu: f64,
    pub mu_prime: f64,
    pub mu_second: f64,
}

fn validate(p1: &[f64], p2: &[f64], s: f64) -> Result<()> {
    if p1.len() != p2.len() || p1.is_empty() {
        return Err(invalid("P1/P2", "measures must share a nonempty support space"));
    }
    if !(s > 0.0 && s < 1.0) {
        return Err(invalid("s", format!("{s} outside (0, 1)")));
    }
    if p1.iter().chain(p2).any(|&p| !(p >= 0.0) || !p.is_finite()) {
        return Err(invalid("P1/P2", "entries must be finite and nonnegative"));
    }
    Ok(())
}

/// `μ(s) = ln Σ_y P1(y)^{1-s} P2(y)^s` with its derivatives, which are the
/// mean and variance of `ln(P2/P1)` under the tilted measure `∝ P1^{1-s} P2^s`.
pub fn mu_pair(p1: &[f64], p2: &[f64], s: f64) -> Result<MuTriple> {
    validate(p1, p2, s)?;
    let overlap: Vec<(f64, f64)> = p1
        .iter()
        .zip(p2)
        .filter(|(&a, &b)| a > 0.0 && b > 0.0)
        .map(|(&a, &b)| (a.ln(), b.ln()))
        .collect();
    if overlap.is_empty() {
        return Err(BoundError::DisjointSupport);
    }
    let logs: Vec<f64> = overlap.iter().map(|(l1, l2)| (1.0 - s) * l1 + s * l2).collect();
    let mu = log_sum_exp(logs.iter().copied());
    let w: Vec<f64> = logs.iter().map(|l| (l - mu).exp()).collect();
    let mean: f64 = w.iter().zip(&overlap).map(|(w, (l1, l2))| w * (l2 - l1)).sum();
    let var: f64 = w
        .iter()
        .zip(&overlap)
        .map(|(w, (l1, l2))| w * (l2 - l1 - mean).powi(2))
        .sum();
    Ok(MuTriple { mu0: mu, mu0_prime: mean, mu0_second: var })
}

/// `ln(1/2 - 1/(4x²))`, written as `ln((√2x - 1)(√2x + 1)) - ln(4x²)` so it
/// stays accurate as `x → √2/2`.
pub fn log_prefactor(x: f64) -> Result<f64> {
    let r2x = std::f64::consts::SQRT_2 * x;
    if !(x > std::f64::consts::FRAC_1_SQRT_2 && r2x > 1.0) || !x.is_finite() {
        return Err(invalid("x", format!("{x} must exceed sqrt(2)/2")));
    }
    Ok((r2x - 1.0).ln() + (r2x + 1.0).ln() - (4.0 * x * x).ln())
}

/// `ln(2 - 1/x²)`, the same quantity shifted by `ln 4`.
pub fn log_two_minus_inv_x2(x: f64) -> Result<f64> {
    Ok(log_prefactor(x)? + 4f64.ln())
}

/// Both candidate lower bounds; for any decision regions at least one holds.
pub fn pairwise_lower_bounds(p1: &[f64], p2: &[f64], s: f64, x: f64) -> Result<PairwiseBounds> {
    let pre = log_prefactor(x)?;
    let m = mu_pair(p1, p2, s)?;
    let root = (2.0 * m.mu0_second).sqrt();
    let (u1, u2) = upper_from(&m, s);
    Ok(PairwiseBounds {
        log_lower_1: pre + m.mu0 - s * m.mu0_prime - s * x * root,
        log_lower_2: pre + m.mu0 + (1.0 - s) * m.mu0_prime - (1.0 - s) * x * root,
        log_upper_1: u1,
        log_upper_2: u2,
        mu: m.mu0,
        mu_prime: m.mu0_prime,
        mu_second: m.mu0_second,
    })
}

fn upper_from(m: &MuTriple, s: f64) -> (f64, f64) {
    (m.mu0 - s * m.mu0_prime, m.mu0 + (1.0 - s) * m.mu0_prime)
}

/// Upper bounds achieved by a suitable (likelihood-threshold) choice of regions.
pub fn pairwise_upper_bounds(p1: &[f64], p2: &[f64], s: f64) -> Result<(f64, f64)> {
    let m = mu_pair(p1, p2, s)?;
    Ok(upper_from(&m, s))
}
