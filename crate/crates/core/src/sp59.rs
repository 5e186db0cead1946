//! Shannon's 1959 sphere-packing bound for equal-energy signals on the AWGN
//! channel, evaluated in the log domain.
//!
//! A code of `M = e^{nR}` equal-energy points on the sphere in `R^n` has some
//! decision region no larger (in solid angle) than a circular cone of
//! half-angle `θ` with `Ω(θ)/Ω(π) = 1/M`; the error probability is at least the
//! probability that noise carries the transmitted point out of that cone.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::code::{BoundKind, BoundParams, BoundResult, Diagnostics};
use crate::error::{invalid, Result};
use crate::numeric::{brent_root, ln_gamma, log1m_exp, log_integrate_unimodal, log_ndtr};

const ANGLE_REL_TOL: f64 = 1e-12;
const THETA_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConeGeometry {
    pub half_angle_theta: f64,
    pub n: u64,
    /// `ln(Ω_n(θ)/Ω_n(π))`
    pub log_solid_angle_fraction: f64,
}

fn check_n(n: u64) -> Result<f64> {
    if n < 2 {
        return Err(invalid("n", format!("{n} dimensions; need at least 2")));
    }
    Ok(n as f64)
}

/// `ln ∫_0^π sin^{n-2}φ dφ = ln(√π Γ((n-1)/2) / Γ(n/2))`.
fn log_full_angle(n: f64) -> f64 {
    0.5 * PI.ln() + ln_gamma(0.5 * (n - 1.0)) - ln_gamma(0.5 * n)
}

fn log_partial_angle(n: f64, theta: f64) -> f64 {
    if n == 2.0 {
        return theta.ln();
    }
    log_integrate_unimodal(|p| (n - 2.0) * p.sin().ln(), 0.0, theta, ANGLE_REL_TOL)
}

/// `ln(Ω_n(θ)/Ω_n(π))` for `0 < θ <= π`. Angles past `π/2` go through the
/// complement so the fraction keeps full relative accuracy near 1.
pub fn log_solid_angle_fraction(n: u64, theta: f64) -> Result<f64> {
    let nf = check_n(n)?;
    if !(theta > 0.0 && theta <= PI) {
        return Err(invalid("theta", format!("{theta} outside (0, pi]")));
    }
    if theta == PI {
        return Ok(0.0);
    }
    let full = log_full_angle(nf);
    if theta <= FRAC_PI_2 {
        Ok(log_partial_angle(nf, theta) - full)
    } else {
        Ok(log1m_exp(log_partial_angle(nf, PI - theta) - full))
    }
}

/// Half-angle of the cone holding a `e^{-nR}` share of the sphere.
pub fn cone_half_angle(n: u64, rate_nats: f64) -> Result<ConeGeometry> {
    check_n(n)?;
    if !(rate_nats >= 0.0) || !rate_nats.is_finite() {
        return Err(invalid("R", format!("rate {rate_nats} must be finite and >= 0")));
    }
    if rate_nats == 0.0 {
        return Ok(ConeGeometry { half_angle_theta: PI, n, log_solid_angle_fraction: 0.0 });
    }
    let target = -(n as f64) * rate_nats;
    let f = |t: f64| log_solid_angle_fraction(n, t).map(|v| v - target).unwrap_or(f64::NAN);
    if f(THETA_FLOOR) >= 0.0 {
        return Err(invalid("R", format!("rate {rate_nats} puts the cone angle below {THETA_FLOOR:e}")));
    }
    let r = brent_root(f, THETA_FLOOR, PI, 1e-15, 300)?.root;
    Ok(ConeGeometry { half_angle_theta: r, n, log_solid_angle_fraction: log_solid_angle_fraction(n, r)? })
}

/// `ln P(noise carries the signal out of the cone of half-angle θ)` for a
/// signal at distance `√(n·2Es/N0)` noise standard deviations from the origin.
///
/// With `z_1` the noise along the signal axis and `r = |z_⊥| ~ χ_{n-1}` the
/// orthogonal part, escape means `√n A + z_1 < r cot θ`, so the probability is
/// `E[Φ(r cot θ - √n A)]`, a log-concave integral in `r`.
pub fn log_cone_escape(n: u64, theta: f64, es_over_n0: f64) -> Result<f64> {
    let nf = check_n(n)?;
    if !(theta > 0.0 && theta <= PI) {
        return Err(invalid("theta", format!("{theta} outside (0, pi]")));
    }
    if !(es_over_n0 >= 0.0) || !es_over_n0.is_finite() {
        return Err(invalid("Es/N0", format!("{es_over_n0} must be finite and >= 0")));
    }
    let a = (2.0 * nf * es_over_n0).sqrt();
    if theta == PI {
        return Ok(0.0);
    }
    let c = theta.cos() / theta.sin();
    let k = nf - 1.0;
    let log_norm = -(0.5 * k - 1.0) * 2f64.ln() - ln_gamma(0.5 * k);
    let logf = |r: f64| {
        let chi = if k == 1.0 { -0.5 * r * r } else { (k - 1.0) * r.ln() - 0.5 * r * r };
        log_norm + chi + log_ndtr(r * c - a)
    };
    let hi = k.sqrt() + c.abs() * (a + 1.0) + 40.0;
    let v = log_integrate_unimodal(logf, 0.0, hi, 1e-12);
    if !v.is_finite() {
        return Err(crate::error::BoundError::Numeric(format!("cone escape integral is {v} at n = {n}")));
    }
    Ok(v.min(0.0))
}

/// SP59 lower bound on `ln P_e` for `n` real dimensions, rate `R` nats per
/// dimension and per-dimension `Es/N0`.
pub fn sp59_bound(n: u64, rate_nats: f64, es_over_n0: f64) -> Result<BoundResult> {
    let g = cone_half_angle(n, rate_nats)?;
    let log_pe = log_cone_escape(n, g.half_angle_theta, es_over_n0)?;
    Ok(BoundResult {
        kind: BoundKind::Sp59,
        log_pe,
        vacuous: None,
        params: BoundParams { theta: Some(g.half_angle_theta), ..Default::default() },
        diagnostics: Diagnostics::default(),
    })
}
