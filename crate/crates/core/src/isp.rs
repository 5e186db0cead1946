//! Improved sphere-packing bound for memoryless channels whose optimal tilted
//! input distribution `q_s` has full support for every `0 < s < 1`.

use serde::{Deserialize, Serialize};

use crate::channel::Channel;
use crate::code::{BoundKind, BoundResult, CodeSpec};
use crate::error::{invalid, BoundError, Result};
use crate::exponents::{mu0_and_e0, optimal_q, s_to_rho, SUPPORT_FLOOR};
use crate::sphere::{Engine, Terms};

const SUPPORT_GRID: usize = 99;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SupportReport {
    pub passed: bool,
    /// smallest component of `q_s` over the grid
    pub min_component: f64,
    /// grid point attaining it
    pub worst_s: f64,
}

/// Evaluates `q_s` on `s = 0.01, ..., 0.99`.
pub fn support_condition(ch: &Channel) -> Result<SupportReport> {
    let k = ch.inputs() as f64;
    if ch.is_symmetric() {
        return Ok(SupportReport { passed: true, min_component: 1.0 / k, worst_s: 0.5 });
    }
    let mut rep = SupportReport { passed: true, min_component: f64::INFINITY, worst_s: 0.0 };
    for i in 1..=SUPPORT_GRID {
        let s = i as f64 / (SUPPORT_GRID + 1) as f64;
        let m = optimal_q(ch, s_to_rho(s))?.min_component();
        if m < rep.min_component {
            rep.min_component = m;
            rep.worst_s = s;
        }
    }
    rep.passed = rep.min_component > SUPPORT_FLOOR;
    Ok(rep)
}

/// `(N·O_1, N·O_2)` constants for expurgation fraction `α`, before the
/// `-ln(2 - 1/x²)` correction: `ln 4 + ln(1/α)` and `ln 4 + ln(1/(1-α))`.
pub fn expurgation_shifts(alpha: f64) -> Result<(f64, f64)> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(invalid("alpha", format!("{alpha} outside (0, 1)")));
    }
    let l4 = 4f64.ln();
    Ok((l4 - alpha.ln(), l4 - (-alpha).ln_1p()))
}

pub(crate) fn isp_terms(ch: &Channel, s: f64) -> Result<Terms> {
    let rho = s_to_rho(s);
    let q = optimal_q(ch, rho)?;
    let (m, e) = mu0_and_e0(ch, s, &q)?;
    debug_assert!(
        (m.mu0 + (1.0 - s) * e).abs() < 1e-8 * (1.0 + e.abs()),
        "mu0 = {} but -(1-s)E0 = {} at s = {s}",
        m.mu0,
        -(1.0 - s) * e
    );
    Ok(Terms {
        a: -m.mu0 - (1.0 - s) * m.mu0_prime,
        b: (1.0 - s) * (2.0 * m.mu0_second).sqrt(),
        e0: e,
    })
}

fn require_support(ch: &Channel) -> Result<()> {
    let rep = support_condition(ch)?;
    if !rep.passed {
        return Err(BoundError::SupportCondition { s: rep.worst_s, min_component: rep.min_component });
    }
    Ok(())
}

fn engine<'a>(ch: &'a Channel, spec: &CodeSpec) -> Result<Engine<impl FnMut(f64) -> Result<Terms> + 'a>> {
    let (r1, r2) = expurgation_shifts(spec.expurgation_alpha)?;
    Engine::new(move |s| isp_terms(ch, s), spec.n_f64(), spec.rate_nats, r1, r2)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RhoX {
    pub s: f64,
    pub rho: f64,
    pub residual: f64,
}

/// Solves the implicit equation for `ρ_x` at a fixed `x`.
pub fn isp_rho_x(ch: &Channel, spec: &CodeSpec, x: f64) -> Result<RhoX> {
    require_support(ch)?;
    let mut eng = engine(ch, spec)?;
    match eng.solve_x(x)? {
        Some(sol) => Ok(RhoX { s: sol.s, rho: s_to_rho(sol.s), residual: sol.residual }),
        None => Err(BoundError::NoRoot(format!("no sign change for x = {x}"))),
    }
}

/// Lower bound on `ln P_e` for any code of length `N` and rate `R` (after
/// expurgation with fraction `α`). Refuses channels failing the support
/// condition; the VF bound covers those.
pub fn isp_bound(ch: &Channel, spec: &CodeSpec) -> Result<BoundResult> {
    require_support(ch)?;
    engine(ch, spec)?.optimise(BoundKind::Isp)
}
