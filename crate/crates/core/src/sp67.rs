//! Classical 1967 sphere-packing bound for discrete memoryless channels.

use crate::channel::{Channel, DiscreteChannel};
use crate::code::{BoundKind, BoundParams, BoundResult, CodeSpec, Diagnostics};
use crate::error::Result;
use crate::exponents::esp;

/// `(O_1, O_2)` at block length `N` for a `K`-input DMC with smallest nonzero
/// transition probability `p_min`.
pub fn sp67_terms(n: u64, k: usize, p_min: f64) -> (f64, f64) {
    let nf = n as f64;
    let l8 = 8f64.ln();
    let o1 = l8 / nf + k as f64 * nf.ln() / nf;
    let o2 = (8.0 / nf).sqrt() * (1.0 - 0.5 * p_min.ln()) + l8 / nf;
    (o1, o2)
}

/// `ln P_e >= -N [E_sp(R - O_1) + O_2]`.
pub fn sp67_bound(ch: &DiscreteChannel, spec: &CodeSpec) -> Result<BoundResult> {
    let (o1, o2) = sp67_terms(spec.n, ch.inputs(), ch.p_min());
    let shifted = spec.rate_nats - o1;
    if shifted <= 0.0 {
        return Ok(BoundResult::vacuous(BoundKind::Sp67, format!("rate after the O_1 shift is {shifted:.3e} <= 0")));
    }
    let wrapped = Channel::Discrete(ch.clone());
    let e = esp(&wrapped, shifted)?;
    if !e.value.is_finite() {
        return Ok(BoundResult::vacuous(BoundKind::Sp67, "sphere-packing exponent diverges at the shifted rate"));
    }
    Ok(BoundResult {
        kind: BoundKind::Sp67,
        log_pe: (-spec.n_f64() * (e.value + o2)).min(0.0),
        vacuous: None,
        params: BoundParams { rho: Some(e.optimizer_rho), ..Default::default() },
        diagnostics: Diagnostics::default(),
    })
}
