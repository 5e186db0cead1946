//! Valembois–Fossorier sphere-packing bound for finite-input memoryless
//! channels, with the `ln 8` expurgation constant.

use serde::{Deserialize, Serialize};

use crate::channel::{Channel, InputDistribution};
use crate::code::{BoundKind, BoundResult, CodeSpec};
use crate::error::{invalid, BoundError, Result};
use crate::exponents::{optimal_q, s_to_rho};
use crate::numeric::{ln_binomial, log_sum_exp, log_sum_exp_slice};
use crate::sphere::{Engine, Terms};

/// `N·O_1` expurgation constant (the composition count is added separately).
pub const VF_EXPURGATION: f64 = 2.079_441_541_679_835_8; // ln 8

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VfTerms {
    pub rho: f64,
    /// `ln β_{j,k,ρ}`, row-major `K × J` (nodes for continuous outputs)
    pub log_beta: Vec<f64>,
    pub nu1: Vec<f64>,
    pub nu2: Vec<f64>,
    pub q_rho: InputDistribution,
    /// `E_0(ρ, q_ρ)`
    pub e0: f64,
}

impl VfTerms {
    pub fn avg_nu1(&self) -> f64 {
        self.nu1.iter().zip(self.q_rho.probs()).map(|(a, b)| a * b).sum()
    }

    pub fn avg_nu2(&self) -> f64 {
        self.nu2.iter().zip(self.q_rho.probs()).map(|(a, b)| a * b).sum()
    }
}

/// `β`, `ν^(1)`, `ν^(2)` at `ρ` with `q_ρ` the maximiser of `E_0(ρ, ·)`.
pub fn vf_terms(ch: &Channel, rho: f64) -> Result<VfTerms> {
    vf_terms_for(ch, rho, usize::MAX)
}

/// `letters` limits the per-letter pass (the remaining `ν` entries are left
/// empty); symmetric channels under the uniform input need only letter 0.
fn vf_terms_for(ch: &Channel, rho: f64, letters: usize) -> Result<VfTerms> {
    if !(rho >= 0.0) || !rho.is_finite() {
        return Err(invalid("rho", format!("{rho} must be finite and >= 0")));
    }
    let q = optimal_q(ch, rho)?;
    let t = ch.table();
    let (nk, nj) = (t.inputs(), t.outputs());
    let lw = t.log_weights();
    let lq = q.log_probs();
    let a = 1.0 / (1.0 + rho);
    let mut buf = vec![0.0; nk];
    let log_alpha: Vec<f64> = (0..nj)
        .map(|j| {
            for (k, b) in buf.iter_mut().enumerate() {
                let lp = t.log_row(k)[j];
                *b = if lp == f64::NEG_INFINITY { f64::NEG_INFINITY } else { lq[k] + a * lp };
            }
            log_sum_exp_slice(&buf)
        })
        .collect();
    let e0 = -log_sum_exp((0..nj).map(|j| lw[j] + (1.0 + rho) * log_alpha[j]));
    let mut log_beta = vec![f64::NEG_INFINITY; nk * nj];
    let mut nu1 = Vec::with_capacity(nk);
    let mut nu2 = Vec::with_capacity(nk);
    for k in 0..nk.min(letters) {
        let row = t.log_row(k);
        let lb = &mut log_beta[k * nj..(k + 1) * nj];
        for j in 0..nj {
            if row[j] != f64::NEG_INFINITY {
                lb[j] = a * row[j] + rho * log_alpha[j];
                if !lb[j].is_finite() {
                    return Err(BoundError::NonFinite { output: j, input: k });
                }
            }
        }
        // weights of the β-tilted measure on the output space
        let lz = log_sum_exp((0..nj).map(|j| lw[j] + lb[j]));
        let mut m1 = 0.0;
        for j in 0..nj {
            if lb[j] != f64::NEG_INFINITY {
                let w = (lw[j] + lb[j] - lz).exp();
                m1 += w * (lb[j] - row[j]);
            }
        }
        let mut m2c = 0.0;
        for j in 0..nj {
            if lb[j] != f64::NEG_INFINITY {
                let d = lb[j] - row[j] - m1;
                m2c += (lw[j] + lb[j] - lz).exp() * d * d;
            }
        }
        nu1.push(m1);
        nu2.push(m2c.max(0.0));
    }
    Ok(VfTerms { rho, log_beta, nu1, nu2, q_rho: q, e0 })
}

fn engine_terms(ch: &Channel, s: f64) -> Result<Terms> {
    let rho = s_to_rho(s);
    let one = ch.is_symmetric() && (ch.inputs() == 1 || optimal_q(ch, rho)?.min_component() * ch.inputs() as f64 > 1.0 - 1e-14);
    let v = vf_terms_for(ch, rho, if one { 1 } else { usize::MAX })?;
    let (n1, n2) = if one { (v.nu1[0], v.nu2[0]) } else { (v.avg_nu1(), v.avg_nu2()) };
    Ok(Terms { a: -n1 / rho, b: (2.0 * n2).sqrt() / rho, e0: v.e0 })
}

/// `ln C(N+K-1, K-1)`, the number of input compositions of length `N`.
pub fn log_composition_count(n: u64, k: usize) -> f64 {
    ln_binomial(n + k as u64 - 1, k as u64 - 1)
}

/// VF lower bound on `ln P_e`. Asymmetric channels are computed but carry a
/// caveat, since the minimising composition is not established for them.
pub fn vf_bound(ch: &Channel, spec: &CodeSpec) -> Result<BoundResult> {
    let k = ch.inputs();
    if k < 1 {
        return Err(invalid("K", "empty input alphabet"));
    }
    let shift = VF_EXPURGATION + log_composition_count(spec.n, k);
    let eng = Engine::new(|s| engine_terms(ch, s), spec.n_f64(), spec.rate_nats, shift, VF_EXPURGATION)?;
    let mut res = eng.optimise(BoundKind::Vf)?;
    if !ch.is_symmetric() {
        res.diagnostics.caveat =
            Some("asymmetric channel: composition independence of the bound is not established".into());
    }
    Ok(res)
}
