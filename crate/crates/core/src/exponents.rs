//! Gallager's `E_0`, the sphere-packing and random-coding exponents, the
//! tilting measure `f_s`, and the per-letter function `μ_0(s, f_s)` with its
//! first two `s`-derivatives.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::channel::{Channel, InputDistribution, OutputTable};
use crate::error::{invalid, BoundError, Result};
use crate::numeric::{golden_section_min, log_sum_exp, log_sum_exp_slice};

/// Lower clamp for `s`; the upper clamp is `1 - S_CLAMP`.
pub const S_CLAMP: f64 = 1e-6;

const Q_MAX_ITER: usize = 500;
const Q_TOL: f64 = 1e-10;
const RHO_DIVERGENCE: f64 = 1e3;
const LETTER_SPREAD_TOL: f64 = 1e-6;
/// Components of `q_s` below this count as "outside the support".
pub const SUPPORT_FLOOR: f64 = 1e-6;

pub fn clamp_s(s: f64) -> f64 {
    s.clamp(S_CLAMP, 1.0 - S_CLAMP)
}

pub fn rho_to_s(rho: f64) -> f64 {
    rho / (1.0 + rho)
}

pub fn s_to_rho(s: f64) -> f64 {
    s / (1.0 - s)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExponentValue {
    /// nats; `+inf` when the supremum diverges
    pub value: f64,
    pub optimizer_rho: f64,
    pub optimizer_q: InputDistribution,
}

/// `f_s` as log-values on the output table (log-probabilities for a DMC, log
/// densities on quadrature nodes otherwise).
#[derive(Debug, Clone, PartialEq)]
pub struct TiltedMeasure {
    pub log_f: Vec<f64>,
    pub s: f64,
    pub q_s: InputDistribution,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MuTriple {
    pub mu0: f64,
    pub mu0_prime: f64,
    pub mu0_second: f64,
}

fn check_q(table: &OutputTable, q: &InputDistribution) -> Result<()> {
    if q.len() != table.inputs() {
        return Err(invalid("q", format!("{} components for {} inputs", q.len(), table.inputs())));
    }
    Ok(())
}

/// `ln α_j = ln Σ_k q_k P(j|k)^a` for every output node.
fn log_alpha(table: &OutputTable, log_q: &[f64], a: f64) -> Vec<f64> {
    let k = table.inputs();
    let mut out = vec![f64::NEG_INFINITY; table.outputs()];
    let mut buf = vec![0.0; k];
    for (j, o) in out.iter_mut().enumerate() {
        for (i, b) in buf.iter_mut().enumerate() {
            let lp = table.log_row(i)[j];
            *b = if lp == f64::NEG_INFINITY || log_q[i] == f64::NEG_INFINITY {
                f64::NEG_INFINITY
            } else {
                log_q[i] + a * lp
            };
        }
        *o = log_sum_exp_slice(&buf);
    }
    out
}

fn e0_table(table: &OutputTable, rho: f64, log_q: &[f64]) -> f64 {
    let la = log_alpha(table, log_q, 1.0 / (1.0 + rho));
    let lw = table.log_weights();
    -log_sum_exp((0..table.outputs()).map(|j| lw[j] + (1.0 + rho) * la[j]))
}

/// Gallager's `E_0(ρ, q)` in nats, evaluated in the log domain.
pub fn e0(ch: &Channel, rho: f64, q: &InputDistribution) -> Result<f64> {
    if !(rho >= 0.0) || !rho.is_finite() {
        return Err(invalid("rho", format!("{rho} must be finite and >= 0")));
    }
    check_q(ch.table(), q)?;
    Ok(e0_table(ch.table(), rho, &q.log_probs()))
}

/// Per-letter KKT brackets `B_k / F` with
/// `B_k = Σ_j P(j|k)^{1/(1+ρ)} α_j^ρ` and `F = Σ_j α_j^{1+ρ}`.
/// At the optimum every ratio is `>= 1`, with equality where `q_k > 0`.
pub fn kkt_ratios(ch: &Channel, rho: f64, q: &InputDistribution) -> Vec<f64> {
    let t = ch.table();
    kkt_log_ratios(t, rho, &q.log_probs()).into_iter().map(f64::exp).collect()
}

fn kkt_log_ratios(t: &OutputTable, rho: f64, log_q: &[f64]) -> Vec<f64> {
    let a = 1.0 / (1.0 + rho);
    let la = log_alpha(t, log_q, a);
    let lw = t.log_weights();
    let lf = log_sum_exp((0..t.outputs()).map(|j| lw[j] + (1.0 + rho) * la[j]));
    (0..t.inputs())
        .map(|k| {
            let row = t.log_row(k);
            let lb = log_sum_exp((0..t.outputs()).map(|j| {
                if row[j] == f64::NEG_INFINITY {
                    f64::NEG_INFINITY
                } else {
                    lw[j] + a * row[j] + rho * la[j]
                }
            }));
            lb - lf
        })
        .collect()
}

/// Input distribution maximising `E_0(ρ, q)`.
///
/// Symmetric channels return the uniform distribution directly. Otherwise
/// `F(q) = Σ_j α_j^{1+ρ}` (convex in `q`) is minimised over the simplex by an
/// active-set Newton method until the largest KKT violation drops below
/// `1e-10`. Letters whose bracket falls below `F` re-enter the active set;
/// letters driven to zero leave it.
pub fn optimal_q(ch: &Channel, rho: f64) -> Result<InputDistribution> {
    if !(rho >= 0.0) || !rho.is_finite() {
        return Err(invalid("rho", format!("{rho} must be finite and >= 0")));
    }
    let k = ch.inputs();
    if k == 1 || ch.is_symmetric() || rho == 0.0 {
        return Ok(InputDistribution::uniform(k));
    }
    let t = ch.table();
    let mut q = vec![1.0 / k as f64; k];
    let mut residual = f64::INFINITY;
    let logs = |q: &[f64]| q.iter().map(|v| v.ln()).collect::<Vec<f64>>();
    let mut value = e0_table(t, rho, &logs(&q));
    for _ in 0..Q_MAX_ITER {
        let lq = logs(&q);
        let lr = kkt_log_ratios(t, rho, &lq);
        residual = kkt_residual(&lq, &lr);
        if residual < Q_TOL {
            return Ok(InputDistribution::from_unnormalized(q));
        }
        // letters in use, plus unused letters that would gain from mass
        let mut idx: Vec<usize> = (0..k).filter(|&i| q[i] > 0.0 || lr[i] < 0.0).collect();
        let d = loop {
            let d = newton_direction(t, rho, &lq, &lr, &idx)?;
            match idx.iter().zip(&d).position(|(&i, &di)| q[i] == 0.0 && di < 0.0) {
                Some(p) => {
                    idx.remove(p);
                }
                None => break d,
            }
        };
        let mut tau: f64 = 1.0;
        for (&i, &di) in idx.iter().zip(&d) {
            if di < 0.0 {
                tau = tau.min(q[i] / -di);
            }
        }
        let mut next = None;
        for _ in 0..60 {
            let mut cand = q.clone();
            for (&i, &di) in idx.iter().zip(&d) {
                // the letter that limits the step lands exactly on zero
                cand[i] = if di < 0.0 && q[i] + tau * di <= q[i] * 1e-12 { 0.0 } else { q[i] + tau * di };
            }
            let v = normalised_value(t, rho, &mut cand);
            // E_0 is flat at the optimum; tolerate rounding in its log-sum-exp
            if v >= value - 1e-13 * (1.0 + value.abs()) {
                next = Some((cand, v));
                break;
            }
            tau *= 0.5;
        }
        let (cand, v) = match next {
            Some(n) => n,
            None => {
                // multiplicative step q_k (F/B_k)^{1/2}, which never lowers E_0
                let mut cand: Vec<f64> = q.iter().zip(&lr).map(|(qi, r)| qi * (-0.5 * r).exp()).collect();
                let v = normalised_value(t, rho, &mut cand);
                (cand, v)
            }
        };
        q = cand;
        value = v.max(value);
    }
    Err(BoundError::NoConvergence { iterations: Q_MAX_ITER, residual })
}

fn normalised_value(t: &OutputTable, rho: f64, q: &mut [f64]) -> f64 {
    let sum: f64 = q.iter().sum();
    q.iter_mut().for_each(|v| *v /= sum);
    let lq: Vec<f64> = q.iter().map(|v| v.ln()).collect();
    e0_table(t, rho, &lq)
}

/// Newton step for `ln F` restricted to the letters in `idx`, constrained to
/// keep `Σ q` fixed.
fn newton_direction(t: &OutputTable, rho: f64, log_q: &[f64], log_ratio: &[f64], idx: &[usize]) -> Result<Vec<f64>> {
    let m = idx.len();
    let a = 1.0 / (1.0 + rho);
    let la = log_alpha(t, log_q, a);
    let lw = t.log_weights();
    let lf = log_sum_exp((0..t.outputs()).map(|j| lw[j] + (1.0 + rho) * la[j]));
    // gradient and Hessian of F / ((1+ρ)F) at the current point
    let mut h = DMatrix::<f64>::zeros(m + 1, m + 1);
    for j in 0..t.outputs() {
        if la[j] == f64::NEG_INFINITY {
            continue;
        }
        let base = lw[j] + (rho - 1.0) * la[j] - lf;
        for (r, &kr) in idx.iter().enumerate() {
            let pr = t.log_row(kr)[j];
            if pr == f64::NEG_INFINITY {
                continue;
            }
            for (c, &kc) in idx.iter().enumerate().skip(r) {
                let pc = t.log_row(kc)[j];
                if pc == f64::NEG_INFINITY {
                    continue;
                }
                h[(r, c)] += rho * (base + a * (pr + pc)).exp();
            }
        }
    }
    // border scaled to the curvature so the SVD cut-off sees both alike
    let border = (0..m).map(|r| h[(r, r)]).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let mut rhs = DVector::<f64>::zeros(m + 1);
    for r in 0..m {
        for c in 0..r {
            h[(r, c)] = h[(c, r)];
        }
        h[(r, m)] = border;
        h[(m, r)] = border;
        rhs[r] = -log_ratio[idx[r]].exp();
    }
    // minimum-norm solution: moves that leave every α_j unchanged are dropped
    let svd = h.svd(true, true);
    let eps = 1e-14 * svd.singular_values.max();
    let sol = svd.solve(&rhs, eps).map_err(|e| BoundError::Numeric(format!("Newton system: {e}")))?;
    Ok(sol.iter().take(m).copied().collect())
}

fn kkt_residual(log_q: &[f64], log_ratio: &[f64]) -> f64 {
    log_q
        .iter()
        .zip(log_ratio)
        .map(|(&lq, &lr)| {
            let ratio_m1 = lr.exp_m1();
            (lq.exp() * ratio_m1.abs()).max(-ratio_m1)
        })
        .fold(0.0, f64::max)
}

/// `E_0(ρ) = max_q E_0(ρ, q)` together with the maximiser.
pub fn e0_max(ch: &Channel, rho: f64) -> Result<(f64, InputDistribution)> {
    let q = optimal_q(ch, rho)?;
    Ok((e0_table(ch.table(), rho, &q.log_probs()), q))
}

/// Sphere-packing exponent `E_sp(R) = sup_{ρ>=0} E_0(ρ) - ρR`.
pub fn esp(ch: &Channel, rate: f64) -> Result<ExponentValue> {
    if !(rate > 0.0) {
        return Err(invalid("R", format!("rate {rate} must be positive")));
    }
    let obj = |rho: f64| -> Result<f64> { Ok(e0_max(ch, rho)?.0 - rho * rate) };
    // bracket by doubling from ρ = 1
    let mut hi = 1.0;
    let mut g_hi = obj(hi)?;
    loop {
        let g_next = obj(2.0 * hi)?;
        if g_next <= g_hi {
            break;
        }
        if 2.0 * hi > RHO_DIVERGENCE {
            return Ok(ExponentValue {
                value: f64::INFINITY,
                optimizer_rho: f64::INFINITY,
                optimizer_q: optimal_q(ch, 2.0 * hi)?,
            });
        }
        hi *= 2.0;
        g_hi = g_next;
    }
    let upper = 2.0 * hi;
    let mut err = None;
    let (rho, neg, _) = golden_section_min(
        |r| match obj(r) {
            Ok(v) => -v,
            Err(e) => {
                err.get_or_insert(e);
                f64::NAN
            }
        },
        0.0,
        upper,
        1e-11 * upper,
        400,
    );
    if let Some(e) = err {
        return Err(e);
    }
    let (value, rho) = if -neg > 0.0 { (-neg, rho) } else { (0.0, 0.0) };
    Ok(ExponentValue { value, optimizer_rho: rho, optimizer_q: optimal_q(ch, rho)? })
}

/// Gallager random-coding bound `ln P_e <= -N max_{0<=ρ<=1} (E_0(ρ) - ρR)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RandomCodingBound {
    pub exponent: f64,
    pub rho: f64,
    pub log_pe: f64,
}

/// Random-coding exponent `E_r(R)` with its maximising `ρ ∈ [0, 1]`.
pub fn random_coding_exponent(ch: &Channel, rate: f64) -> Result<(f64, f64)> {
    if !(rate > 0.0) {
        return Err(invalid("R", format!("rate {rate} must be positive")));
    }
    let mut err = None;
    let (rho, neg, _) = golden_section_min(
        |r| match e0_max(ch, r) {
            Ok((e, _)) => -(e - r * rate),
            Err(e) => {
                err.get_or_insert(e);
                f64::NAN
            }
        },
        0.0,
        1.0,
        1e-12,
        200,
    );
    if let Some(e) = err {
        return Err(e);
    }
    let at_one = e0_max(ch, 1.0)?.0 - rate;
    let mut best = (-neg, rho);
    if at_one > best.0 {
        best = (at_one, 1.0);
    }
    if best.0 <= 0.0 {
        best = (0.0, 0.0);
    }
    Ok(best)
}

pub fn random_coding_bound(ch: &Channel, n: u64, rate: f64) -> Result<RandomCodingBound> {
    if n < 1 {
        return Err(invalid("N", "block length must be >= 1"));
    }
    let (exponent, rho) = random_coding_exponent(ch, rate)?;
    Ok(RandomCodingBound { exponent, rho, log_pe: -(n as f64) * exponent })
}

/// Per-letter tilted statistics at fixed `s` and input distribution `q`.
#[derive(Debug, Clone)]
pub(crate) struct TiltStats {
    pub log_f: Vec<f64>,
    /// `ln Σ_j α_j^{1/(1-s)}`, equal to `-E_0(s/(1-s), q)`
    pub log_z: f64,
    /// `μ_k(s, f_s)`
    pub mu: Vec<f64>,
    /// `∂_s μ_k(s, f)|_{f = f_s}`: tilted mean of `ln(f_s / P)`
    pub mean: Vec<f64>,
    /// `∂²_s μ_k(s, f)|_{f = f_s}`: tilted variance of `ln(f_s / P)`
    pub var: Vec<f64>,
}

/// `letters` limits the per-letter pass; symmetric channels only need one.
pub(crate) fn tilt_stats(table: &OutputTable, s: f64, log_q: &[f64], letters: usize) -> TiltStats {
    let la = log_alpha(table, log_q, 1.0 - s);
    let lw = table.log_weights();
    let nj = table.outputs();
    let lg: Vec<f64> = la.iter().map(|a| a / (1.0 - s)).collect();
    let lz = log_sum_exp((0..nj).map(|j| lw[j] + lg[j]));
    let log_f: Vec<f64> = lg.iter().map(|g| g - lz).collect();
    let kk = letters.min(table.inputs());
    let mut mu = Vec::with_capacity(kk);
    let mut mean = Vec::with_capacity(kk);
    let mut var = Vec::with_capacity(kk);
    let mut t = vec![0.0; nj];
    for k in 0..kk {
        let row = table.log_row(k);
        for j in 0..nj {
            t[j] = if row[j] == f64::NEG_INFINITY || log_f[j] == f64::NEG_INFINITY {
                f64::NEG_INFINITY
            } else {
                lw[j] + (1.0 - s) * row[j] + s * log_f[j]
            };
        }
        let top = t.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        // t becomes the unnormalised weights
        let mut wsum = 0.0;
        let mut e1 = 0.0;
        for j in 0..nj {
            let w = if t[j] == f64::NEG_INFINITY { 0.0 } else { (t[j] - top).exp() };
            t[j] = w;
            wsum += w;
            if w > 0.0 {
                e1 += w * (log_f[j] - row[j]);
            }
        }
        let mean_k = e1 / wsum;
        let mut e2 = 0.0;
        for j in 0..nj {
            if t[j] > 0.0 {
                let d = log_f[j] - row[j] - mean_k;
                e2 += t[j] * d * d;
            }
        }
        mu.push(top + wsum.ln());
        mean.push(mean_k);
        var.push(e2 / wsum);
    }
    TiltStats { log_f, log_z: lz, mu, mean, var }
}

fn check_s(s: f64) -> Result<f64> {
    if !(s > 0.0 && s < 1.0) {
        return Err(invalid("s", format!("{s} outside (0, 1)")));
    }
    Ok(clamp_s(s))
}

/// The tilting measure `f_s(j) ∝ α_{j,s}^{1/(1-s)}` with `q_s` optimal at
/// `ρ = s/(1-s)`. Fails if `q_s` is not of full support.
pub fn tilted_measure(ch: &Channel, s: f64) -> Result<TiltedMeasure> {
    let s = check_s(s)?;
    let q = optimal_q(ch, s_to_rho(s))?;
    let min = q.min_component();
    if min < SUPPORT_FLOOR {
        return Err(BoundError::SupportCondition { s, min_component: min });
    }
    let st = tilt_stats(ch.table(), s, &q.log_probs(), 0);
    Ok(TiltedMeasure { log_f: st.log_f, s, q_s: q })
}

/// `μ_0(s, f_s)` and its first two derivatives in `s`.
///
/// The derivatives are taken with the tilting measure held fixed at `f_s`
/// (tilted mean and variance of `ln(f_s/P)`), averaged under `q_s`. Because
/// `f_s` is stationary for the `q_s`-average of `μ_k(s, ·)`, the first
/// derivative is also the total derivative of `s ↦ μ_0(s, f_s)`.
pub fn mu0_with_derivatives(ch: &Channel, s: f64) -> Result<MuTriple> {
    let s = check_s(s)?;
    let q = optimal_q(ch, s_to_rho(s))?;
    mu0_for_q(ch, s, &q)
}

pub(crate) fn mu0_for_q(ch: &Channel, s: f64, q: &InputDistribution) -> Result<MuTriple> {
    Ok(mu0_and_e0(ch, s, q)?.0)
}

/// The `μ_0` triple together with `E_0(s/(1-s), q)` from the same pass.
/// Symmetric channels under the uniform input evaluate letter 0 only, since
/// every letter gives the same statistics.
pub(crate) fn mu0_and_e0(ch: &Channel, s: f64, q: &InputDistribution) -> Result<(MuTriple, f64)> {
    let min = q.min_component();
    if min < SUPPORT_FLOOR {
        return Err(BoundError::SupportCondition { s, min_component: min });
    }
    let k = q.len();
    let uniform = q.probs().iter().all(|&p| (p * k as f64 - 1.0).abs() < 1e-14);
    let letters = if ch.is_symmetric() && uniform { 1 } else { k };
    let st = tilt_stats(ch.table(), s, &q.log_probs(), letters);
    let (lo, hi) = st.mu.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &m| (a.min(m), b.max(m)));
    let spread = hi - lo;
    if spread > LETTER_SPREAD_TOL {
        return Err(BoundError::LetterDependence { s, spread });
    }
    let e0 = -st.log_z;
    if letters == 1 {
        let m = MuTriple { mu0: st.mu[0], mu0_prime: st.mean[0], mu0_second: st.var[0].max(0.0) };
        return Ok((m, e0));
    }
    let p = q.probs();
    let avg = |v: &[f64]| v.iter().zip(p).map(|(a, b)| a * b).sum::<f64>();
    Ok((MuTriple { mu0: avg(&st.mu), mu0_prime: avg(&st.mean), mu0_second: avg(&st.var).max(0.0) }, e0))
}

/// `Σ_k q_k μ_k(s, f)` for a tilting measure `f` held fixed (log-values on
/// the output table, as in [`TiltedMeasure::log_f`]).
pub fn mu0_fixed_f(ch: &Channel, s: f64, q: &InputDistribution, log_f: &[f64]) -> Result<f64> {
    let s = check_s(s)?;
    let t = ch.table();
    check_q(t, q)?;
    if log_f.len() != t.outputs() {
        return Err(invalid("log_f", format!("{} values for {} outputs", log_f.len(), t.outputs())));
    }
    let lw = t.log_weights();
    let mut total = 0.0;
    for (k, &qk) in q.probs().iter().enumerate() {
        if qk == 0.0 {
            continue;
        }
        let row = t.log_row(k);
        let mu = log_sum_exp((0..t.outputs()).map(|j| {
            if row[j] == f64::NEG_INFINITY || log_f[j] == f64::NEG_INFINITY {
                f64::NEG_INFINITY
            } else {
                lw[j] + (1.0 - s) * row[j] + s * log_f[j]
            }
        }));
        total += qk * mu;
    }
    Ok(total)
}

/// `μ_0` through the `E_0` route: `-(1-s) E_0(s/(1-s))`.
pub fn mu0_via_e0(ch: &Channel, s: f64) -> Result<f64> {
    let s = check_s(s)?;
    Ok(-(1.0 - s) * e0_max(ch, s_to_rho(s))?.0)
}

/// Mutual information `I(q)` in nats.
pub fn mutual_information(ch: &Channel, q: &InputDistribution) -> Result<f64> {
    let t = ch.table();
    check_q(t, q)?;
    let log_py = log_alpha(t, &q.log_probs(), 1.0);
    let lw = t.log_weights();
    let mut total = 0.0;
    for (k, &qk) in q.probs().iter().enumerate() {
        if qk == 0.0 {
            continue;
        }
        let row = t.log_row(k);
        let mut acc = 0.0;
        for j in 0..t.outputs() {
            if row[j] != f64::NEG_INFINITY {
                acc += (lw[j] + row[j]).exp() * (row[j] - log_py[j]);
            }
        }
        total += qk * acc;
    }
    Ok(total)
}

/// Channel capacity in nats per use. Symmetric channels use the uniform
/// input; otherwise Blahut–Arimoto runs until the upper/lower gap is < 1e-12.
pub fn capacity(ch: &Channel) -> Result<f64> {
    let k = ch.inputs();
    if ch.is_symmetric() || k == 1 {
        return mutual_information(ch, &InputDistribution::uniform(k));
    }
    let t = ch.table();
    let lw = t.log_weights();
    let mut q = vec![1.0 / k as f64; k];
    for _ in 0..100_000 {
        let log_q: Vec<f64> = q.iter().map(|v: &f64| v.ln()).collect();
        let log_py = log_alpha(t, &log_q, 1.0);
        // D_k = KL(P(.|k) || P_Y)
        let d: Vec<f64> = (0..k)
            .map(|i| {
                let row = t.log_row(i);
                (0..t.outputs())
                    .filter(|&j| row[j] != f64::NEG_INFINITY)
                    .map(|j| (lw[j] + row[j]).exp() * (row[j] - log_py[j]))
                    .sum()
            })
            .collect();
        let lower: f64 = q.iter().zip(&d).map(|(a, b)| a * b).sum();
        let upper = d.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if upper - lower < 1e-12 {
            return Ok(lower);
        }
        let w: Vec<f64> = q.iter().zip(&d).map(|(a, b)| a * (b - upper).exp()).collect();
        let s: f64 = w.iter().sum();
        q = w.into_iter().map(|v| v / s).collect();
    }
    Err(BoundError::NoConvergence { iterations: 100_000, residual: f64::NAN })
}
