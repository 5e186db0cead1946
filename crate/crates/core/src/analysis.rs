//! SNR thresholds, the capacity-limit bound and block-length crossovers for
//! coded modulation over the AWGN channel.

use std::f64::consts::LN_2;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{make_mpsk_awgn, Channel, DEFAULT_QUAD_ORDER};
use crate::code::{BoundKind, BoundResult, CodeSpec};
use crate::error::{invalid, BoundError, Result};
use crate::exponents::{capacity, random_coding_bound};
use crate::isp::isp_bound;
use crate::numeric::{brent_root, db_to_linear, linear_to_db};
use crate::sp59::{cone_half_angle, log_cone_escape, sp59_bound};
use crate::vf::vf_bound;

/// Eb/N0 search window in dB.
pub const SNR_RANGE_DB: (f64, f64) = (-5.0, 30.0);
/// Block-length window for crossover searches.
pub const CROSSOVER_RANGE: (u64, u64) = (16, 1_000_000);
const THRESHOLD_XTOL_DB: f64 = 1e-7;
const SNR_STEP_DB: f64 = 1.0;
const THRESHOLD_LOG_TOL: f64 = 1e-4;
const CLAMP: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ChannelFamily {
    /// coherent M-PSK on AWGN; `m = 2` is BPSK on one real dimension
    Psk { m: usize, quad_order: usize },
    /// Gaussian-input AWGN per real dimension (capacity-limit reference only)
    GaussianInput,
}

impl ChannelFamily {
    pub fn psk(m: usize) -> Self {
        ChannelFamily::Psk { m, quad_order: DEFAULT_QUAD_ORDER }
    }

    pub fn bpsk() -> Self {
        Self::psk(2)
    }

    /// Real dimensions per channel use.
    pub fn dims(&self) -> u64 {
        match self {
            ChannelFamily::Psk { m: 2, .. } | ChannelFamily::GaussianInput => 1,
            ChannelFamily::Psk { .. } => 2,
        }
    }

    /// Largest rate in bits per use, `None` if unbounded.
    pub fn max_rate_bits(&self) -> Option<f64> {
        match self {
            ChannelFamily::Psk { m, .. } => Some((*m as f64).log2()),
            ChannelFamily::GaussianInput => None,
        }
    }

    pub fn channel(&self, es_over_n0: f64) -> Result<Channel> {
        match self {
            ChannelFamily::Psk { m, quad_order } => Ok(make_mpsk_awgn(*m, es_over_n0, *quad_order)?.into()),
            ChannelFamily::GaussianInput => {
                Err(invalid("family", "Gaussian-input AWGN has no finite constellation"))
            }
        }
    }

    /// Capacity in nats per use at symbol SNR `es_over_n0`.
    pub fn capacity(&self, es_over_n0: f64) -> Result<f64> {
        match self {
            ChannelFamily::GaussianInput => Ok(0.5 * (1.0 + 2.0 * es_over_n0).ln()),
            _ => capacity(&self.channel(es_over_n0)?),
        }
    }
}

/// `Es/N0 = R_bits · Eb/N0` per channel use (linear).
pub fn es_over_n0(eb_over_n0_db: f64, rate_bits: f64) -> f64 {
    rate_bits * db_to_linear(eb_over_n0_db)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdQuery {
    pub bound_kind: BoundKind,
    pub channel_family: ChannelFamily,
    /// channel uses (symbols)
    pub n: u64,
    pub rate_bits: f64,
    pub target_pe: f64,
}

impl ThresholdQuery {
    pub fn validate(&self) -> Result<()> {
        if !(self.target_pe > 0.0 && self.target_pe < 1.0) {
            return Err(invalid("target_pe", format!("{} outside (0, 1)", self.target_pe)));
        }
        if self.n < 1 {
            return Err(invalid("n", "block length must be >= 1"));
        }
        check_rate(&self.channel_family, self.rate_bits)
    }
}

fn check_rate(family: &ChannelFamily, rate_bits: f64) -> Result<()> {
    if !(rate_bits > 0.0) || !rate_bits.is_finite() {
        return Err(invalid("rate", format!("{rate_bits} bits per use must be positive")));
    }
    if let Some(max) = family.max_rate_bits() {
        if rate_bits >= max {
            return Err(invalid("rate", format!("{rate_bits} bits per use >= log2(M) = {max}")));
        }
    }
    Ok(())
}

/// One bound evaluated at `Eb/N0` (dB) for a code of `n` uses at `rate_bits`.
pub fn evaluate_bound(
    kind: BoundKind,
    family: &ChannelFamily,
    n: u64,
    rate_bits: f64,
    eb_over_n0_db: f64,
) -> Result<BoundResult> {
    evaluate_bound_spec(kind, family, &CodeSpec::from_bits(n, rate_bits)?, eb_over_n0_db)
}

/// As [`evaluate_bound`] with the code given in full (the expurgation
/// fraction only affects ISP).
pub fn evaluate_bound_spec(
    kind: BoundKind,
    family: &ChannelFamily,
    spec: &CodeSpec,
    eb_over_n0_db: f64,
) -> Result<BoundResult> {
    let (n, rate_bits) = (spec.n, spec.rate_nats / LN_2);
    check_rate(family, rate_bits)?;
    let es = es_over_n0(eb_over_n0_db, rate_bits);
    match kind {
        BoundKind::Sp59 => {
            let d = family.dims();
            sp59_bound(n * d, rate_bits * LN_2 / d as f64, es / d as f64)
        }
        BoundKind::Isp => isp_bound(&family.channel(es)?, spec),
        BoundKind::Vf => vf_bound(&family.channel(es)?, spec),
        BoundKind::RandomCoding => {
            let rc = random_coding_bound(&family.channel(es)?, n, rate_bits * LN_2)?;
            Ok(BoundResult {
                kind,
                log_pe: rc.log_pe,
                vacuous: None,
                params: crate::code::BoundParams { rho: Some(rc.rho), ..Default::default() },
                diagnostics: Default::default(),
            })
        }
        BoundKind::Clb => {
            let thr = clb_threshold(family, rate_bits)?;
            let log_pe = if eb_over_n0_db < thr { 0.0 } else { f64::NEG_INFINITY };
            Ok(BoundResult { kind, log_pe, vacuous: None, params: Default::default(), diagnostics: Default::default() })
        }
        BoundKind::Sp67 => Err(BoundError::RequiresDiscrete),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Threshold {
    pub eb_over_n0_db: f64,
    /// `|ln bound - ln target|` at the returned SNR
    pub log_residual: f64,
}

/// Eb/N0 (dB) at which the bound crosses `target_pe`.
pub fn snr_threshold(q: &ThresholdQuery) -> Result<Threshold> {
    q.validate()?;
    if q.bound_kind == BoundKind::Clb {
        return Ok(Threshold { eb_over_n0_db: clb_threshold(&q.channel_family, q.rate_bits)?, log_residual: 0.0 });
    }
    let ln_target = q.target_pe.ln();
    let family = q.channel_family;
    // the cone angle does not depend on the SNR
    let sp59_theta = if q.bound_kind == BoundKind::Sp59 {
        let d = family.dims();
        Some(cone_half_angle(q.n * d, q.rate_bits * LN_2 / d as f64)?.half_angle_theta)
    } else {
        None
    };
    let eval = |db: f64| -> Result<f64> {
        let v = match sp59_theta {
            Some(theta) => {
                let d = family.dims();
                log_cone_escape(q.n * d, theta, es_over_n0(db, q.rate_bits) / d as f64)?
            }
            None => evaluate_bound(q.bound_kind, &family, q.n, q.rate_bits, db)?.log_pe,
        };
        Ok((v - ln_target).clamp(-CLAMP, CLAMP))
    };
    // walk up from the low end so the expensive high-SNR grids are only
    // built when the crossing really lies there
    let (mut lo, end) = SNR_RANGE_DB;
    if eval(lo)? <= 0.0 {
        return Err(BoundError::Unreachable(format!(
            "{} bound is already below {:e} at {lo} dB",
            q.bound_kind, q.target_pe
        )));
    }
    // a finite-length bound sits near or above the capacity limit, so the
    // walk usually starts there
    if let Ok(c) = clb_threshold(&family, q.rate_bits) {
        if c > lo && c < end && eval(c)? > 0.0 {
            lo = c;
        }
    }
    let mut hi = lo;
    loop {
        let next = (hi + SNR_STEP_DB).min(end);
        if eval(next)? <= 0.0 {
            hi = next;
            break;
        }
        if next >= end {
            return Err(BoundError::Unreachable(format!(
                "{} bound stays above {:e} at {end} dB",
                q.bound_kind, q.target_pe
            )));
        }
        lo = next;
        hi = next;
    }
    let mut err = None;
    let root = brent_root(
        |db| match eval(db) {
            Ok(v) => v,
            Err(e) => {
                err.get_or_insert(e);
                f64::NAN
            }
        },
        lo,
        hi,
        THRESHOLD_XTOL_DB,
        300,
    );
    if let Some(e) = err {
        return Err(e);
    }
    let root = root?;
    let residual = eval(root.root)?.abs();
    if residual > THRESHOLD_LOG_TOL {
        return Err(BoundError::Numeric(format!(
            "threshold residual {residual:e} in ln P_e at {} dB (bound not continuous there)",
            root.root
        )));
    }
    Ok(Threshold { eb_over_n0_db: root.root, log_residual: residual })
}

/// Capacity-limit Eb/N0 (dB): the SNR at which capacity equals the rate.
pub fn clb_threshold(family: &ChannelFamily, rate_bits: f64) -> Result<f64> {
    check_rate(family, rate_bits)?;
    if let ChannelFamily::GaussianInput = family {
        // per real dimension: R = ½ log2(1 + 2 R Eb/N0)
        return Ok(linear_to_db(((2.0 * rate_bits).exp2() - 1.0) / (2.0 * rate_bits)));
    }
    let target = rate_bits * LN_2;
    let mut err = None;
    let root = brent_root(
        |es_db| match family.capacity(db_to_linear(es_db)) {
            Ok(c) => c - target,
            Err(e) => {
                err.get_or_insert(e);
                f64::NAN
            }
        },
        -30.0,
        40.0,
        1e-10,
        300,
    );
    if let Some(e) = err {
        return Err(e);
    }
    let es_db = root?.root;
    Ok(es_db - linear_to_db(rate_bits))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Crossover {
    pub bound_a: BoundKind,
    pub bound_b: BoundKind,
    pub rate_bits: f64,
    pub target_pe: f64,
    /// smallest `N` with threshold(a) >= threshold(b); `None` when censored
    pub n: Option<u64>,
}

impl Crossover {
    pub fn is_censored(&self) -> bool {
        self.n.is_none()
    }
}

/// Smallest block length at which `bound_a` gives an SNR threshold at least
/// as high as `bound_b`, by integer bisection over `[16, 10⁶]`.
pub fn crossover_length(
    family: &ChannelFamily,
    rate_bits: f64,
    target_pe: f64,
    bound_a: BoundKind,
    bound_b: BoundKind,
) -> Result<Crossover> {
    let mut out = Crossover { bound_a, bound_b, rate_bits, target_pe, n: None };
    let wins = |n: u64| -> Result<bool> {
        if bound_a == bound_b {
            return Ok(true);
        }
        let q = |k| ThresholdQuery { bound_kind: k, channel_family: *family, n, rate_bits, target_pe };
        Ok(snr_threshold(&q(bound_a))?.eb_over_n0_db >= snr_threshold(&q(bound_b))?.eb_over_n0_db)
    };
    let (mut lo, mut hi) = CROSSOVER_RANGE;
    if wins(lo)? {
        out.n = Some(lo);
        return Ok(out);
    }
    if !wins(hi)? {
        return Ok(out);
    }
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if wins(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    out.n = Some(hi);
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionMap {
    pub rates_bits: Vec<f64>,
    pub pairs: Vec<(BoundKind, BoundKind)>,
    /// `crossovers[i][p]` for rate `i` and pair `p`
    pub crossovers: Vec<Vec<Crossover>>,
    pub target_pe: f64,
}

impl RegionMap {
    /// Crossover lengths of one pair do not increase with the rate (censored
    /// entries are skipped).
    pub fn is_monotone(&self, pair: usize) -> bool {
        let ns: Vec<u64> = self.crossovers.iter().filter_map(|row| row[pair].n).collect();
        ns.windows(2).all(|w| w[1] <= w[0])
    }
}

/// Crossovers for every `(rate, pair)`; rates run in parallel, the output
/// keeps grid order.
pub fn region_map(
    family: &ChannelFamily,
    rates_bits: &[f64],
    target_pe: f64,
    pairs: &[(BoundKind, BoundKind)],
) -> Result<RegionMap> {
    if !(target_pe > 0.0 && target_pe < 1.0) {
        return Err(invalid("target_pe", format!("{target_pe} outside (0, 1)")));
    }
    let crossovers = rates_bits
        .par_iter()
        .map(|&r| pairs.iter().map(|&(a, b)| crossover_length(family, r, target_pe, a, b)).collect::<Result<Vec<_>>>())
        .collect::<Result<Vec<_>>>()?;
    Ok(RegionMap { rates_bits: rates_bits.to_vec(), pairs: pairs.to_vec(), crossovers, target_pe })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub eb_over_n0_db: f64,
    /// `ln P_e` per requested bound, in request order; `None` on failure
    pub log_pe: Vec<Option<f64>>,
}

/// Bound values over an Eb/N0 grid, evaluated in parallel.
pub fn curve(
    family: &ChannelFamily,
    n: u64,
    rate_bits: f64,
    kinds: &[BoundKind],
    eb_grid_db: &[f64],
) -> Result<Vec<CurvePoint>> {
    if kinds.is_empty() {
        return Err(invalid("bounds", "empty bound list"));
    }
    check_rate(family, rate_bits)?;
    Ok(eb_grid_db
        .par_iter()
        .map(|&db| CurvePoint {
            eb_over_n0_db: db,
            log_pe: kinds.iter().map(|&k| evaluate_bound(k, family, n, rate_bits, db).ok().map(|r| r.log_pe)).collect(),
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaussian_clb_closed_form() {
        // R = 0.5 bit per dimension: Eb/N0 = (2 - 1)/1 = 0 dB
        assert!(clb_threshold(&ChannelFamily::GaussianInput, 0.5).unwrap().abs() < 1e-12);
    }

    #[test]
    fn rate_limits() {
        assert!(clb_threshold(&ChannelFamily::psk(2), 1.0).is_err());
        assert!(clb_threshold(&ChannelFamily::psk(8), 3.0).is_err());
        let q = ThresholdQuery {
            bound_kind: BoundKind::Isp,
            channel_family: ChannelFamily::bpsk(),
            n: 100,
            rate_bits: 0.5,
            target_pe: 1.0,
        };
        assert!(snr_threshold(&q).is_err());
    }

    #[test]
    fn es_conversion() {
        assert!((es_over_n0(0.0, 0.8) - 0.8).abs() < 1e-15);
        assert!((es_over_n0(10.0, 2.0) - 20.0).abs() < 1e-12);
    }

    #[test]
    fn identical_pair_hits_lower_edge() {
        let c = crossover_length(&ChannelFamily::bpsk(), 0.5, 1e-4, BoundKind::Isp, BoundKind::Isp).unwrap();
        assert_eq!(c.n, Some(CROSSOVER_RANGE.0));
    }
}
