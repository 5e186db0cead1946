//! Code parameters and the common result record returned by every bound.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CodeSpec {
    /// block length in channel uses
    pub n: u64,
    /// `R = ln(M/L)/N`, nats per channel use
    pub rate_nats: f64,
    pub list_size: u64,
    /// fraction of codewords kept by expurgation
    pub expurgation_alpha: f64,
}

impl CodeSpec {
    pub fn new(n: u64, rate_nats: f64) -> Result<Self> {
        Self { n, rate_nats, list_size: 1, expurgation_alpha: 0.5 }.validated()
    }

    pub fn from_bits(n: u64, rate_bits: f64) -> Result<Self> {
        Self::new(n, rate_bits * std::f64::consts::LN_2)
    }

    /// `R = ln(M/L)/N` from the codebook size `M` (given as `ln M`).
    pub fn from_codebook(n: u64, ln_m: f64, list_size: u64) -> Result<Self> {
        if list_size < 1 {
            return Err(invalid("L", "list size must be >= 1"));
        }
        let rate = (ln_m - (list_size as f64).ln()) / n.max(1) as f64;
        Self { n, rate_nats: rate, list_size, expurgation_alpha: 0.5 }.validated()
    }

    pub fn with_list_size(mut self, list_size: u64) -> Result<Self> {
        self.list_size = list_size;
        self.validated()
    }

    pub fn with_alpha(mut self, alpha: f64) -> Result<Self> {
        self.expurgation_alpha = alpha;
        self.validated()
    }

    fn validated(self) -> Result<Self> {
        if self.n < 1 {
            return Err(invalid("n", "block length must be >= 1"));
        }
        if !(self.rate_nats > 0.0) || !self.rate_nats.is_finite() {
            return Err(invalid("rate", format!("{} must be positive", self.rate_nats)));
        }
        if self.list_size < 1 {
            return Err(invalid("L", "list size must be >= 1"));
        }
        if !(self.expurgation_alpha > 0.0 && self.expurgation_alpha < 1.0) {
            return Err(invalid("alpha", format!("{} outside (0, 1)", self.expurgation_alpha)));
        }
        Ok(self)
    }

    pub fn n_f64(&self) -> f64 {
        self.n as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundKind {
    Sp59,
    Sp67,
    Vf,
    Isp,
    #[serde(rename = "rc")]
    RandomCoding,
    Clb,
}

impl BoundKind {
    pub const ALL: [BoundKind; 6] = [
        BoundKind::Sp59,
        BoundKind::Sp67,
        BoundKind::Vf,
        BoundKind::Isp,
        BoundKind::RandomCoding,
        BoundKind::Clb,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BoundKind::Sp59 => "sp59",
            BoundKind::Sp67 => "sp67",
            BoundKind::Vf => "vf",
            BoundKind::Isp => "isp",
            BoundKind::RandomCoding => "rc",
            BoundKind::Clb => "clb",
        }
    }

    pub fn is_lower_bound(self) -> bool {
        !matches!(self, BoundKind::RandomCoding)
    }
}

impl fmt::Display for BoundKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for BoundKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "sp59" => Ok(BoundKind::Sp59),
            "sp67" => Ok(BoundKind::Sp67),
            "vf" => Ok(BoundKind::Vf),
            "isp" => Ok(BoundKind::Isp),
            "rc" | "random-coding" | "randomcoding" => Ok(BoundKind::RandomCoding),
            "clb" => Ok(BoundKind::Clb),
            other => Err(format!("unknown bound `{other}`")),
        }
    }
}

/// Optimising internal parameters; absent entries do not apply to the bound.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct BoundParams {
    pub x: Option<f64>,
    pub s: Option<f64>,
    pub rho: Option<f64>,
    pub theta: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    /// relative residual of the implicit equation at the returned root
    pub residual: f64,
    pub iterations: usize,
    pub evaluations: usize,
    /// optimiser settled on an edge of its search interval
    pub at_bracket_edge: bool,
    pub caveat: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundResult {
    pub kind: BoundKind,
    /// natural log of the bound on the average block error probability
    pub log_pe: f64,
    /// `Some(reason)` when the bound degenerates to the trivial `P_e >= 0`
    pub vacuous: Option<String>,
    pub params: BoundParams,
    pub diagnostics: Diagnostics,
}

impl BoundResult {
    pub fn vacuous(kind: BoundKind, reason: impl Into<String>) -> Self {
        Self {
            kind,
            log_pe: f64::NEG_INFINITY,
            vacuous: Some(reason.into()),
            params: BoundParams::default(),
            diagnostics: Diagnostics::default(),
        }
    }

    pub fn is_vacuous(&self) -> bool {
        self.vacuous.is_some()
    }

    pub fn pe(&self) -> f64 {
        self.log_pe.exp()
    }
}
