//! Memoryless channel models.
//!
//! Every channel, discrete or continuous-output, is reduced to an
//! [`OutputTable`]: a list of output points with log-domain integration
//! weights and a `K × J` table of log transition values. For a DMC the
//! weights are all one (log-weight 0) and the table holds `ln P(j|k)`; for a
//! continuous-output channel the points are quadrature nodes and the table
//! holds log densities, so every sum over outputs is a quadrature.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, BoundError, Result};
use crate::numeric::{gauss_legendre, log_ndtr, log_q_function, log_sum_exp, log1m_exp};

const ROW_SUM_TOL: f64 = 1e-12;

/// Probability vector over the channel input alphabet.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputDistribution(Vec<f64>);

impl InputDistribution {
    pub fn new(q: Vec<f64>) -> Result<Self> {
        if q.is_empty() {
            return Err(invalid("q", "empty distribution"));
        }
        if q.iter().any(|&v| !(v >= 0.0) || !v.is_finite()) {
            return Err(invalid("q", "entries must be finite and nonnegative"));
        }
        let sum: f64 = q.iter().sum();
        if (sum - 1.0).abs() > ROW_SUM_TOL {
            return Err(invalid("q", format!("entries sum to {sum}")));
        }
        Ok(Self(q))
    }

    pub fn uniform(k: usize) -> Self {
        Self(vec![1.0 / k as f64; k])
    }

    /// Normalises an arbitrary nonnegative vector.
    pub(crate) fn from_unnormalized(mut q: Vec<f64>) -> Self {
        let sum: f64 = q.iter().sum();
        q.iter_mut().for_each(|v| *v /= sum);
        Self(q)
    }

    pub fn probs(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn min_component(&self) -> f64 {
        self.0.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub(crate) fn log_probs(&self) -> Vec<f64> {
        self.0.iter().map(|v| v.ln()).collect()
    }
}

/// Output-space representation shared by discrete and continuous channels.
#[derive(Debug, Clone)]
pub struct OutputTable {
    k: usize,
    j: usize,
    log_w: Vec<f64>,
    /// row-major `K × J`
    log_p: Vec<f64>,
}

impl OutputTable {
    pub fn inputs(&self) -> usize {
        self.k
    }

    pub fn outputs(&self) -> usize {
        self.j
    }

    pub fn log_weights(&self) -> &[f64] {
        &self.log_w
    }

    #[inline]
    pub fn log_row(&self, k: usize) -> &[f64] {
        &self.log_p[k * self.j..(k + 1) * self.j]
    }
}

#[derive(Debug, Clone)]
pub struct DiscreteChannel {
    transition: Vec<Vec<f64>>,
    input_labels: Vec<String>,
    output_labels: Vec<String>,
    symmetric: bool,
    table: OutputTable,
}

impl DiscreteChannel {
    /// Builds a DMC from its `K × J` transition matrix.
    pub fn new(transition: Vec<Vec<f64>>) -> Result<Self> {
        let k = transition.len();
        if k == 0 {
            return Err(invalid("transition", "no input letters"));
        }
        let j = transition[0].len();
        if j == 0 {
            return Err(invalid("transition", "no output letters"));
        }
        for (row, r) in transition.iter().enumerate() {
            if r.len() != j {
                return Err(invalid("transition", format!("row {row} has {} entries, expected {j}", r.len())));
            }
            if r.iter().any(|&p| !(0.0..=1.0).contains(&p)) {
                return Err(invalid("transition", format!("row {row} has an entry outside [0, 1]")));
            }
            let sum: f64 = r.iter().sum();
            if (sum - 1.0).abs() > ROW_SUM_TOL {
                return Err(BoundError::NotStochastic { row, sum });
            }
        }
        let symmetric = is_strongly_symmetric(&transition);
        Ok(Self::assemble(transition, symmetric))
    }

    fn assemble(transition: Vec<Vec<f64>>, symmetric: bool) -> Self {
        let k = transition.len();
        let j = transition[0].len();
        let log_p = transition.iter().flat_map(|r| r.iter().map(|p| p.ln())).collect();
        Self {
            input_labels: (0..k).map(|i| i.to_string()).collect(),
            output_labels: (0..j).map(|i| i.to_string()).collect(),
            symmetric,
            table: OutputTable { k, j, log_w: vec![0.0; j], log_p },
            transition,
        }
    }

    pub fn with_labels(mut self, inputs: Vec<String>, outputs: Vec<String>) -> Result<Self> {
        if inputs.len() != self.inputs() || outputs.len() != self.outputs() {
            return Err(invalid("labels", "label counts do not match the alphabet sizes"));
        }
        self.input_labels = inputs;
        self.output_labels = outputs;
        Ok(self)
    }

    pub fn transition(&self) -> &[Vec<f64>] {
        &self.transition
    }

    pub fn inputs(&self) -> usize {
        self.transition.len()
    }

    pub fn outputs(&self) -> usize {
        self.transition[0].len()
    }

    pub fn input_labels(&self) -> &[String] {
        &self.input_labels
    }

    pub fn output_labels(&self) -> &[String] {
        &self.output_labels
    }

    /// Smallest nonzero transition probability.
    pub fn p_min(&self) -> f64 {
        self.transition
            .iter()
            .flatten()
            .copied()
            .filter(|&p| p > 0.0)
            .fold(f64::INFINITY, f64::min)
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    pub fn table(&self) -> &OutputTable {
        &self.table
    }

    /// `ln P(j|k)`; `-inf` for zero entries.
    pub fn log_transition(&self, output: usize, input: usize) -> Result<f64> {
        if input >= self.inputs() {
            return Err(BoundError::IndexOutOfRange { what: "input", index: input, len: self.inputs() });
        }
        if output >= self.outputs() {
            return Err(BoundError::IndexOutOfRange { what: "output", index: output, len: self.outputs() });
        }
        Ok(self.table.log_row(input)[output])
    }
}

// Rows are permutations of each other and so are columns.
fn is_strongly_symmetric(m: &[Vec<f64>]) -> bool {
    let sorted = |mut v: Vec<f64>| {
        v.sort_by(|a, b| a.partial_cmp(b).unwrap());
        v
    };
    let close = |a: &[f64], b: &[f64]| a.iter().zip(b).all(|(x, y)| (x - y).abs() < 1e-14);
    let r0 = sorted(m[0].clone());
    if !m.iter().all(|r| close(&sorted(r.clone()), &r0)) {
        return false;
    }
    let col = |c: usize| sorted(m.iter().map(|r| r[c]).collect());
    let c0 = col(0);
    (0..m[0].len()).all(|c| close(&col(c), &c0))
}

/// Binary symmetric channel with crossover probability `p`.
pub fn make_bsc(p: f64) -> Result<DiscreteChannel> {
    if !(0.0..=1.0).contains(&p) {
        return Err(invalid("p", format!("crossover {p} outside [0, 1]")));
    }
    Ok(DiscreteChannel::assemble(vec![vec![1.0 - p, p], vec![p, 1.0 - p]], true))
}

/// Tensor-product integration grid over the output space.
#[derive(Debug, Clone)]
pub struct QuadratureGrid {
    dims: usize,
    /// flattened, `dims` coordinates per node
    nodes: Vec<f64>,
    log_weights: Vec<f64>,
    half_width: f64,
    order: usize,
    certified_tol: f64,
}

impl QuadratureGrid {
    /// Gauss–Legendre product rule on `[-half_width, half_width]^dims`.
    pub fn gauss_legendre_box(dims: usize, order: usize, half_width: f64) -> Result<Self> {
        if !(1..=2).contains(&dims) {
            return Err(invalid("dims", "only 1 or 2 output dimensions are supported"));
        }
        if order < 2 {
            return Err(invalid("quad_order", "need at least 2 nodes per dimension"));
        }
        if !(half_width > 0.0 && half_width.is_finite()) {
            return Err(invalid("half_width", "must be positive and finite"));
        }
        let (x, w) = gauss_legendre(order);
        let xs: Vec<f64> = x.iter().map(|t| t * half_width).collect();
        let lws: Vec<f64> = w.iter().map(|w| (w * half_width).ln()).collect();
        let (nodes, log_weights) = if dims == 1 {
            (xs, lws)
        } else {
            let mut nodes = Vec::with_capacity(2 * order * order);
            let mut lw = Vec::with_capacity(order * order);
            for a in 0..order {
                for b in 0..order {
                    nodes.push(xs[a]);
                    nodes.push(xs[b]);
                    lw.push(lws[a] + lws[b]);
                }
            }
            (nodes, lw)
        };
        Ok(Self { dims, nodes, log_weights, half_width, order, certified_tol: f64::NAN })
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    pub fn len(&self) -> usize {
        self.log_weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.log_weights.is_empty()
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn node(&self, i: usize) -> &[f64] {
        &self.nodes[i * self.dims..(i + 1) * self.dims]
    }

    pub fn log_weights(&self) -> &[f64] {
        &self.log_weights
    }

    /// Relative integration error bound for Gaussian-type integrands on this grid.
    pub fn certified_tol(&self) -> f64 {
        self.certified_tol
    }

    /// `ln ∫ exp(logf(y)) dy` over the grid.
    pub fn log_integrate<F: Fn(&[f64]) -> f64>(&self, logf: F) -> f64 {
        log_sum_exp((0..self.len()).map(|i| self.log_weights[i] + logf(self.node(i))))
    }

    /// Measures the rule against Gaussian densities of variance `sigma2`
    /// centred at each point in `centers` and at the origin; stores the
    /// result as the certified tolerance.
    fn certify(&mut self, centers: &[[f64; 2]], sigma2: f64) {
        let mut worst: f64 = 0.0;
        let mut tail_mass: f64 = 0.0;
        let sigma = sigma2.sqrt();
        for c in centers.iter().chain(std::iter::once(&[0.0, 0.0])) {
            let lg = self.log_integrate(|y| gaussian_log_density(y, c, sigma2));
            // mass the box truncates, per axis
            let mut inside = 0.0;
            for d in 0..self.dims {
                let lo = (-self.half_width - c[d]) / sigma;
                let hi = (self.half_width - c[d]) / sigma;
                inside += log1m_exp(log_add_tails(log_ndtr(lo), log_q_function(hi)));
            }
            tail_mass = tail_mass.max(-inside.exp_m1());
            worst = worst.max((lg.exp_m1() - inside.exp_m1()).abs());
        }
        let eps = 64.0 * f64::EPSILON * self.len() as f64;
        self.certified_tol = (2.0 * worst + tail_mass + eps).max(1e-13);
    }
}

fn log_add_tails(a: f64, b: f64) -> f64 {
    crate::numeric::log_add(a, b)
}

fn gaussian_log_density(y: &[f64], c: &[f64; 2], sigma2: f64) -> f64 {
    let d2: f64 = y.iter().enumerate().map(|(i, v)| (v - c[i]).powi(2)).sum();
    -d2 / (2.0 * sigma2) - 0.5 * y.len() as f64 * (2.0 * PI * sigma2).ln()
}

/// Default number of Gauss–Legendre nodes per output dimension.
pub const DEFAULT_QUAD_ORDER: usize = 96;
/// Box half-width beyond the constellation hull, in noise standard deviations.
pub const GRID_SIGMAS: f64 = 8.0;
/// Upper limit on the node count per dimension once the order is raised to
/// resolve narrow noise (high SNR).
pub const MAX_QUAD_ORDER: usize = 4096;
const MAX_QUAD_ORDER_2D: usize = 640;

/// Nodes per dimension: at least `requested`, and enough that the central
/// node spacing (about `π·half_width/order`) stays below `σ/2`.
fn effective_order(requested: usize, dims: usize, half_width: f64, sigma: f64) -> usize {
    let cap = if dims == 1 { MAX_QUAD_ORDER } else { MAX_QUAD_ORDER_2D };
    let need = (2.0 * std::f64::consts::PI * half_width / sigma).ceil() as usize;
    requested.max(need.min(cap))
}

/// Coherent M-PSK over complex AWGN with unit-energy symbols.
#[derive(Debug, Clone)]
pub struct ContinuousChannel {
    constellation: Vec<[f64; 2]>,
    dims: usize,
    es_over_n0: f64,
    noise_sigma2: f64,
    symmetric: bool,
    quadrature: QuadratureGrid,
    table: OutputTable,
}

/// M-ary PSK on an AWGN channel: points at angles `2πk/M`, per-dimension
/// noise variance `1 / (2 Es/N0)`. BPSK lives on a line.
pub fn make_mpsk_awgn(m: usize, es_over_n0: f64, quad_order: usize) -> Result<ContinuousChannel> {
    if m < 2 {
        return Err(invalid("M", format!("constellation size {m} < 2")));
    }
    if !(es_over_n0 > 0.0 && es_over_n0.is_finite()) {
        return Err(invalid("es_over_n0", format!("{es_over_n0} is not a positive SNR")));
    }
    if quad_order < 16 {
        return Err(invalid("quad_order", format!("{quad_order} < 16 nodes per dimension")));
    }
    let points: Vec<[f64; 2]> = (0..m)
        .map(|k| {
            let a = 2.0 * PI * k as f64 / m as f64;
            if m == 2 {
                [a.cos().round(), 0.0]
            } else {
                [a.cos(), a.sin()]
            }
        })
        .collect();
    let dims = if m == 2 { 1 } else { 2 };
    ContinuousChannel::new(points, dims, es_over_n0, quad_order, true)
}

impl ContinuousChannel {
    /// General constellation in one or two real dimensions. Points are
    /// rescaled to unit average energy.
    pub fn new(
        mut points: Vec<[f64; 2]>,
        dims: usize,
        es_over_n0: f64,
        quad_order: usize,
        symmetric: bool,
    ) -> Result<Self> {
        if points.is_empty() {
            return Err(invalid("constellation", "no points"));
        }
        if !(es_over_n0 > 0.0 && es_over_n0.is_finite()) {
            return Err(invalid("es_over_n0", "must be positive"));
        }
        let energy: f64 = points.iter().map(|p| p[0] * p[0] + p[1] * p[1]).sum::<f64>() / points.len() as f64;
        if !(energy > 0.0) {
            return Err(invalid("constellation", "zero average energy"));
        }
        let scale = energy.sqrt().recip();
        for p in &mut points {
            p[0] *= scale;
            p[1] *= scale;
            if dims == 1 {
                p[1] = 0.0;
            }
        }
        let sigma2 = 1.0 / (2.0 * es_over_n0);
        let hull = points.iter().flat_map(|p| [p[0].abs(), p[1].abs()]).fold(0.0, f64::max);
        let half_width = hull + GRID_SIGMAS * sigma2.sqrt();
        let order = effective_order(quad_order, dims, half_width, sigma2.sqrt());
        let mut grid = QuadratureGrid::gauss_legendre_box(dims, order, half_width)?;
        grid.certify(&points, sigma2);
        let k = points.len();
        let j = grid.len();
        let mut log_p = Vec::with_capacity(k * j);
        for c in &points {
            for i in 0..j {
                log_p.push(gaussian_log_density(grid.node(i), c, sigma2));
            }
        }
        let table = OutputTable { k, j, log_w: grid.log_weights().to_vec(), log_p };
        Ok(Self { constellation: points, dims, es_over_n0, noise_sigma2: sigma2, symmetric, quadrature: grid, table })
    }

    pub fn constellation(&self) -> &[[f64; 2]] {
        &self.constellation
    }

    pub fn inputs(&self) -> usize {
        self.constellation.len()
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    pub fn es_over_n0(&self) -> f64 {
        self.es_over_n0
    }

    pub fn noise_sigma2(&self) -> f64 {
        self.noise_sigma2
    }

    pub fn quadrature(&self) -> &QuadratureGrid {
        &self.quadrature
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    pub fn table(&self) -> &OutputTable {
        &self.table
    }

    /// `ln p(y|k)` at an arbitrary output point.
    pub fn log_density(&self, y: &[f64], input: usize) -> Result<f64> {
        if input >= self.inputs() {
            return Err(BoundError::IndexOutOfRange { what: "input", index: input, len: self.inputs() });
        }
        if y.len() != self.dims {
            return Err(invalid("y", format!("expected {} coordinates", self.dims)));
        }
        Ok(gaussian_log_density(y, &self.constellation[input], self.noise_sigma2))
    }

    /// Quantises each output dimension into `levels` bins (uniform interior
    /// edges across the grid box, outermost bins open) and returns the
    /// resulting DMC. Bin probabilities are exact Gaussian masses.
    pub fn quantize(&self, levels: usize) -> Result<DiscreteChannel> {
        if levels < 2 {
            return Err(invalid("levels", "need at least 2 bins per dimension"));
        }
        let l = self.quadrature.half_width();
        let mut edges = Vec::with_capacity(levels + 1);
        edges.push(f64::NEG_INFINITY);
        for i in 1..levels {
            edges.push(-l + 2.0 * l * i as f64 / levels as f64);
        }
        edges.push(f64::INFINITY);
        if edges.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(invalid("levels", "degenerate quantisation grid"));
        }
        let sigma = self.noise_sigma2.sqrt();
        let bin_masses = |c: f64| -> Vec<f64> {
            edges
                .windows(2)
                .map(|w| gaussian_interval_mass((w[0] - c) / sigma, (w[1] - c) / sigma))
                .collect()
        };
        let rows: Vec<Vec<f64>> = self
            .constellation
            .iter()
            .map(|p| {
                let mx = bin_masses(p[0]);
                let mut row = if self.dims == 1 {
                    mx
                } else {
                    let my = bin_masses(p[1]);
                    mx.iter().flat_map(|a| my.iter().map(move |b| a * b)).collect()
                };
                let s: f64 = row.iter().sum();
                row.iter_mut().for_each(|v| *v /= s);
                row
            })
            .collect();
        let symmetric = self.symmetric && self.inputs() <= 4;
        Ok(DiscreteChannel::assemble(rows, symmetric))
    }
}

// Φ(b) - Φ(a), computed on the tail that keeps precision.
fn gaussian_interval_mass(a: f64, b: f64) -> f64 {
    if a >= 0.0 {
        (log_q_function(a).exp() - log_q_function(b).exp()).max(0.0)
    } else if b <= 0.0 {
        (log_ndtr(b).exp() - log_ndtr(a).exp()).max(0.0)
    } else {
        1.0 - log_ndtr(a).exp() - log_q_function(b).exp()
    }
}

/// A memoryless channel with finite input alphabet.
#[derive(Debug, Clone)]
pub enum Channel {
    Discrete(DiscreteChannel),
    Continuous(ContinuousChannel),
}

impl Channel {
    pub fn table(&self) -> &OutputTable {
        match self {
            Channel::Discrete(c) => &c.table,
            Channel::Continuous(c) => &c.table,
        }
    }

    pub fn inputs(&self) -> usize {
        self.table().inputs()
    }

    /// Uniform input is known to be optimal for every `ρ`.
    pub fn is_symmetric(&self) -> bool {
        match self {
            Channel::Discrete(c) => c.symmetric,
            Channel::Continuous(c) => c.symmetric,
        }
    }

    pub fn as_discrete(&self) -> Option<&DiscreteChannel> {
        match self {
            Channel::Discrete(c) => Some(c),
            Channel::Continuous(_) => None,
        }
    }

    /// Log transition value at table node `output` (an output letter for a
    /// DMC, a quadrature node for a continuous channel).
    pub fn log_transition(&self, output: usize, input: usize) -> Result<f64> {
        let t = self.table();
        if input >= t.k {
            return Err(BoundError::IndexOutOfRange { what: "input", index: input, len: t.k });
        }
        if output >= t.j {
            return Err(BoundError::IndexOutOfRange { what: "output", index: output, len: t.j });
        }
        Ok(t.log_row(input)[output])
    }
}

impl From<DiscreteChannel> for Channel {
    fn from(c: DiscreteChannel) -> Self {
        Channel::Discrete(c)
    }
}

impl From<ContinuousChannel> for Channel {
    fn from(c: ContinuousChannel) -> Self {
        Channel::Continuous(c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bsc_fixtures() {
        let c = make_bsc(0.0).unwrap();
        assert_eq!(c.transition(), &[vec![1.0, 0.0], vec![0.0, 1.0]]);
        let c = make_bsc(0.5).unwrap();
        assert!(c.transition().iter().flatten().all(|&p| p == 0.5));
        let c = make_bsc(0.1).unwrap();
        assert_eq!(c.transition(), &[vec![0.9, 0.1], vec![0.1, 0.9]]);
        assert!(make_bsc(-0.1).is_err());
        assert!(make_bsc(1.5).is_err());
    }

    #[test]
    fn log_transition_values() {
        let c = make_bsc(0.1).unwrap();
        assert_eq!(c.log_transition(1, 1).unwrap(), 0.9f64.ln());
        let c = make_bsc(0.0).unwrap();
        assert_eq!(c.log_transition(0, 1).unwrap(), f64::NEG_INFINITY);
        assert!(matches!(c.log_transition(2, 0), Err(BoundError::IndexOutOfRange { .. })));
        assert!(matches!(c.log_transition(0, 2), Err(BoundError::IndexOutOfRange { .. })));

        let ch = make_mpsk_awgn(2, 1.0, 32).unwrap();
        let v = ch.log_density(&[1.0], 0).unwrap();
        assert!((v - (1.0 / (2.0 * PI * 0.5).sqrt()).ln()).abs() < 1e-14);
    }

    #[test]
    fn dmc_validation() {
        assert!(DiscreteChannel::new(vec![]).is_err());
        assert!(matches!(
            DiscreteChannel::new(vec![vec![0.5, 0.4]]),
            Err(BoundError::NotStochastic { row: 0, .. })
        ));
        assert!(DiscreteChannel::new(vec![vec![1.2, -0.2]]).is_err());
        assert!(DiscreteChannel::new(vec![vec![0.5, 0.5], vec![1.0]]).is_err());
        let z = DiscreteChannel::new(vec![vec![1.0, 0.0], vec![0.5, 0.5]]).unwrap();
        assert!(!z.is_symmetric());
        assert_eq!(z.p_min(), 0.5);
        let b = DiscreteChannel::new(vec![vec![0.8, 0.2], vec![0.2, 0.8]]).unwrap();
        assert!(b.is_symmetric());
    }

    #[test]
    fn psk_geometry() {
        let c = make_mpsk_awgn(2, 1.0, 32).unwrap();
        assert_eq!(c.dims(), 1);
        assert_eq!(c.constellation(), &[[1.0, 0.0], [-1.0, 0.0]]);
        let c = make_mpsk_awgn(4, 1.0, 32).unwrap();
        assert_eq!(c.dims(), 2);
        for (k, p) in c.constellation().iter().enumerate() {
            let ang = (k as f64) * PI / 2.0;
            assert!((p[0] - ang.cos()).abs() < 1e-15 && (p[1] - ang.sin()).abs() < 1e-15);
            assert!((p[0].hypot(p[1]) - 1.0).abs() < 1e-15);
        }
        assert!(make_mpsk_awgn(1, 1.0, 32).is_err());
        assert!(make_mpsk_awgn(4, 0.0, 32).is_err());
        assert!(make_mpsk_awgn(4, 1.0, 8).is_err());
    }

    #[test]
    fn psk_densities_normalised() {
        let c = make_mpsk_awgn(8, 1.0, DEFAULT_QUAD_ORDER).unwrap();
        let energy: f64 = c.constellation().iter().map(|p| p[0] * p[0] + p[1] * p[1]).sum::<f64>() / 8.0;
        assert!((energy - 1.0).abs() < 1e-12);
        let tol = c.quadrature().certified_tol();
        assert!(tol < 1e-9, "certified tol {tol}");
        for k in 0..8 {
            let lg = crate::numeric::log_sum_exp((0..c.table().outputs()).map(|j| c.table().log_weights()[j] + c.table().log_row(k)[j]));
            assert!(lg.abs() <= tol, "k={k} ln mass {lg}");
        }
        // standard Gaussian per dimension
        let g = QuadratureGrid::gauss_legendre_box(1, 96, 9.0).unwrap();
        let v = g.log_integrate(|y| -0.5 * y[0] * y[0] - 0.5 * (2.0 * PI).ln());
        assert!(v.abs() < 1e-12);
    }

    #[test]
    fn sign_quantizer_is_hard_decision_bsc() {
        let es = 1.3;
        let c = make_mpsk_awgn(2, es, 64).unwrap();
        let d = c.quantize(2).unwrap();
        let p = log_q_function((2.0 * es).sqrt()).exp();
        let t = d.transition();
        // output 0 is the negative half-line, so input +1 errs into it
        assert!((t[0][0] - p).abs() < 1e-15 && (t[1][1] - p).abs() < 1e-15, "{t:?} {p}");
        assert!((t[0][1] - t[1][0]).abs() < 1e-15);
        assert!(d.is_symmetric());
    }

    #[test]
    fn quantized_rows_stochastic() {
        for m in [2, 4, 8] {
            let c = make_mpsk_awgn(m, 0.7, 32).unwrap();
            let d = c.quantize(12).unwrap();
            for r in d.transition() {
                assert!((r.iter().sum::<f64>() - 1.0).abs() < 1e-9);
            }
        }
        let c = make_mpsk_awgn(2, 0.7, 32).unwrap();
        assert!(c.quantize(1).is_err());
    }
}
