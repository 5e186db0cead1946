//! Fast invariant self-test behind `spbound check`.

use std::f64::consts::FRAC_PI_2;

use spbound::channel::{make_bsc, make_mpsk_awgn, Channel, DiscreteChannel};
use spbound::exponents::{
    capacity, esp, kkt_ratios, mu0_via_e0, mu0_with_derivatives, optimal_q, random_coding_bound,
    random_coding_exponent,
};
use spbound::isp::isp_bound;
use spbound::numeric::log_q_function;
use spbound::pairwise::pairwise_lower_bounds;
use spbound::sp59::log_cone_escape;
use spbound::sp67::sp67_bound;
use spbound::vf::vf_bound;
use spbound::CodeSpec;

use crate::{Cell, Table};

type Check = (&'static str, fn() -> spbound::Result<f64>, f64);

const S_GRID: [f64; 9] = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9];

fn channels() -> spbound::Result<[Channel; 2]> {
    Ok([make_bsc(0.1)?.into(), make_mpsk_awgn(8, 1.5, 64)?.into()])
}

fn mu0_identity() -> spbound::Result<f64> {
    let mut worst: f64 = 0.0;
    for ch in channels()? {
        for s in S_GRID {
            worst = worst.max((mu0_with_derivatives(&ch, s)?.mu0 - mu0_via_e0(&ch, s)?).abs());
        }
    }
    Ok(worst)
}

fn mu0_slope() -> spbound::Result<f64> {
    let h = 1e-5;
    let mut worst: f64 = 0.0;
    for ch in channels()? {
        for s in S_GRID {
            let d = (mu0_with_derivatives(&ch, s + h)?.mu0 - mu0_with_derivatives(&ch, s - h)?.mu0) / (2.0 * h);
            let m = mu0_with_derivatives(&ch, s)?.mu0_prime;
            worst = worst.max((m - d).abs() / d.abs().max(1e-12));
        }
    }
    Ok(worst)
}

/// Number of ordering violations `isp >= vf >= sp67`, `isp <= rc`.
fn ordering() -> spbound::Result<f64> {
    let d = make_bsc(0.1)?;
    let ch: Channel = d.clone().into();
    let c = capacity(&ch)?;
    let mut bad = 0;
    for n in [100u64, 1_000] {
        for frac in [0.5, 0.8] {
            let spec = CodeSpec::new(n, frac * c)?;
            let isp = isp_bound(&ch, &spec)?.log_pe;
            let vf = vf_bound(&ch, &spec)?.log_pe;
            let sp67 = sp67_bound(&d, &spec)?.log_pe;
            let rc = random_coding_bound(&ch, n, frac * c)?.log_pe;
            if !(isp >= vf && vf >= sp67 && isp <= rc) {
                bad += 1;
            }
        }
    }
    Ok(bad as f64)
}

fn measure(j: usize, phase: f64) -> Vec<f64> {
    let w: Vec<f64> = (0..j).map(|y| 1.05 + (phase * (y + 1) as f64).sin()).collect();
    let t: f64 = w.iter().sum();
    w.into_iter().map(|v| v / t).collect()
}

/// Decision regions where both pairwise lower bounds are violated.
fn disjunction() -> spbound::Result<f64> {
    let mut bad = 0;
    for case in 0..20 {
        let j = 2 + case % 7;
        let (p1, p2) = (measure(j, 0.7 + case as f64), measure(j, 2.3 + 0.5 * case as f64));
        for s in [0.25, 0.5, 0.75] {
            for x in [0.9, 1.5, 3.0] {
                let b = pairwise_lower_bounds(&p1, &p2, s, x)?;
                let slack = 1.0 - 1e-12;
                for mask in 0u32..(1 << j) {
                    let (mut e1, mut e2) = (0.0, 0.0);
                    for y in 0..j {
                        if mask >> y & 1 == 1 {
                            e2 += p2[y];
                        } else {
                            e1 += p1[y];
                        }
                    }
                    if e1 < b.log_lower_1.exp() * slack && e2 < b.log_lower_2.exp() * slack {
                        bad += 1;
                    }
                }
            }
        }
    }
    Ok(bad as f64)
}

fn half_space() -> spbound::Result<f64> {
    let mut worst: f64 = 0.0;
    for n in [2u64, 20, 200] {
        for es in [0.1, 1.0, 4.0] {
            let v = log_cone_escape(n, FRAC_PI_2, es)?;
            worst = worst.max((v - log_q_function((2.0 * n as f64 * es).sqrt())).abs());
        }
    }
    Ok(worst)
}

/// Largest `E_r - E_sp`; must not be positive.
fn exponent_order() -> spbound::Result<f64> {
    let ch: Channel = make_bsc(0.1)?.into();
    let mut worst = f64::NEG_INFINITY;
    for r in [0.02, 0.1, 0.2, 0.3, 0.35] {
        worst = worst.max(random_coding_exponent(&ch, r)?.0 - esp(&ch, r)?.value);
    }
    Ok(worst.max(0.0))
}

/// Largest KKT ratio excess for the Z-channel optimiser.
fn kkt() -> spbound::Result<f64> {
    let ch: Channel = DiscreteChannel::new(vec![vec![1.0, 0.0], vec![0.5, 0.5]])?.into();
    let mut worst: f64 = 0.0;
    for rho in [0.25, 1.0, 4.0] {
        let q = optimal_q(&ch, rho)?;
        for (r, p) in kkt_ratios(&ch, rho, &q).iter().zip(q.probs()) {
            let excess = if *p > 0.0 { (r - 1.0).abs() } else { (r - 1.0).max(0.0) };
            worst = worst.max(excess);
        }
    }
    Ok(worst)
}

const CHECKS: [Check; 7] = [
    ("mu0_identity", mu0_identity, 1e-8),
    ("mu0_slope_finite_difference", mu0_slope, 1e-6),
    ("bound_ordering_violations", ordering, 0.0),
    ("pairwise_disjunction_violations", disjunction, 0.0),
    ("sp59_half_space", half_space, 1e-8),
    ("exponent_order", exponent_order, 1e-9),
    ("kkt_residual", kkt, 1e-8),
];

/// One row per check: name, pass flag (1/0), measured error, tolerance.
pub fn run_checks() -> Table {
    let rows = CHECKS
        .iter()
        .map(|(name, f, tol)| {
            let v = f().ok();
            let pass = v.is_some_and(|v| v <= *tol);
            vec![Cell::Text(name.to_string()), Cell::from(if pass { 1.0 } else { 0.0 }), v.into(), Cell::from(*tol)]
        })
        .collect();
    let columns = ["check", "passed", "error", "tolerance"].map(String::from).to_vec();
    Table { columns, rows }
}

pub fn failures(table: &Table) -> usize {
    table.rows.iter().filter(|r| r.get(1) != Some(&Cell::from(1.0))).count()
}
