use std::f64::consts::{FRAC_PI_2, PI};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{ChiSquared, Distribution, StandardNormal};
use spbound::numeric::log_q_function;
use spbound::sp59::{cone_half_angle, log_cone_escape, log_solid_angle_fraction, sp59_bound};
use statrs::function::beta::beta_reg;

/// Fraction of noise draws that leave the cone: the received point is
/// `(√(2n·Es/N0) + z_1, z_⊥)` and escapes when its angle to the axis exceeds θ.
fn simulate_escape(n: u64, theta: f64, es: f64, samples: u64, seed: u64) -> (f64, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let chi = ChiSquared::new((n - 1) as f64).unwrap();
    let a = (2.0 * n as f64 * es).sqrt();
    let (c, s) = (theta.cos(), theta.sin());
    let mut hits = 0u64;
    for _ in 0..samples {
        let z: f64 = StandardNormal.sample(&mut rng);
        let r = chi.sample(&mut rng).sqrt();
        // angle > θ  <=>  (a + z) sin θ < r cos θ
        if (a + z) * s < r * c {
            hits += 1;
        }
    }
    let p = hits as f64 / samples as f64;
    (p, (p * (1.0 - p) / samples as f64).sqrt())
}

#[test]
fn escape_matches_monte_carlo() {
    for (n, theta, es, seed) in [(10u64, 1.047, 1.0, 1u64), (20, 1.2, 0.5, 2)] {
        let v = log_cone_escape(n, theta, es).unwrap();
        let (p, se) = simulate_escape(n, theta, es, 100_000_000, seed);
        let dev = (v.exp() - p).abs() / se;
        assert!(dev < 3.0, "n={n}: exact {} mc {p} ({dev:.2} se)", v.exp());
    }
}

#[test]
fn half_space_is_gaussian_tail() {
    for n in [2u64, 10, 20, 100, 2000] {
        for es in [0.1, 1.0, 4.0] {
            let v = log_cone_escape(n, FRAC_PI_2, es).unwrap();
            let exact = log_q_function((2.0 * n as f64 * es).sqrt());
            assert!((v - exact).abs() < 1e-8, "n={n} es={es}: {v} vs {exact}");
        }
    }
}

#[test]
fn cap_fraction_matches_regularised_beta() {
    // Ω(θ)/Ω(π) = I_{sin²θ}((n-1)/2, 1/2) / 2 for θ <= π/2
    for n in [3u64, 7, 30, 200] {
        for theta in [0.2, 0.8, 1.3, FRAC_PI_2] {
            let v = log_solid_angle_fraction(n, theta).unwrap();
            let b = 0.5 * beta_reg(0.5 * (n - 1) as f64, 0.5, theta.sin().powi(2));
            assert!((v - b.ln()).abs() < 1e-9, "n={n} θ={theta}: {v} vs {}", b.ln());
            let w = log_solid_angle_fraction(n, PI - theta).unwrap();
            assert!((w.exp() - (1.0 - b)).abs() < 1e-12);
        }
    }
}

/// `ln ∫_0^θ sin^{n-2}` by a plain trapezoid sum on the log scale.
fn trapezoid_log_cap(n: u64, theta: f64) -> f64 {
    let m = 200_000;
    let h = theta / m as f64;
    let logs: Vec<f64> = (0..=m).map(|i| (n - 2) as f64 * (i as f64 * h).sin().ln()).collect();
    let top = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let sum: f64 = logs
        .iter()
        .enumerate()
        .map(|(i, l)| if i == 0 || i == m { 0.5 } else { 1.0 } * (l - top).exp())
        .sum();
    top + (sum * h).ln()
}

#[test]
fn cone_angle_by_independent_inversion() {
    let (n, r) = (100u64, 0.5);
    let g = cone_half_angle(n, r).unwrap();
    let full = trapezoid_log_cap(n, PI);
    let target = -(n as f64) * r;
    let (mut lo, mut hi) = (1e-6, FRAC_PI_2);
    while hi - lo > 1e-11 {
        let mid = 0.5 * (lo + hi);
        if trapezoid_log_cap(n, mid) - full < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    assert!((g.half_angle_theta - lo).abs() < 1e-8, "{} vs {lo}", g.half_angle_theta);
    assert!((g.log_solid_angle_fraction - target).abs() < 1e-9);
}

#[test]
fn trivial_codebooks() {
    for n in [2u64, 5, 64] {
        let g = cone_half_angle(n, 2f64.ln() / n as f64).unwrap();
        assert!((g.half_angle_theta - FRAC_PI_2).abs() < 1e-9);
        assert_eq!(cone_half_angle(n, 0.0).unwrap().half_angle_theta, PI);
    }
}

#[test]
fn long_blocks_stay_finite() {
    for n in [1_000u64, 10_000, 100_000] {
        let b = sp59_bound(n, 0.45, 0.55).unwrap();
        assert!(b.log_pe.is_finite() && b.log_pe <= 0.0, "n={n}: {b:?}");
    }
    // more dimensions at the same rate and SNR below capacity: smaller bound
    let a = sp59_bound(1_000, 0.3, 0.6).unwrap().log_pe;
    let b = sp59_bound(10_000, 0.3, 0.6).unwrap().log_pe;
    assert!(b < a);
}
