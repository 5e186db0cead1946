use spbound::channel::{make_bsc, make_mpsk_awgn, Channel, DiscreteChannel, InputDistribution};
use spbound::exponents::{
    capacity, e0, e0_max, esp, mu0_fixed_f, mu0_via_e0, mu0_with_derivatives, optimal_q, random_coding_bound,
    random_coding_exponent, s_to_rho, tilted_measure,
};
use spbound::numeric::{log_q_function, log_sum_exp};

const S_GRID: [f64; 9] = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9];

fn bsc(p: f64) -> Channel {
    make_bsc(p).unwrap().into()
}

fn z_channel() -> Channel {
    DiscreteChannel::new(vec![vec![1.0, 0.0], vec![0.5, 0.5]]).unwrap().into()
}

fn psk8(es: f64) -> Channel {
    make_mpsk_awgn(8, es, 64).unwrap().into()
}

/// `E_0(ρ, (q, 1-q))` for the Z-channel, written out by hand.
fn z_e0(rho: f64, q: f64) -> f64 {
    let a = 1.0 / (1.0 + rho);
    let y0 = q + (1.0 - q) * 0.5f64.powf(a);
    let y1 = (1.0 - q) * 0.5f64.powf(a);
    -(y0.powf(1.0 + rho) + y1.powf(1.0 + rho)).ln()
}

#[test]
fn bsc_e0_closed_form() {
    let v = e0(&bsc(0.1), 1.0, &InputDistribution::uniform(2)).unwrap();
    let exact = 2f64.ln() - 2.0 * (0.9f64.sqrt() + 0.1f64.sqrt()).ln();
    assert!((v - exact).abs() < 1e-14);
    assert!((v - 0.2231).abs() < 1e-4);
    // noiseless: ρ ln 2
    let id = bsc(0.0);
    for rho in [0.3, 1.0, 4.0] {
        assert!((e0(&id, rho, &InputDistribution::uniform(2)).unwrap() - rho * 2f64.ln()).abs() < 1e-13);
    }
}

#[test]
fn z_channel_q_matches_grid_search() {
    let ch = z_channel();
    let q = optimal_q(&ch, 1.0).unwrap();
    let best = (0..=10_000)
        .map(|i| i as f64 * 1e-4)
        .max_by(|a, b| z_e0(1.0, *a).total_cmp(&z_e0(1.0, *b)))
        .unwrap();
    assert!((q.probs()[0] - best).abs() <= 1e-4, "{:?} vs {best}", q.probs());
    let (v, _) = e0_max(&ch, 1.0).unwrap();
    assert!((v - z_e0(1.0, best)).abs() < 1e-8);
}

#[test]
fn z_channel_tilted_measure_direct() {
    let ch = z_channel();
    let s: f64 = 0.5;
    let rho = s_to_rho(s);
    let q = optimal_q(&ch, rho).unwrap().probs()[0];
    let a = 1.0 - s;
    let alpha = [q + (1.0 - q) * 0.5f64.powf(a), (1.0 - q) * 0.5f64.powf(a)];
    let g: Vec<f64> = alpha.iter().map(|v| v.powf(1.0 / (1.0 - s))).collect();
    let z: f64 = g.iter().sum();
    let t = tilted_measure(&ch, s).unwrap();
    for (lf, gi) in t.log_f.iter().zip(&g) {
        assert!((lf.exp() - gi / z).abs() < 1e-12);
    }
    assert!(log_sum_exp(t.log_f.iter().copied()).abs() < 1e-9);
}

#[test]
fn esp_matches_rho_grid() {
    let ch = bsc(0.1);
    let e = esp(&ch, 0.3).unwrap();
    let grid = (0..=1_000_000)
        .map(|i| {
            let rho = i as f64 * 1e-4;
            e0(&ch, rho, &InputDistribution::uniform(2)).unwrap() - rho * 0.3
        })
        .fold(f64::NEG_INFINITY, f64::max);
    assert!((e.value - grid).abs() < 1e-8, "{} vs {grid}", e.value);
    // above capacity
    let c = capacity(&ch).unwrap();
    let e = esp(&ch, c + 1e-3).unwrap();
    assert_eq!(e.value, 0.0);
    assert_eq!(e.optimizer_rho, 0.0);
    assert!(esp(&bsc(0.0), 0.5).unwrap().value.is_infinite());
}

#[test]
fn random_coding_matches_rho_grid() {
    let ch = bsc(0.1);
    let grid = (0..=10_000)
        .map(|i| {
            let rho = i as f64 * 1e-4;
            e0(&ch, rho, &InputDistribution::uniform(2)).unwrap() - rho * 0.3
        })
        .fold(f64::NEG_INFINITY, f64::max);
    let b = random_coding_bound(&ch, 100, 0.3).unwrap();
    assert!((b.log_pe + 100.0 * grid).abs() < 1e-7);
    let (er, _) = random_coding_exponent(&ch, 0.5).unwrap();
    assert_eq!(er, 0.0);
}

#[test]
fn esp_and_er_agree_above_critical_rate() {
    let ch = bsc(0.1);
    // R_crit = E_0'(1) for the BSC is about 0.131 nats
    for r in [0.22, 0.26, 0.3, 0.34] {
        let sp = esp(&ch, r).unwrap().value;
        let (er, _) = random_coding_exponent(&ch, r).unwrap();
        assert!((sp - er).abs() < 1e-6, "R={r}: {sp} vs {er}");
    }
    for r in [0.02, 0.06, 0.1] {
        let sp = esp(&ch, r).unwrap().value;
        let (er, _) = random_coding_exponent(&ch, r).unwrap();
        assert!(sp > er + 1e-4);
    }
}

#[test]
fn capacity_closed_forms() {
    let h = |p: f64| -p * p.ln() - (1.0 - p) * (1.0 - p).ln();
    for p in [0.01, 0.1, 0.3] {
        assert!((capacity(&bsc(p)).unwrap() - (2f64.ln() - h(p))).abs() < 1e-13);
    }
    assert!((capacity(&bsc(0.0)).unwrap() - 2f64.ln()).abs() < 1e-15);
    // Z channel: C = ln(1 + (1-p) p^{p/(1-p)}) with p = 1/2
    let zc = (1.0 + 0.5 * 0.5f64.powf(1.0)).ln();
    assert!((capacity(&z_channel()).unwrap() - zc).abs() < 1e-10);
}

#[test]
fn bpsk_capacity_at_shannon_limit() {
    // Eb/N0 = 0.187 dB at R = 0.5 bit
    let es = 0.5 * 10f64.powf(0.0187);
    let ch: Channel = make_mpsk_awgn(2, es, 400).unwrap().into();
    let c = capacity(&ch).unwrap() / 2f64.ln();
    // independent oracle: C = 1 - E[log2(1 + exp(-2y/σ²))] with y ~ N(1, σ²)
    let s2 = 1.0 / (2.0 * es);
    let (n, h) = (400_000, 24.0 * s2.sqrt() / 400_000.0);
    let mut acc = 0.0;
    for i in 0..=n {
        let y = 1.0 - 12.0 * s2.sqrt() + i as f64 * h;
        let w = if i == 0 || i == n { 0.5 } else { 1.0 };
        let pdf = (-(y - 1.0).powi(2) / (2.0 * s2)).exp() / (2.0 * std::f64::consts::PI * s2).sqrt();
        acc += w * h * pdf * (-2.0 * y / s2).exp().ln_1p() / 2f64.ln();
    }
    let oracle = 1.0 - acc;
    assert!((c - oracle).abs() < 1e-6, "{c} vs {oracle}");
    assert!((c - 0.5).abs() < 2e-3);
}

#[test]
fn sign_quantizer_is_bsc() {
    let es = 1.3;
    let ch = make_mpsk_awgn(2, es, 96).unwrap();
    let d = ch.quantize(2).unwrap();
    let p = log_q_function((2.0 * es).sqrt()).exp();
    let t = d.transition();
    // letter 0 sits at +1, so its crossover mass is the lower bin
    assert!((t[0][0] - p).abs() < 1e-14 && (t[1][1] - p).abs() < 1e-14, "{t:?} vs {p}");
    assert!((t[0][1] - t[1][0]).abs() < 1e-15);
}

#[test]
fn fine_quantization_converges_to_continuous() {
    let ch = make_mpsk_awgn(2, 1.0, 96).unwrap();
    let q: Channel = ch.quantize(2000).unwrap().into();
    let cont: Channel = ch.into();
    let a = e0(&q, 1.0, &InputDistribution::uniform(2)).unwrap();
    let b = e0(&cont, 1.0, &InputDistribution::uniform(2)).unwrap();
    assert!((a - b).abs() < 1e-4, "{a} vs {b}");
}

#[test]
fn psk_densities_integrate_to_one() {
    let ch = make_mpsk_awgn(8, 1.0, 96).unwrap();
    let g = ch.quadrature();
    for k in 0..8 {
        let v = g.log_integrate(|y| ch.log_density(y, k).unwrap());
        assert!(v.abs() < g.certified_tol().max(1e-12), "letter {k}: {v}");
    }
}

#[test]
fn rotation_of_constellation_leaves_e0_unchanged() {
    let base = e0(&psk8(2.0), 0.7, &InputDistribution::uniform(8)).unwrap();
    let pts: Vec<[f64; 2]> = (0..8)
        .map(|i| {
            let a = 0.3 + i as f64 * std::f64::consts::PI / 4.0;
            [a.cos(), a.sin()]
        })
        .collect();
    let rot: Channel = spbound::channel::ContinuousChannel::new(pts, 2, 2.0, 64, true).unwrap().into();
    let v = e0(&rot, 0.7, &InputDistribution::uniform(8)).unwrap();
    assert!((v - base).abs() < 1e-9, "{v} vs {base}");
}

#[test]
fn mu0_identity_on_grid() {
    for ch in [bsc(0.1), psk8(1.5)] {
        for s in S_GRID {
            let m = mu0_with_derivatives(&ch, s).unwrap();
            let e = mu0_via_e0(&ch, s).unwrap();
            assert!((m.mu0 - e).abs() < 1e-8, "s={s}: {} vs {e}", m.mu0);
            assert!(m.mu0 <= 0.0 && m.mu0_second > 0.0);
        }
    }
    let m = mu0_with_derivatives(&bsc(0.1), 0.5).unwrap();
    assert!((m.mu0 + 0.1116).abs() < 1e-4);
    assert!(mu0_with_derivatives(&bsc(0.1), 1e-7).unwrap().mu0.abs() < 1e-6);
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-12)
}

/// `∂_s Σ_k q_k μ_k(s, f)` with `f` frozen: the mean of `ln(f/P)` under the
/// weights `P^{1-s} f^s`, written straight from the output table.
fn fixed_f_slope(ch: &Channel, s: f64, q: &[f64], log_f: &[f64]) -> f64 {
    let t = ch.table();
    let lw = t.log_weights();
    let mut total = 0.0;
    for (k, qk) in q.iter().enumerate() {
        let row = t.log_row(k);
        let lt: Vec<f64> = (0..t.outputs()).map(|j| lw[j] + (1.0 - s) * row[j] + s * log_f[j]).collect();
        let top = lt.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let (mut num, mut den) = (0.0, 0.0);
        for j in 0..t.outputs() {
            let w = (lt[j] - top).exp();
            num += w * (log_f[j] - row[j]);
            den += w;
        }
        total += qk * num / den;
    }
    total
}

#[test]
fn mu0_derivatives_match_finite_differences() {
    let h = 1e-5;
    for ch in [bsc(0.1), psk8(1.5)] {
        for s in S_GRID {
            let m = mu0_with_derivatives(&ch, s).unwrap();
            let up = mu0_with_derivatives(&ch, s + h).unwrap().mu0;
            let dn = mu0_with_derivatives(&ch, s - h).unwrap().mu0;
            let d1 = (up - dn) / (2.0 * h);
            assert!(rel(m.mu0_prime, d1) < 1e-6, "s={s}: mu' {} vs {d1}", m.mu0_prime);
            // second derivative: difference the fixed-f first derivative
            let t = tilted_measure(&ch, s).unwrap();
            let g = |x: f64| fixed_f_slope(&ch, x, t.q_s.probs(), &t.log_f);
            let d2 = (g(s + h) - g(s - h)) / (2.0 * h);
            assert!((fixed_f_slope(&ch, s, t.q_s.probs(), &t.log_f) - m.mu0_prime).abs() < 1e-9);
            assert!((mu0_fixed_f(&ch, s, &t.q_s, &t.log_f).unwrap() - m.mu0).abs() < 1e-9);
            assert!(rel(m.mu0_second, d2) < 1e-6, "s={s}: mu'' {} vs {d2}", m.mu0_second);
        }
    }
}

#[test]
fn kkt_conditions_on_random_dmcs() {
    use rand::{Rng, SeedableRng};
    use spbound::exponents::kkt_ratios;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(21);
    for _ in 0..300 {
        let k = rng.random_range(2..=6);
        let j = rng.random_range(2..=8);
        let rows: Vec<Vec<f64>> = (0..k)
            .map(|_| {
                let w: Vec<f64> = (0..j).map(|_| rng.random::<f64>().powi(3) + 1e-6).collect();
                let s: f64 = w.iter().sum();
                w.into_iter().map(|v| v / s).collect()
            })
            .collect();
        let ch: Channel = DiscreteChannel::new(rows).unwrap().into();
        for rho in [0.05, 1.0, 8.0] {
            let q = optimal_q(&ch, rho).unwrap();
            for (r, p) in kkt_ratios(&ch, rho, &q).iter().zip(q.probs()) {
                assert!(*r >= 1.0 - 1e-9, "ratio {r} at q {p}");
                assert!(*p < 1e-9 || (r - 1.0).abs() < 1e-8, "ratio {r} at q {p}");
            }
        }
    }
}
