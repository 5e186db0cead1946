use super::solve::{bisect_root, golden_section_min};

/// Gauss–Legendre nodes and weights on `[-1, 1]`, computed by Newton
/// iteration on the three-term Legendre recurrence.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "Gauss-Legendre order must be positive");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Tricomi initial guess
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

const TAIL_CUT: f64 = 60.0;

/// `ln ∫_lo^hi exp(logf(t)) dt` for a unimodal (typically log-concave)
/// integrand. The mode is located by golden section, the integration range is
/// trimmed to where `logf >= max - 60`, and the shifted integrand is
/// integrated by adaptive Simpson with relative tolerance `rel_tol`.
pub fn log_integrate_unimodal<F>(logf: F, lo: f64, hi: f64, rel_tol: f64) -> f64
where
    F: Fn(f64) -> f64,
{
    if !(hi > lo) {
        return f64::NEG_INFINITY;
    }
    let width = hi - lo;
    let (mut xmax, mut fmax, _) = golden_section_min(|t| -logf(t), lo, hi, 1e-14 * width.max(1e-300), 300);
    fmax = -fmax;
    for &edge in &[lo, hi] {
        let fe = logf(edge);
        if fe > fmax {
            fmax = fe;
            xmax = edge;
        }
    }
    if !fmax.is_finite() {
        return fmax;
    }
    let level = fmax - TAIL_CUT;
    let a = if logf(lo) >= level {
        lo
    } else {
        bisect_root(|t| logf(t) - level, lo, xmax, 1e-15 * width, 200)
            .map(|r| r.root)
            .unwrap_or(lo)
    };
    let b = if logf(hi) >= level {
        hi
    } else {
        bisect_root(|t| logf(t) - level, xmax, hi, 1e-15 * width, 200)
            .map(|r| r.root)
            .unwrap_or(hi)
    };
    let g = |t: f64| (logf(t) - fmax).exp();

    composite_gl(&g, a, b, rel_tol).map_or(f64::NEG_INFINITY, |v| fmax + v.ln())
}

const GL_ORDER: usize = 16;
const MAX_PANELS: usize = 1 << 12;

/// Composite Gauss-Legendre on `[a, b]`, doubling the panel count until two
/// successive sums agree to `rel_tol` or the change stops shrinking (the
/// integrand's own rounding noise has been reached).
fn composite_gl<G: Fn(f64) -> f64>(g: &G, a: f64, b: f64, rel_tol: f64) -> Option<f64> {
    let (x, w) = gauss_legendre(GL_ORDER);
    let sum = |panels: usize| {
        let h = (b - a) / panels as f64;
        let mut total = 0.0;
        for p in 0..panels {
            let mid = a + (p as f64 + 0.5) * h;
            total += x.iter().zip(&w).map(|(xi, wi)| wi * g(mid + 0.5 * h * xi)).sum::<f64>() * 0.5 * h;
        }
        total
    };
    let mut panels = 4;
    let mut prev = sum(panels);
    let mut prev_change = f64::INFINITY;
    while panels < MAX_PANELS {
        panels *= 2;
        let cur = sum(panels);
        let change = (cur - prev).abs();
        if change <= rel_tol * cur.abs() || (panels >= 32 && change >= 0.5 * prev_change) {
            return (cur > 0.0).then_some(cur);
        }
        prev = cur;
        prev_change = change;
    }
    (prev > 0.0).then_some(prev)
}
