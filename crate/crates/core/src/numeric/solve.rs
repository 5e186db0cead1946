use crate::error::{BoundError, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RootResult {
    pub root: f64,
    pub value: f64,
    pub iterations: usize,
}

/// Plain bisection; `f(lo)` and `f(hi)` must have opposite signs.
pub fn bisect_root<F>(mut f: F, mut lo: f64, mut hi: f64, xtol: f64, max_iter: usize) -> Result<RootResult>
where
    F: FnMut(f64) -> f64,
{
    let mut flo = f(lo);
    let fhi = f(hi);
    if flo == 0.0 {
        return Ok(RootResult { root: lo, value: 0.0, iterations: 0 });
    }
    if fhi == 0.0 {
        return Ok(RootResult { root: hi, value: 0.0, iterations: 0 });
    }
    if flo.signum() == fhi.signum() {
        return Err(BoundError::NoRoot(format!(
            "f({lo}) = {flo}, f({hi}) = {fhi}"
        )));
    }
    let mut it = 0;
    let mut mid = 0.5 * (lo + hi);
    let mut fmid = f(mid);
    while it < max_iter && (hi - lo).abs() > xtol && fmid != 0.0 {
        if fmid.signum() == flo.signum() {
            lo = mid;
            flo = fmid;
        } else {
            hi = mid;
        }
        mid = 0.5 * (lo + hi);
        fmid = f(mid);
        it += 1;
    }
    Ok(RootResult { root: mid, value: fmid, iterations: it })
}

/// Brent's root finder (inverse quadratic interpolation guarded by bisection).
pub fn brent_root<F>(mut f: F, a: f64, b: f64, xtol: f64, max_iter: usize) -> Result<RootResult>
where
    F: FnMut(f64) -> f64,
{
    let (mut a, mut b) = (a, b);
    let mut fa = f(a);
    let mut fb = f(b);
    if fa == 0.0 {
        return Ok(RootResult { root: a, value: 0.0, iterations: 0 });
    }
    if fb == 0.0 {
        return Ok(RootResult { root: b, value: 0.0, iterations: 0 });
    }
    if fa.is_nan() || fb.is_nan() || fa.signum() == fb.signum() {
        return Err(BoundError::NoRoot(format!("f({a}) = {fa}, f({b}) = {fb}")));
    }
    let mut c = a;
    let mut fc = fa;
    let mut d = b - a;
    let mut e = d;
    for it in 0..max_iter {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol1 = 2.0 * f64::EPSILON * b.abs() + 0.5 * xtol;
        let xm = 0.5 * (c - b);
        if xm.abs() <= tol1 || fb == 0.0 {
            return Ok(RootResult { root: b, value: fb, iterations: it });
        }
        if e.abs() >= tol1 && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * xm * s;
                q = 1.0 - s;
            } else {
                let qq = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * xm * qq * (qq - r) - (b - a) * (r - 1.0));
                q = (qq - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            }
            p = p.abs();
            let min1 = 3.0 * xm * q - (tol1 * q).abs();
            let min2 = (e * q).abs();
            if 2.0 * p < min1.min(min2) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol1 { d } else { tol1.copysign(xm) };
        fb = f(b);
    }
    Ok(RootResult { root: b, value: fb, iterations: max_iter })
}

/// Golden-section minimisation on `[lo, hi]`. Tolerates `+inf` objective
/// values (treated as "worse than anything finite"). Returns `(x, f(x), iterations)`.
pub fn golden_section_min<F>(mut f: F, lo: f64, hi: f64, xtol: f64, max_iter: usize) -> (f64, f64, usize)
where
    F: FnMut(f64) -> f64,
{
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo.min(hi), lo.max(hi));
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    let mut it = 0;
    while it < max_iter && (b - a) > xtol {
        if lt(fc, fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
        it += 1;
    }
    if lt(fc, fd) {
        (c, fc, it)
    } else {
        (d, fd, it)
    }
}

// NaN sorts as worst.
fn lt(a: f64, b: f64) -> bool {
    match (a.is_nan(), b.is_nan()) {
        (true, _) => false,
        (false, true) => true,
        _ => a < b,
    }
}
