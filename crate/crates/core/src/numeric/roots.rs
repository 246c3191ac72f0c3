//! Bracketed scalar root finding.

/// Brent's method on a bracket `[a, b]` with `f(a)` and `f(b)` of opposite
/// sign (or one of them zero).  Returns `None` when the bracket is invalid.
pub fn brent<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, xtol: f64) -> Option<f64> {
    let fa = f(a);
    let fb = f(b);
    brent_with_values(f, a, b, fa, fb, xtol)
}

/// As [`brent`] with the endpoint values already known.
pub fn brent_with_values<F: FnMut(f64) -> f64>(
    mut f: F,
    mut a: f64,
    mut b: f64,
    mut fa: f64,
    mut fb: f64,
    xtol: f64,
) -> Option<f64> {
    if fa == 0.0 {
        return Some(a);
    }
    if fb == 0.0 {
        return Some(b);
    }
    if fa.signum() == fb.signum() || !fa.is_finite() || !fb.is_finite() {
        return None;
    }
    let mut c = a;
    let mut fc = fa;
    let mut d = b - a;
    let mut e = d;
    for _ in 0..200 {
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
        let tol = 2.0 * f64::EPSILON * b.abs() + 0.5 * xtol;
        let m = 0.5 * (c - b);
        if m.abs() <= tol || fb == 0.0 {
            return Some(b);
        }
        if e.abs() >= tol && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * m * s;
                q = 1.0 - s;
            } else {
                let qa = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * m * qa * (qa - r) - (b - a) * (r - 1.0));
                q = (qa - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            } else {
                p = -p;
            }
            if 2.0 * p < (3.0 * m * q - (tol * q).abs()).min((e * q).abs()) {
                e = d;
                d = p / q;
            } else {
                d = m;
                e = m;
            }
        } else {
            d = m;
            e = m;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol { d } else { tol.copysign(m) };
        fb = f(b);
        if !fb.is_finite() {
            return None;
        }
    }
    Some(b)
}

/// Plain bisection on a boolean predicate that is `false` at `a` and `true`
/// at `b`; returns the bracket after it has shrunk below `xtol`.
pub fn bisect_predicate<P: FnMut(f64) -> bool>(mut pred: P, mut a: f64, mut b: f64, xtol: f64) -> (f64, f64) {
    while (b - a).abs() > xtol {
        let mid = 0.5 * (a + b);
        if mid == a || mid == b {
            break;
        }
        if pred(mid) {
            b = mid;
        } else {
            a = mid;
        }
    }
    (a, b)
}

/// Locates every sign change of `f` on a uniform scan of `[a, b]` with
/// `samples` intervals and refines each with Brent.  Exact zeros at sample
/// points are reported once.
pub fn scan_roots<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, samples: usize, xtol: f64) -> Vec<f64> {
    let xs: Vec<f64> = (0..=samples).map(|i| a + (b - a) * i as f64 / samples as f64).collect();
    let vals: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
    let mut roots = Vec::new();
    for i in 0..samples {
        let (x0, x1, f0, f1) = (xs[i], xs[i + 1], vals[i], vals[i + 1]);
        if f0 == 0.0 {
            if roots.last().is_none_or(|&r: &f64| (r - x0).abs() > xtol) {
                roots.push(x0);
            }
            continue;
        }
        if f1 != 0.0 && f0.signum() != f1.signum() {
            if let Some(r) = brent_with_values(&mut f, x0, x1, f0, f1, xtol) {
                roots.push(r);
            }
        }
    }
    if vals[samples] == 0.0 {
        roots.push(xs[samples]);
    }
    roots
}
