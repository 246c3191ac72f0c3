//! Globally adaptive Gauss–Kronrod (7, 15) quadrature.
//!
//! Intervals are kept in a max-heap keyed by their error estimate and the
//! worst one is bisected until the summed estimate drops below the requested
//! tolerance.  Callers that know where the integrand loses smoothness pass
//! those points as breakpoints so that no panel straddles them.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];

// Gauss weights for the nodes XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone, Copy)]
pub struct QuadOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_panels: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self { abs_tol: 1e-13, rel_tol: 1e-10, max_panels: 20_000 }
    }
}

impl QuadOptions {
    pub fn with_rel_tol(rel_tol: f64) -> Self {
        Self { rel_tol, ..Self::default() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub error: f64,
    pub panels: usize,
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn kronrod<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> Panel {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut k = fc * WGK[7];
    let mut g = fc * WG[3];
    let mut abs_k = fc.abs() * WGK[7];
    let mut samples = [(0.0, 0.0); 7];
    for (j, &x) in XGK.iter().take(7).enumerate() {
        let dx = half * x;
        let (lo, hi) = (f(center - dx), f(center + dx));
        samples[j] = (lo, hi);
        k += WGK[j] * (lo + hi);
        abs_k += WGK[j] * (lo.abs() + hi.abs());
        if j % 2 == 1 {
            g += WG[j / 2] * (lo + hi);
        }
    }
    // QUADPACK error heuristic: scale |K - G| against the mean deviation.
    let mean = 0.5 * k;
    let mut asc = WGK[7] * (fc - mean).abs();
    for (j, &(lo, hi)) in samples.iter().enumerate() {
        asc += WGK[j] * ((lo - mean).abs() + (hi - mean).abs());
    }
    let asc = asc * half.abs();
    let mut error = ((k - g) * half).abs();
    if asc != 0.0 && error != 0.0 {
        error = asc * (200.0 * error / asc).powf(1.5).min(1.0);
    }
    let floor = 50.0 * f64::EPSILON * abs_k * half.abs();
    if floor > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        error = error.max(floor);
    }
    Panel { a, b, value: k * half, error }
}

/// Splits that fail to reduce the error before roundoff is declared.
const ROUNDOFF_STALLS: usize = 12;

/// Integrates `f` over `[a, b]`.
pub fn integrate<F: FnMut(f64) -> f64>(f: F, a: f64, b: f64, opts: QuadOptions) -> Result<QuadResult> {
    integrate_with_breaks(f, &[a, b], opts)
}

/// Integrates `f` over `[points[0], points[last]]` with an initial panel
/// between each pair of consecutive points.  Points must be sorted; empty
/// panels are skipped.
pub fn integrate_with_breaks<F: FnMut(f64) -> f64>(
    mut f: F,
    points: &[f64],
    opts: QuadOptions,
) -> Result<QuadResult> {
    let mut heap = BinaryHeap::new();
    for w in points.windows(2) {
        if w[1] > w[0] {
            heap.push(kronrod(&mut f, w[0], w[1]));
        }
    }
    if heap.is_empty() {
        return Ok(QuadResult { value: 0.0, error: 0.0, panels: 0 });
    }
    let mut stalled = 0;
    let (mut value, mut error) = heap.iter().fold((0.0, 0.0), |(v, e), p: &Panel| (v + p.value, e + p.error));
    loop {
        let target = opts.abs_tol.max(opts.rel_tol * value.abs());
        if error <= target {
            return Ok(QuadResult { value, error, panels: heap.len() });
        }
        if heap.len() >= opts.max_panels {
            return Err(Error::QuadratureFailure { estimate: value, error });
        }
        let worst = heap.pop().expect("non-empty heap");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // Panel cannot be split further in floating point; accept it.
            return if error <= 1e3 * target {
                Ok(QuadResult { value, error, panels: heap.len() + 1 })
            } else {
                Err(Error::QuadratureFailure { estimate: value, error })
            };
        }
        let (left, right) = (kronrod(&mut f, worst.a, mid), kronrod(&mut f, mid, worst.b));
        let (split_value, split_error) = (left.value + right.value, left.error + right.error);
        if (worst.value - split_value).abs() <= 1e-5 * split_value.abs() && split_error >= 0.99 * worst.error {
            stalled += 1;
        }
        if stalled >= ROUNDOFF_STALLS {
            // Further splitting only reshuffles noise.
            let error = error + split_error - worst.error;
            let value = value + split_value - worst.value;
            return if error <= 1e3 * target {
                Ok(QuadResult { value, error, panels: heap.len() + 2 })
            } else {
                Err(Error::QuadratureFailure { estimate: value, error })
            };
        }
        value += left.value + right.value - worst.value;
        error += left.error + right.error - worst.error;
        if heap.len() % 256 == 0 {
            // Refresh the running sums to stop cancellation drift.
            (value, error) = heap.iter().chain([&left, &right]).fold((0.0, 0.0), |(v, e), p| (v + p.value, e + p.error));
        }
        heap.push(left);
        heap.push(right);
    }
}

/// Composite Gauss–Legendre on fixed panels; used where an adaptive loop
/// would be wasteful (smooth integrands evaluated many times).
pub fn gauss_kronrod_fixed<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, panels: usize) -> f64 {
    let h = (b - a) / panels as f64;
    (0..panels)
        .map(|i| {
            let lo = a + h * i as f64;
            kronrod(&mut f, lo, lo + h).value
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn polynomial_is_exact() {
        let r = integrate(|x| x.powi(5) - 3.0 * x * x, -1.0, 2.0, QuadOptions::default()).unwrap();
        let exact = (64.0 - 1.0) / 6.0 - (8.0 + 1.0);
        assert!((r.value - exact).abs() < 1e-13);
    }

    #[test]
    fn sqrt_endpoint_singularity_converges() {
        // Integral of sqrt(1 - x^2) over [-1, 1] is pi / 2.
        let r = integrate(|x: f64| (1.0 - x * x).max(0.0).sqrt(), -1.0, 1.0, QuadOptions::default()).unwrap();
        assert!((r.value - PI / 2.0).abs() < 1e-9, "{}", r.value);
    }

    #[test]
    fn breakpoints_handle_kinks() {
        let r = integrate_with_breaks(|x: f64| x.abs(), &[-1.0, 0.0, 2.0], QuadOptions::default()).unwrap();
        assert!((r.value - 2.5).abs() < 1e-14);
        assert_eq!(r.panels, 2);
    }

    #[test]
    fn budget_exhaustion_is_reported() {
        let opts = QuadOptions { abs_tol: 1e-300, rel_tol: 1e-300, max_panels: 4 };
        let err = integrate(|x: f64| (1.0 / x.max(1e-300)).sqrt(), 0.0, 1.0, opts).unwrap_err();
        assert!(matches!(err, Error::QuadratureFailure { .. }));
    }

    #[test]
    fn fixed_rule_matches_adaptive_on_smooth_input() {
        let fixed = gauss_kronrod_fixed(|x: f64| x.sin(), 0.0, PI, 4);
        assert!((fixed - 2.0).abs() < 1e-14);
    }
}
