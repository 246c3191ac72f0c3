//! Besse metrics written in arclength form.
//!
//! In the coordinate `R ∈ [0, π]` the metric is
//! `((m+n)/2 + h(cos R))² dR² + sin²R dθ²`.  Arclength is
//! `s(R) = (m+n)/2·R + Σ a_k I_k(R)` with `I_k(R) = ∫₀^R cos^k`, which is
//! inverted by safeguarded Newton iteration.

use serde::{Deserialize, Serialize};

use super::{Jet, OrbifoldSignature};
use crate::error::{Error, Result};

/// Odd function `h(v) = ((m-n)/2) v + Σ_j c_j (v^{2j+1} - v)` together with
/// the signature it belongs to.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BesseSpec {
    pub signature: OrbifoldSignature,
    /// Coefficients `c_1, c_2, …` of the odd corrections.
    pub coeffs: Vec<f64>,
}

const CHECK_GRID: usize = 4001;

impl BesseSpec {
    pub fn new(signature: OrbifoldSignature, coeffs: Vec<f64>) -> Self {
        Self { signature, coeffs }
    }

    /// The linear member `h(v) = ((m-n)/2) v`.
    pub fn linear(signature: OrbifoldSignature) -> Self {
        Self::new(signature, Vec::new())
    }

    /// Power-series coefficients of `h`; entry `j` multiplies `v^(2j+1)`.
    fn odd_powers(&self) -> Vec<f64> {
        let sig = &self.signature;
        let mut a = Vec::with_capacity(self.coeffs.len() + 1);
        a.push(0.5 * (sig.m() as f64 - sig.n() as f64) - self.coeffs.iter().sum::<f64>());
        a.extend_from_slice(&self.coeffs);
        a
    }

    pub fn h(&self, v: f64) -> f64 {
        horner_odd(&self.odd_powers(), v).0
    }

    pub fn h_prime(&self, v: f64) -> f64 {
        horner_odd(&self.odd_powers(), v).1
    }

    /// Verifies `|h| < (m+n)/2` on a dense grid of `[-1, 1]`.
    pub fn check(&self) -> Result<()> {
        if self.coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidParameter("non-finite Besse coefficient".into()));
        }
        let bound = 0.5 * self.signature.order() as f64;
        let a = self.odd_powers();
        for i in 0..CHECK_GRID {
            let v = -1.0 + 2.0 * i as f64 / (CHECK_GRID - 1) as f64;
            let value = horner_odd(&a, v).0;
            if value.abs() >= bound {
                return Err(Error::RangeViolation { v, value, bound });
            }
        }
        Ok(())
    }
}

/// Evaluates `Σ a_j v^(2j+1)` and its derivative.
fn horner_odd(a: &[f64], v: f64) -> (f64, f64) {
    let v2 = v * v;
    let (mut p, mut dp) = (0.0, 0.0);
    for (j, &c) in a.iter().enumerate().rev() {
        p = p * v2 + c;
        dp = dp * v2 + (2 * j + 1) as f64 * c;
    }
    (p * v, dp)
}

/// Precomputed data for evaluating a Besse profile in arclength.
#[derive(Debug, Clone)]
pub(crate) struct BesseCurve {
    half_order: f64,
    powers: Vec<f64>,
    length: f64,
}

impl BesseCurve {
    pub(crate) fn new(spec: &BesseSpec) -> Self {
        let half_order = 0.5 * spec.signature.order() as f64;
        let powers = spec.odd_powers();
        let mut curve = Self { half_order, powers, length: 0.0 };
        curve.length = curve.arclength(std::f64::consts::PI);
        curve
    }

    pub(crate) fn length(&self) -> f64 {
        self.length
    }

    /// `w(R) = ds/dR`.
    fn speed(&self, cos_r: f64) -> f64 {
        self.half_order + horner_odd(&self.powers, cos_r).0
    }

    fn arclength(&self, big_r: f64) -> f64 {
        let (sin_r, cos_r) = big_r.sin_cos();
        // I_1 = sin R, I_k = cos^{k-1} R sin R / k + (k-1)/k I_{k-2}.
        let mut integral = sin_r;
        let mut cos_pow = 1.0;
        let mut s = self.half_order * big_r + self.powers[0] * integral;
        for (j, &a) in self.powers.iter().enumerate().skip(1) {
            let k = (2 * j + 1) as f64;
            cos_pow *= cos_r * cos_r;
            integral = cos_pow * sin_r / k + (k - 1.0) / k * integral;
            s += a * integral;
        }
        s
    }

    /// Inverts `s(R)` on `[0, π]`.
    pub(crate) fn angle(&self, s: f64) -> f64 {
        let pi = std::f64::consts::PI;
        if s <= 0.0 {
            return 0.0;
        }
        if s >= self.length {
            return pi;
        }
        let (mut lo, mut hi) = (0.0, pi);
        let mut big_r = pi * s / self.length;
        for _ in 0..100 {
            let g = self.arclength(big_r) - s;
            if g > 0.0 {
                hi = big_r;
            } else {
                lo = big_r;
            }
            let step = g / self.speed(big_r.cos());
            let mut next = big_r - step;
            if !(next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
            let done = (next - big_r).abs() <= 4.0 * f64::EPSILON * big_r.max(1.0);
            big_r = next;
            if done {
                break;
            }
        }
        big_r
    }

    pub(crate) fn jet(&self, s: f64) -> Jet {
        let big_r = self.angle(s);
        let (sin_r, cos_r) = big_r.sin_cos();
        let (h, dh) = horner_odd(&self.powers, cos_r);
        let w = self.half_order + h;
        Jet {
            r: sin_r.max(0.0),
            dr: cos_r / w,
            ddr: -sin_r / (w * w) + cos_r * sin_r * dh / (w * w * w),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn sig(m: u32, n: u32) -> OrbifoldSignature {
        OrbifoldSignature::new(m, n).unwrap()
    }

    #[test]
    fn h_is_odd_with_cone_limits() {
        let spec = BesseSpec::new(sig(5, 2), vec![0.3, -0.2]);
        for v in [0.1, 0.5, 0.9] {
            assert!((spec.h(v) + spec.h(-v)).abs() < 1e-15);
        }
        assert!((spec.h(1.0) - 1.5).abs() < 1e-14);
        assert!((spec.h(-1.0) + 1.5).abs() < 1e-14);
    }

    #[test]
    fn derivative_matches_difference_quotient() {
        let spec = BesseSpec::new(sig(2, 3), vec![0.4, 0.1, -0.05]);
        let v = 0.37;
        let fd = (spec.h(v + 1e-6) - spec.h(v - 1e-6)) / 2e-6;
        assert!((fd - spec.h_prime(v)).abs() < 1e-8);
    }

    #[test]
    fn range_violation_detected() {
        let spec = BesseSpec::new(sig(1, 1), vec![3.0]);
        assert!(matches!(spec.check(), Err(Error::RangeViolation { .. })));
    }

    #[test]
    fn arclength_recurrence_matches_quadrature() {
        let spec = BesseSpec::new(sig(2, 3), vec![0.4, -0.3, 0.2]);
        let curve = BesseCurve::new(&spec);
        let big_r = 1.234;
        let n = 20000;
        let h = big_r / n as f64;
        let mut acc = 0.0;
        for i in 0..n {
            let x = (i as f64 + 0.5) * h;
            acc += curve.speed(x.cos()) * h;
        }
        assert!((curve.arclength(big_r) - acc).abs() < 1e-8);
        assert!((curve.length() - 2.5 * PI).abs() < 1e-13);
    }

    #[test]
    fn inversion_round_trips() {
        let curve = BesseCurve::new(&BesseSpec::new(sig(3, 3), vec![0.7]));
        for big_r in [1e-9, 0.3, 1.5, 2.9, PI - 1e-9] {
            let s = curve.arclength(big_r);
            assert!((curve.angle(s) - big_r).abs() < 1e-13);
        }
    }
}
