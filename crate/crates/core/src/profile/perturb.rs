//! Local modifications of an existing profile.

use serde::{Deserialize, Serialize};

use super::Jet;

/// A compactly supported change of the radial profile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Perturbation {
    /// Replaces `[0, eps]` and `[M - eps, M]` by caps whose end slopes are
    /// `1/m` and `-1/n`; `bulge` adds a bump of height `bulge·eps·ψ`.
    Poles { eps: f64, bulge: f64 },
    /// Multiplies `r` by `1 + amplitude·(1 - x²)⁴` with
    /// `x = (s - center) / half_width`.
    Band { center: f64, half_width: f64, amplitude: f64 },
}

/// Blend `χ(x) = 35x⁴ - 84x⁵ + 70x⁶ - 20x⁷` and its first two derivatives.
fn chi(x: f64) -> (f64, f64, f64) {
    let y = 1.0 - x;
    let x2 = x * x;
    let x3 = x2 * x;
    let value = x2 * x2 * (35.0 - 84.0 * x + 70.0 * x2 - 20.0 * x3);
    (value, 140.0 * x3 * y * y * y, 420.0 * x2 * y * y * (1.0 - 2.0 * x))
}

/// Bump `ψ(x) = 256 (x(1-x))⁴` and its first two derivatives.
fn psi(x: f64) -> (f64, f64, f64) {
    let q = x * (1.0 - x);
    let dq = 1.0 - 2.0 * x;
    let q2 = q * q;
    (256.0 * q2 * q2, 1024.0 * q2 * q * dq, 1024.0 * (3.0 * q2 * dq * dq - 2.0 * q2 * q))
}

/// Additive cap correction at distance `u ∈ [0, eps)` from a pole, as a jet in
/// `u`.  `slope_gap` is the target slope minus the base slope at the pole.
pub(crate) fn cap_correction(u: f64, eps: f64, slope_gap: f64, bulge: f64) -> Jet {
    let x = u / eps;
    let (c, dc, ddc) = chi(x);
    let (p, dp, ddp) = psi(x);
    Jet {
        r: slope_gap * u * (1.0 - c) + bulge * eps * p,
        dr: slope_gap * ((1.0 - c) - x * dc) + bulge * dp,
        ddr: -slope_gap * (2.0 * dc + x * ddc) / eps + bulge * ddp / eps,
    }
}

/// Multiplicative band factor `1 + a(1-x²)⁴` as a jet in `s`.
pub(crate) fn band_factor(s: f64, center: f64, half_width: f64, amplitude: f64) -> Jet {
    let x = (s - center) / half_width;
    if x.abs() >= 1.0 {
        return Jet { r: 1.0, dr: 0.0, ddr: 0.0 };
    }
    let y = 1.0 - x * x;
    let y3 = y * y * y;
    Jet {
        r: 1.0 + amplitude * y3 * y,
        dr: amplitude * (-8.0 * x * y3) / half_width,
        ddr: amplitude * (-8.0 * y3 + 48.0 * x * x * y * y) / (half_width * half_width),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn check_derivatives(f: impl Fn(f64) -> Jet, x: f64) {
        let h = 1e-6;
        let j = f(x);
        let (p, m) = (f(x + h), f(x - h));
        assert!(((p.r - m.r) / (2.0 * h) - j.dr).abs() < 1e-6, "dr at {x}");
        assert!(((p.dr - m.dr) / (2.0 * h) - j.ddr).abs() < 1e-5, "ddr at {x}");
    }

    #[test]
    fn cap_derivatives_consistent() {
        for x in [0.05, 0.3, 0.61, 0.9] {
            check_derivatives(|u| cap_correction(u, 0.4, -0.5, 0.3), x * 0.4);
        }
    }

    #[test]
    fn band_derivatives_consistent() {
        for s in [0.8, 1.0, 1.17] {
            check_derivatives(|s| band_factor(s, 1.0, 0.3, 0.1), s);
        }
    }

    #[test]
    fn cap_joins_smoothly() {
        let j = cap_correction(0.4 * (1.0 - 1e-12), 0.4, -0.5, 0.3);
        assert!(j.r.abs() < 1e-10 && j.dr.abs() < 1e-10 && j.ddr.abs() < 1e-8);
        let start = cap_correction(0.0, 0.4, -0.5, 0.3);
        assert_eq!(start.r, 0.0);
        assert!((start.dr + 0.5).abs() < 1e-15);
    }
}
