//! Riemannian area and contact volume of the unit tangent bundle.

use std::f64::consts::{PI, TAU};

use serde::Serialize;

use crate::error::Result;
use crate::genfun::{GeneratingFunction, GenfunEval, IntegralEvaluator};
use crate::numeric::quad::{integrate_with_breaks, QuadOptions};
use crate::profile::MetricProfile;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VolumeReport {
    pub area: f64,
    pub vol_direct: f64,
    pub vol_decomposed: f64,
    /// Volume of the flow saturation of the annulus, `L ∫ τ dη`.
    pub saturated_part: f64,
    pub gamma_part: f64,
    pub rel_mismatch: f64,
    /// `L ∫ τ dη` by trapezoid sums on a generating-function grid, if one
    /// was supplied.
    pub saturated_from_grid: Option<f64>,
}

/// `∫₀^M 2π r(s) ds`.
pub fn area(p: &MetricProfile) -> Result<f64> {
    let mut points = vec![0.0];
    points.extend(p.breakpoints().into_iter().filter(|&s| s > 0.0 && s < p.length()));
    points.push(p.length());
    points.sort_by(f64::total_cmp);
    let r = integrate_with_breaks(|s| TAU * p.r(s), &points, QuadOptions::with_rel_tol(1e-12))?;
    Ok(r.value)
}

pub fn contact_volume_direct(p: &MetricProfile) -> Result<f64> {
    Ok(TAU * area(p)?)
}

/// Relative tolerance for the outer `η`-integral of `F`.
const OUTER_REL_TOL: f64 = 1e-10;

/// Evaluates the decomposition
/// `vol = 4L ∫₀¹ F dη - (m+n)L² + ∫_Γ (4πr - 2L cos β) dβ ds`
/// and compares it with `2π · area`.
pub fn contact_volume_decomposed(
    p: &MetricProfile,
    eval: &IntegralEvaluator<'_>,
    grid: Option<&GeneratingFunction>,
) -> Result<VolumeReport> {
    let ann = eval.annulus();
    let (l, r0) = (ann.length, ann.r0);
    let area = area(p)?;
    let vol_direct = TAU * area;

    let mut failure = None;
    let int_f = integrate_with_breaks(
        |eta| match eval.f_fp(eta) {
            Ok((f, _)) => f,
            Err(e) => {
                failure.get_or_insert(e);
                0.0
            }
        },
        &[0.0, 0.5, 1.0],
        QuadOptions::with_rel_tol(OUTER_REL_TOL),
    )?
    .value;
    if let Some(e) = failure {
        return Err(e);
    }
    let endpoint = eval.endpoint()?;

    let gamma_part = eval.integrate_gamma(|s| {
        let r = p.r(s);
        let ratio = (r0 / r).min(1.0);
        let cos_part = ((r - r0) * (r + r0)).max(0.0).sqrt() / r;
        4.0 * PI * r * 2.0 * ratio.acos() - 2.0 * l * 2.0 * cos_part
    })?;

    let saturated_part = 4.0 * l * int_f - 2.0 * l * endpoint;
    let vol_decomposed = 4.0 * l * int_f - ann.signature.order() as f64 * l * l + gamma_part;
    Ok(VolumeReport {
        area,
        vol_direct,
        vol_decomposed,
        saturated_part,
        gamma_part,
        rel_mismatch: (vol_direct - vol_decomposed).abs() / vol_direct,
        saturated_from_grid: grid.map(saturated_from_grid),
    })
}

/// `L ∫ (F - ηF') dη` by the trapezoid rule over the grid nodes.
pub fn saturated_from_grid(g: &GeneratingFunction) -> f64 {
    let tau: Vec<f64> = (0..g.eta_grid.len()).map(|i| g.tau(i)).collect();
    let sum: f64 = g
        .eta_grid
        .windows(2)
        .zip(tau.windows(2))
        .map(|(e, t)| 0.5 * (e[1] - e[0]) * (t[0] + t[1]))
        .sum();
    g.length * sum
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::annulus::Annulus;
    use crate::profile::{make_besse, make_dumbbell, make_round, perturb_poles, BesseSpec, OrbifoldSignature};

    fn report(p: &MetricProfile) -> VolumeReport {
        let ann = Annulus::new(p).unwrap();
        let ev = IntegralEvaluator::new(p, ann, 1e-11).unwrap();
        contact_volume_decomposed(p, &ev, None).unwrap()
    }

    #[test]
    fn round_sphere() {
        let p = make_round();
        assert!((area(&p).unwrap() - 4.0 * PI).abs() < 1e-12);
        assert!((contact_volume_direct(&p).unwrap() - 8.0 * PI * PI).abs() < 1e-11);
        let r = report(&p);
        assert_eq!(r.gamma_part, 0.0);
        assert!(r.rel_mismatch < 1e-9, "{r:?}");
    }

    #[test]
    fn besse_area_and_volume() {
        let sig = OrbifoldSignature::new(2, 3).unwrap();
        let p = make_besse(BesseSpec::new(sig, vec![0.2, -0.05])).unwrap();
        assert!((area(&p).unwrap() - 10.0 * PI).abs() < 1e-9);
        assert!((contact_volume_direct(&p).unwrap() - 20.0 * PI * PI).abs() < 1e-8);
        assert!(report(&p).rel_mismatch < 1e-6);
    }

    #[test]
    fn dumbbell_has_gamma_part() {
        let r = report(&make_dumbbell(0.5).unwrap());
        assert!(r.gamma_part > 0.0);
        assert!(r.rel_mismatch < 1e-5, "{r:?}");
    }

    #[test]
    fn perturbed_identity_and_grid_diagnostic() {
        let sig = OrbifoldSignature::new(2, 3).unwrap();
        let p = perturb_poles(&make_round(), sig, 0.3, 0.3).unwrap();
        let ann = Annulus::new(&p).unwrap();
        let ev = IntegralEvaluator::new(&p, ann, 1e-11).unwrap();
        let g = crate::genfun::genfun_from_integral(&ev, &crate::annulus::chebyshev_grid(401, 1e-5)).unwrap();
        let r = contact_volume_decomposed(&p, &ev, Some(&g)).unwrap();
        assert!(r.rel_mismatch < 1e-5, "{r:?}");
        let grid = r.saturated_from_grid.unwrap();
        assert!((grid - r.saturated_part).abs() < 1e-3 * r.saturated_part);
    }

    #[test]
    fn shrinking_caps_decrease_area() {
        let sig = OrbifoldSignature::new(1, 1).unwrap();
        let base = area(&make_round()).unwrap();
        let shrunk = area(&perturb_poles(&make_round(), sig, 0.3, -0.1).unwrap()).unwrap();
        assert!(shrunk < base);
    }
}
