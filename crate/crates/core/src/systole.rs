//! Closed geodesics up to a length cutoff and the systolic ratios built
//! from them.
//!
//! Non-equatorial closed geodesics are found on the annulus: the orbit
//! through `(ξ, η)` closes after `q` returns iff `F'(η) + αL/2 = pL/q` for an
//! integer `p`.  Each geometric geodesic meets the annulus in both
//! orientations, so only `η < 0` is searched.

use rayon::prelude::*;
use serde::Serialize;

use crate::annulus::AnnulusPoint;
use crate::error::{Error, Result};
use crate::flow::{self, EventSpec, FlowOptions};
use crate::genfun::{refine_level, CriticalSet, GeneratingFunction, GenfunEval, IntegralEvaluator};
use crate::profile::{gcd, MetricProfile, OrbifoldSignature};
use crate::topology::{class_of_winding, divisors, in_subgroup_of_order, integral_winding, HomotopyClass};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum GeodesicKind {
    /// `i`-th iterate of the parallel at `s`.
    EquatorIterate { i: u32, s: f64 },
    Meridian,
    Oscillating,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClosedGeodesic {
    pub kind: GeodesicKind,
    pub eta: Option<f64>,
    /// Annulus returns per closure.
    pub q: u32,
    pub length: f64,
    pub total_winding: i64,
    pub homotopy: HomotopyClass,
    /// Member of a rotation family.
    pub family: bool,
    /// Class assigned from a limiting winding rather than a closure test.
    pub class_from_limit: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnumOptions {
    pub cutoff: f64,
    pub q_max: u32,
    pub flow: FlowOptions,
    /// Phase-space tolerance of the direct closure test.
    pub closure_tol: f64,
    /// `|F' + αL/2 - pL/q| / L` below which a grid value counts as on-level.
    pub plateau_tol: f64,
    /// Roots closer than this to `η = 0` belong to the meridian family.
    pub meridian_gap: f64,
    /// Narrowest interval the local subdivision may produce.
    pub min_width: f64,
}

impl EnumOptions {
    /// Defaults: cutoff `3(m+n)L`, `q_max = 2(2-α)`.
    pub fn defaults_for(sig: OrbifoldSignature, length: f64) -> Self {
        Self {
            cutoff: 3.0 * sig.order() as f64 * length,
            q_max: 2 * (2 - sig.alpha()),
            // The closure test integrates several returns, some grazing the
            // cone points, so it runs tighter than the return map.
            flow: FlowOptions { rel_tol: 1e-12, abs_tol: 1e-14, ..FlowOptions::default() },
            closure_tol: 1e-6,
            plateau_tol: 1e-8,
            meridian_gap: 1e-9,
            min_width: 1e-9,
        }
    }
}

/// Candidate that failed the direct closure or integrality test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Rejected {
    pub eta: f64,
    pub p: i64,
    pub q: u32,
    pub defect: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Enumeration {
    pub geodesics: Vec<ClosedGeodesic>,
    pub rejected: Vec<Rejected>,
    /// Points added by local subdivision of the `F'` grid.
    pub subdivisions: usize,
    /// Largest closure defect among accepted oscillating geodesics.
    pub max_closure_defect: f64,
}

#[derive(Debug, Clone, Copy)]
struct Sample {
    eta: f64,
    fp: f64,
}

/// Samples of `F'` on `η ≤ 0`, subdivided until neighbouring values differ
/// by at most `L/(2 q_max)`.
fn samples(g: &GeneratingFunction, eval: &dyn GenfunEval, opts: &EnumOptions) -> Result<(Vec<Sample>, usize)> {
    let mut base: Vec<Sample> = g
        .eta_grid
        .iter()
        .zip(&g.fp)
        .filter(|(e, fp)| **e <= 0.0 && fp.is_finite())
        .map(|(&eta, &fp)| Sample { eta, fp })
        .collect();
    base.sort_by(|a, b| a.eta.total_cmp(&b.eta));
    let max_jump = g.length / (2.0 * opts.q_max as f64);
    let mut out = vec![base[0]];
    let mut added = 0;
    for w in base.windows(2) {
        let mut stack = vec![(w[0], w[1])];
        while let Some((a, b)) = stack.pop() {
            let jump = (b.fp - a.fp).abs();
            if jump <= max_jump {
                out.push(b);
                continue;
            }
            if b.eta - a.eta < opts.min_width {
                return Err(Error::GridTooCoarse { eta: a.eta, jump: jump / g.length });
            }
            let eta = 0.5 * (a.eta + b.eta);
            let mid = Sample { eta, fp: eval.f_fp(eta)?.1 };
            added += 1;
            // Right half is pushed first so the left half is emitted first.
            stack.push((mid, b));
            stack.push((a, mid));
        }
    }
    Ok((out, added))
}

struct Candidate {
    eta: f64,
    p: i64,
    q: u32,
}

fn level_roots(samples: &[Sample], level: f64, tol: f64, p: i64, q: u32, eval: &dyn GenfunEval) -> Result<Vec<Candidate>> {
    let sgn = |v: f64| if v.abs() <= tol { 0 } else if v > 0.0 { 1 } else { -1 };
    let r: Vec<f64> = samples.iter().map(|s| s.fp - level).collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < samples.len() {
        if sgn(r[i]) == 0 {
            let start = i;
            while i + 1 < samples.len() && sgn(r[i + 1]) == 0 {
                i += 1;
            }
            // A run of on-level samples is one family; take its midpoint.
            let eta = 0.5 * (samples[start].eta + samples[i].eta);
            out.push(Candidate { eta, p, q });
        } else if i + 1 < samples.len() && sgn(r[i + 1]) == -sgn(r[i]) {
            let (a, b) = (samples[i], samples[i + 1]);
            let eta = refine_level(eval, a.eta, b.eta, a.fp, b.fp, level)?;
            out.push(Candidate { eta, p, q });
        }
        i += 1;
    }
    Ok(out)
}

/// Integrates the candidate for `q` returns and measures how far it lands
/// from its starting point.  Returns `(defect, winding)`.
pub fn closure_defect(p: &MetricProfile, ann: &crate::annulus::Annulus, eta: f64, length: f64, opts: &FlowOptions) -> Result<(f64, f64)> {
    let x0 = ann.phase_point(AnnulusPoint { xi: 0.0, eta });
    let tr = flow::integrate(p, x0, length, &EventSpec::default(), opts)?;
    let (t, x1) = tr.last();
    if (t - length).abs() > 1e-9 * length {
        return Ok((f64::INFINITY, f64::NAN));
    }
    Ok((x0.phase_distance(&x1), (x1.theta - x0.theta) / std::f64::consts::TAU))
}

/// Enumerates closed geodesics of length at most `opts.cutoff`.
pub fn enumerate_closed(
    p: &MetricProfile,
    g: &GeneratingFunction,
    eval: &IntegralEvaluator<'_>,
    critical: &CriticalSet,
    opts: &EnumOptions,
) -> Result<Enumeration> {
    let sig = p.signature();
    let ann = *eval.annulus();
    let l = ann.length;
    let alpha = sig.alpha();
    let mut geodesics = equator_iterates(p, opts.cutoff)?;
    let mut rejected = Vec::new();
    let mut subdivisions = 0;
    let mut max_defect = 0.0f64;

    let flat_mu = match critical {
        CriticalSet::AllCritical { mu } => Some(*mu),
        CriticalSet::Points(_) => None,
    };
    if let Some(mu) = flat_mu {
        // Every non-equatorial geodesic closes after 1+α returns.
        let q = 1 + alpha;
        let length = q as f64 * mu;
        let winding = i64::from(q * sig.order()) / 2;
        if length <= opts.cutoff {
            let (defect, _) = closure_defect(p, &ann, -0.5, length, &opts.flow)?;
            max_defect = max_defect.max(defect);
            geodesics.push(ClosedGeodesic {
                kind: GeodesicKind::Oscillating,
                eta: None,
                q,
                length,
                total_winding: winding,
                homotopy: class_of_winding(winding, sig),
                family: true,
                class_from_limit: false,
            });
        }
    } else {
        let q = 1 + alpha;
        let length = q as f64 * 2.0 * p.length();
        if length <= opts.cutoff {
            let winding = i64::from(q * sig.order()) / 2;
            geodesics.push(ClosedGeodesic {
                kind: GeodesicKind::Meridian,
                eta: Some(0.0),
                q,
                length,
                total_winding: winding,
                homotopy: class_of_winding(winding, sig),
                family: true,
                class_from_limit: true,
            });
        }

        let (samples, added) = samples(g, eval, opts)?;
        subdivisions = added;
        let shift = 0.5 * alpha as f64 * l;
        let (lo, hi) = samples.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), s| {
            (lo.min(s.fp + shift), hi.max(s.fp + shift))
        });
        let mut levels = Vec::new();
        for q in 1..=opts.q_max {
            let qf = q as f64;
            let p_lo = (qf * lo / l).ceil() as i64;
            let p_hi = (qf * hi / l).floor() as i64;
            for pp in p_lo..=p_hi {
                if gcd(pp.unsigned_abs() as u32, q) == 1 {
                    levels.push((pp, q));
                }
            }
        }
        let tol = opts.plateau_tol * l;
        let found: Vec<Vec<Candidate>> = levels
            .par_iter()
            .map(|&(pp, q)| level_roots(&samples, pp as f64 * l / q as f64 - shift, tol, pp, q, eval))
            .collect::<Result<_>>()?;
        let candidates: Vec<Candidate> =
            found.into_iter().flatten().filter(|c| c.eta.abs() >= opts.meridian_gap && c.eta < 0.0).collect();

        let checked: Vec<std::result::Result<(ClosedGeodesic, f64), Rejected>> = candidates
            .par_iter()
            .map(|c| -> Result<_> {
                let (f, fp) = eval.f_fp(c.eta)?;
                let length = c.q as f64 * (f - c.eta * fp);
                if length > opts.cutoff {
                    return Ok(None);
                }
                let winding = c.p + i64::from(c.q * (sig.order() - alpha)) / 2;
                let (defect, ode_winding) = closure_defect(p, &ann, c.eta, length, &opts.flow)?;
                let gate = integral_winding(ode_winding, opts.closure_tol);
                if defect > opts.closure_tol || gate != Some(winding) {
                    log::warn!("closure test failed at eta={} (p={}, q={}): defect {defect:e}", c.eta, c.p, c.q);
                    return Ok(Some(Err(Rejected { eta: c.eta, p: c.p, q: c.q, defect })));
                }
                Ok(Some(Ok((
                    ClosedGeodesic {
                        kind: GeodesicKind::Oscillating,
                        eta: Some(c.eta),
                        q: c.q,
                        length,
                        total_winding: winding,
                        homotopy: class_of_winding(winding, sig),
                        family: true,
                        class_from_limit: false,
                    },
                    defect,
                ))))
            })
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .flatten()
            .collect();
        for item in checked {
            match item {
                Ok((geo, defect)) => {
                    max_defect = max_defect.max(defect);
                    geodesics.push(geo);
                }
                Err(r) => rejected.push(r),
            }
        }
    }

    if !eval.gamma_intervals().is_empty() {
        log::warn!("closed geodesics confined to {{r > r(s0)}} never meet the annulus and are not enumerated");
    }
    geodesics.sort_by(|a, b| a.length.total_cmp(&b.length).then(a.eta.unwrap_or(0.0).total_cmp(&b.eta.unwrap_or(0.0))));
    Ok(Enumeration { geodesics, rejected, subdivisions, max_closure_defect: max_defect })
}

/// Iterates of every parallel through a critical point of `r`.
pub fn equator_iterates(p: &MetricProfile, cutoff: f64) -> Result<Vec<ClosedGeodesic>> {
    let sig = p.signature();
    let mut out = Vec::new();
    for eq in p.equators()?.list {
        let mut i = 1u32;
        while i as f64 * eq.length() <= cutoff {
            out.push(ClosedGeodesic {
                kind: GeodesicKind::EquatorIterate { i, s: eq.s },
                eta: None,
                q: 1,
                length: i as f64 * eq.length(),
                total_winding: i64::from(i),
                homotopy: class_of_winding(i64::from(i), sig),
                family: false,
                class_from_limit: false,
            });
            i += 1;
        }
    }
    Ok(out)
}

/// Shortest closed geodesic, iterates included, whose class lies in the
/// subgroup of order `k`.
pub fn l_min_in_class(geodesics: &[ClosedGeodesic], sig: OrbifoldSignature, k: u32, cutoff: f64) -> Result<f64> {
    let order = sig.order();
    if !order.is_multiple_of(k) {
        return Err(Error::NotADivisor { k, order });
    }
    let mut best = f64::INFINITY;
    for g in geodesics {
        for j in 1..=order {
            if in_subgroup_of_order(g.homotopy.iterate(j), k)? {
                best = best.min(j as f64 * g.length);
                break;
            }
        }
    }
    if best > cutoff {
        return Err(Error::CutoffTooSmall { cutoff });
    }
    Ok(best)
}

/// `τ_1 ≤ … ≤ τ_count`: isolated orbits contribute once, a rotation family
/// saturates the sequence at its length.
pub fn tau_sequence(geodesics: &[ClosedGeodesic], count: usize, cutoff: f64) -> Result<Vec<f64>> {
    let mut sorted: Vec<&ClosedGeodesic> = geodesics.iter().collect();
    sorted.sort_by(|a, b| a.length.total_cmp(&b.length));
    let mut out = Vec::with_capacity(count);
    for g in sorted {
        if out.len() == count {
            break;
        }
        if g.family {
            out.resize(count, g.length);
        } else {
            out.push(g.length);
        }
    }
    if out.len() < count {
        return Err(Error::CutoffTooSmall { cutoff });
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Verdict {
    BelowBound,
    AtBound { tol: f64 },
    Violation,
}

/// Relative tolerance for [`Verdict::AtBound`].
pub const AT_BOUND_TOL: f64 = 1e-4;

pub fn verdict(value: f64, bound: f64) -> Verdict {
    let rel = value / bound - 1.0;
    if rel.abs() <= AT_BOUND_TOL {
        Verdict::AtBound { tol: AT_BOUND_TOL }
    } else if rel < 0.0 {
        Verdict::BelowBound
    } else {
        Verdict::Violation
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Bounds {
    /// `2(m+n)π`.
    pub contractible: f64,
    /// `(m+n)π/2`, for `m+n` even.
    pub order_two: Option<f64>,
    /// `2(m+n)π/(2-α)²`.
    pub period_spectrum: f64,
}

impl Bounds {
    pub fn for_signature(sig: OrbifoldSignature) -> Self {
        let order = sig.order() as f64;
        let pi = std::f64::consts::PI;
        let two_minus_alpha = (2 - sig.alpha()) as f64;
        Self {
            contractible: 2.0 * order * pi,
            order_two: sig.order().is_multiple_of(2).then_some(0.5 * order * pi),
            period_spectrum: 2.0 * order * pi / (two_minus_alpha * two_minus_alpha),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Verdicts {
    pub contractible: Verdict,
    pub order_two: Option<Verdict>,
    pub period_spectrum: Verdict,
}

impl Verdicts {
    pub fn any_violation(&self) -> bool {
        [Some(self.contractible), self.order_two, Some(self.period_spectrum)]
            .iter()
            .flatten()
            .any(|v| matches!(v, Verdict::Violation))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SystoleReport {
    pub signature: OrbifoldSignature,
    pub area: f64,
    pub length: f64,
    pub cutoff: f64,
    pub geodesics: Vec<ClosedGeodesic>,
    pub l_min: f64,
    pub l_min_contr: f64,
    /// `(k, ℓ_min,k)` for every divisor `k` of `m+n`.
    pub l_min_k: Vec<(u32, f64)>,
    pub tau_seq: Vec<f64>,
    pub rho_contr: f64,
    pub rho_contr_k: Vec<(u32, f64)>,
    /// `τ²_{(m+n)/(2-α)} / area`.
    pub rho_periodspec: f64,
    pub rho_sys: f64,
    /// `ρ_contr / (2π(m+n))`, the ratio of the lifted contact form.
    pub rho_s3: f64,
    pub bounds: Bounds,
    pub verdicts: Verdicts,
}

impl SystoleReport {
    pub fn rho_k(&self, k: u32) -> Option<f64> {
        self.rho_contr_k.iter().find(|(d, _)| *d == k).map(|(_, v)| *v)
    }
}

/// Assembles all ratios and verdicts from an enumeration.
pub fn ratios(sig: OrbifoldSignature, area: f64, length: f64, geodesics: Vec<ClosedGeodesic>, cutoff: f64) -> Result<SystoleReport> {
    let order = sig.order();
    let mut l_min_k = Vec::new();
    for k in divisors(order) {
        l_min_k.push((k, l_min_in_class(&geodesics, sig, k, cutoff)?));
    }
    let l_min_contr = l_min_k[0].1;
    let l_min = geodesics.iter().map(|g| g.length).fold(f64::INFINITY, f64::min);
    let count = (order / (2 - sig.alpha())) as usize;
    let tau_seq = tau_sequence(&geodesics, count, cutoff)?;
    let rho = |l: f64| l * l / area;
    let rho_contr = rho(l_min_contr);
    let rho_contr_k: Vec<(u32, f64)> = l_min_k.iter().map(|&(k, l)| (k, rho(l))).collect();
    let rho_periodspec = rho(tau_seq[count - 1]);
    let bounds = Bounds::for_signature(sig);
    let rho_two = rho_contr_k.iter().find(|(k, _)| *k == 2).map(|(_, v)| *v);
    let verdicts = Verdicts {
        contractible: verdict(rho_contr, bounds.contractible),
        order_two: bounds.order_two.zip(rho_two).map(|(b, v)| verdict(v, b)),
        period_spectrum: verdict(rho_periodspec, bounds.period_spectrum),
    };
    Ok(SystoleReport {
        signature: sig,
        area,
        length,
        cutoff,
        geodesics,
        l_min,
        l_min_contr,
        l_min_k,
        tau_seq,
        rho_contr,
        rho_contr_k,
        rho_periodspec,
        rho_sys: rho(l_min),
        rho_s3: rho_contr / (std::f64::consts::TAU * order as f64),
        bounds,
        verdicts,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::annulus::{chebyshev_grid, Annulus};
    use crate::genfun::{critical_points, genfun_from_integral};
    use crate::measure::area;
    use crate::profile::{make_besse, make_round, perturb_poles, BesseSpec};
    use std::f64::consts::PI;

    fn sig(m: u32, n: u32) -> OrbifoldSignature {
        OrbifoldSignature::new(m, n).unwrap()
    }

    fn run(p: &MetricProfile, cutoff: Option<f64>, q_max: Option<u32>) -> (Enumeration, SystoleReport) {
        let ann = Annulus::new(p).unwrap();
        let ev = IntegralEvaluator::new(p, ann, 1e-11).unwrap();
        let g = genfun_from_integral(&ev, &chebyshev_grid(201, 1e-5)).unwrap();
        let crit = critical_points(&g, &ev).unwrap();
        let mut opts = EnumOptions::defaults_for(p.signature(), ann.length);
        if let Some(c) = cutoff {
            opts.cutoff = c;
        }
        if let Some(q) = q_max {
            opts.q_max = q;
        }
        let e = enumerate_closed(p, &g, &ev, &crit, &opts).unwrap();
        let r = ratios(p.signature(), area(p).unwrap(), ann.length, e.geodesics.clone(), opts.cutoff).unwrap();
        (e, r)
    }

    #[test]
    fn besse_two_one() {
        let p = make_besse(BesseSpec::new(sig(2, 1), vec![0.1])).unwrap();
        let (e, r) = run(&p, Some(20.0 * PI), Some(4));
        let fam: Vec<_> = e.geodesics.iter().filter(|g| g.family).collect();
        assert_eq!(fam.len(), 1);
        assert!((fam[0].length - 6.0 * PI).abs() < 1e-6);
        assert_eq!(fam[0].total_winding, 3);
        assert!(fam[0].homotopy.is_contractible());
        assert!(e.max_closure_defect < 1e-6);
        let eq: Vec<f64> = e.geodesics.iter().filter(|g| !g.family).map(|g| g.length).collect();
        for (i, l) in eq.iter().enumerate() {
            assert!((l - 2.0 * PI * (i + 1) as f64).abs() < 1e-9);
        }
        assert!((r.rho_contr - 6.0 * PI).abs() < 1e-5);
        assert!(matches!(r.verdicts.contractible, Verdict::AtBound { .. }));
        assert!(matches!(r.verdicts.period_spectrum, Verdict::AtBound { .. }));
        for (t, want) in r.tau_seq.iter().zip([2.0, 4.0, 6.0]) {
            assert!((t - want * PI).abs() < 1e-6);
        }
    }

    #[test]
    fn round_sphere() {
        let (e, r) = run(&make_round(), Some(10.0 * PI), None);
        assert!(e.geodesics.iter().any(|g| g.family && (g.length - 2.0 * PI).abs() < 1e-8 && g.total_winding == 1));
        assert_eq!(e.geodesics.iter().filter(|g| !g.family).count(), 5);
        assert!((r.l_min_contr - 4.0 * PI).abs() < 1e-8);
        assert_eq!(r.tau_seq.len(), 1);
        assert!((r.tau_seq[0] - 2.0 * PI).abs() < 1e-8);
    }

    #[test]
    fn besse_one_three_order_two() {
        let p = make_besse(BesseSpec::new(sig(1, 3), vec![0.2])).unwrap();
        let (_, r) = run(&p, None, None);
        assert!((r.rho_k(2).unwrap() - 2.0 * PI).abs() < 1e-5);
        assert!(matches!(r.verdicts.order_two, Some(Verdict::AtBound { .. })));
        assert!((r.rho_k(4).unwrap() - 0.5 * PI).abs() < 1e-6);
    }

    #[test]
    fn perturbed_round_has_short_contractible_geodesic() {
        let p = perturb_poles(&make_round(), sig(1, 1), 0.3, -0.1).unwrap();
        let (e, r) = run(&p, None, None);
        let prime = e
            .geodesics
            .iter()
            .filter(|g| matches!(g.kind, GeodesicKind::Oscillating) && g.q == 1)
            .min_by(|a, b| a.length.total_cmp(&b.length))
            .expect("oscillating geodesic at a critical point of F");
        assert_eq!(prime.total_winding, 1);
        assert!(prime.length < 2.0 * PI);
        assert!(prime.homotopy.iterate(2).is_contractible());
        assert!((r.l_min_contr - 2.0 * prime.length).abs() < 1e-12);
        assert!(e.rejected.is_empty());
        assert!(matches!(r.verdicts.contractible, Verdict::BelowBound));
    }

    #[test]
    fn perturbed_two_three_below_bound() {
        let p = perturb_poles(&make_round(), sig(2, 3), 0.4, 0.3).unwrap();
        let (e, r) = run(&p, None, None);
        assert!(e.rejected.is_empty(), "{:?}", e.rejected);
        assert!(r.rho_contr < 10.0 * PI);
        assert!(matches!(r.verdicts.contractible, Verdict::BelowBound));
        assert!(!r.verdicts.any_violation());
    }

    #[test]
    fn tau_sequence_saturates_at_family() {
        let s = sig(2, 3);
        let mk = |length: f64, family: bool| ClosedGeodesic {
            kind: GeodesicKind::Oscillating,
            eta: None,
            q: 1,
            length,
            total_winding: 1,
            homotopy: class_of_winding(1, s),
            family,
            class_from_limit: false,
        };
        let seq = tau_sequence(&[mk(1.0, false), mk(3.0, true), mk(2.0, false)], 5, 10.0).unwrap();
        assert_eq!(seq, vec![1.0, 2.0, 3.0, 3.0, 3.0]);
        assert!(tau_sequence(&[mk(1.0, false)], 2, 10.0).is_err());
    }

    #[test]
    fn verdict_bands() {
        assert!(matches!(verdict(1.0, 2.0), Verdict::BelowBound));
        assert!(matches!(verdict(2.0001, 2.0), Verdict::AtBound { .. }));
        assert!(matches!(verdict(2.1, 2.0), Verdict::Violation));
    }
}
