//! Generating function `F` of the return map on the Birkhoff annulus.
//!
//! Two independent constructions are provided: from return data through the
//! winding identity `F' = L·W - sign(η)(m+n)L/2` together with
//! `F - ηF' = τ`, and from the region integral
//! `F(η) = ∫_{r > κ} 2√(1 - κ²/r²) ds + (m+n)L|η|/2`, `κ = r₀|η|`.

use rayon::prelude::*;
use serde::Serialize;

use crate::annulus::{self, sign, Annulus, ReturnGrid, ReturnOptions};
use crate::error::{Error, Result};
use crate::numeric::quad::{integrate_with_breaks, QuadOptions};
use crate::numeric::roots::brent;
use crate::profile::{Jet, MetricProfile, OrbifoldSignature};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Route {
    FromReturnMap,
    FromIntegral,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GeneratingFunction {
    pub signature: OrbifoldSignature,
    /// Minimal equator length `L`.
    pub length: f64,
    pub eta_grid: Vec<f64>,
    pub f: Vec<f64>,
    pub fp: Vec<f64>,
    pub route: Route,
    /// `F(±1)` from the integral over `Γ = {r ≥ r₀}`; only known on the
    /// integral route.
    pub endpoint_value: Option<f64>,
}

impl GeneratingFunction {
    /// `τ = F - ηF'` at grid index `i`.
    pub fn tau(&self, i: usize) -> f64 {
        self.f[i] - self.eta_grid[i] * self.fp[i]
    }

    pub fn total_variation(&self) -> f64 {
        self.f.windows(2).map(|w| (w[1] - w[0]).abs()).sum()
    }

    pub fn is_flat(&self) -> bool {
        self.total_variation() < FLAT_TOL * self.length
    }

    /// `min_i F(η_i) - (m+n)L|η_i|/2`.
    pub fn lower_bound_margin(&self) -> f64 {
        let c = self.signature.half_order() * self.length;
        self.eta_grid.iter().zip(&self.f).map(|(e, f)| f - c * e.abs()).fold(f64::INFINITY, f64::min)
    }

    /// Largest `|F(η) - F(-η)|` and `|F'(η) + F'(-η)|` over mirrored pairs.
    pub fn symmetry_defects(&self) -> (f64, f64) {
        let (mut even, mut odd) = (0.0f64, 0.0f64);
        for (i, &eta) in self.eta_grid.iter().enumerate() {
            if eta <= 0.0 {
                continue;
            }
            if let Some(j) = self.index_of(-eta) {
                even = even.max((self.f[i] - self.f[j]).abs());
                odd = odd.max((self.fp[i] + self.fp[j]).abs());
            }
        }
        (even, odd)
    }

    pub fn index_of(&self, eta: f64) -> Option<usize> {
        self.eta_grid.iter().position(|&e| e == eta)
    }
}

/// Total variation threshold, relative to `L`, for declaring `F` constant.
pub const FLAT_TOL: f64 = 1e-6;

/// Distance from a band edge below which `r - κ` is taken from the edge jet.
/// Balances rounding noise `ε r / (r' δ)` against the neglected cubic term.
const EDGE_TAYLOR: f64 = 1e-5;

/// Anything that can evaluate `(F, F')` at a single `η`.
pub trait GenfunEval: Sync {
    fn f_fp(&self, eta: f64) -> Result<(f64, f64)>;
}

/// Direct evaluation of `F` and `F'` by one-dimensional quadrature in `s`.
#[derive(Debug, Clone)]
pub struct IntegralEvaluator<'a> {
    profile: &'a MetricProfile,
    ann: Annulus,
    /// Critical points of `r` and profile breakpoints.
    nodes: Vec<f64>,
    first_critical: f64,
    last_critical: f64,
    quad: QuadOptions,
}

impl<'a> IntegralEvaluator<'a> {
    pub fn new(profile: &'a MetricProfile, ann: Annulus, quad_rel_tol: f64) -> Result<Self> {
        let eq = profile.equators()?;
        let mut nodes: Vec<f64> = eq.list.iter().map(|e| e.s).collect();
        let first_critical = nodes[0];
        let last_critical = *nodes.last().expect("at least one equator");
        nodes.extend(profile.breakpoints());
        nodes.sort_by(f64::total_cmp);
        nodes.dedup();
        Ok(Self { profile, ann, nodes, first_critical, last_critical, quad: QuadOptions::with_rel_tol(quad_rel_tol) })
    }

    pub fn annulus(&self) -> &Annulus {
        &self.ann
    }

    /// `{s : r(s) > κ} = (a, b)` for `0 < κ < r₀`.
    pub fn band(&self, kappa: f64) -> (f64, f64) {
        let p = self.profile;
        let a = brent(|s| p.r(s) - kappa, 0.0, self.first_critical, 1e-15).unwrap_or(0.0);
        let b = brent(|s| p.r(s) - kappa, self.last_critical, p.length(), 1e-15).unwrap_or(p.length());
        (a, b)
    }

    /// Integrates `g(s, δ)` over `(a, b)` after `s = mid - h cos u`, which
    /// turns square-root endpoint behaviour into smooth behaviour in `u`.
    /// `δ` is the offset from the nearer endpoint (`s - a ≥ 0` or `s - b < 0`)
    /// computed without cancellation.
    fn integrate_band(&self, a: f64, b: f64, g: impl Fn(f64, f64) -> f64) -> Result<f64> {
        let mid = 0.5 * (a + b);
        let h = 0.5 * (b - a);
        let mut breaks = vec![0.0];
        for &s in &self.nodes {
            if s > a && s < b {
                breaks.push(((mid - s) / h).clamp(-1.0, 1.0).acos());
            }
        }
        breaks.push(std::f64::consts::PI);
        breaks.sort_by(f64::total_cmp);
        let integrand = |u: f64| {
            let (s, delta) = if u < std::f64::consts::FRAC_PI_2 {
                let d = 2.0 * h * (0.5 * u).sin().powi(2);
                (a + d, d)
            } else {
                let d = -2.0 * h * (0.5 * u).cos().powi(2);
                (b + d, d)
            };
            g(s, delta) * h * u.sin()
        };
        integrate_with_breaks(integrand, &breaks, self.quad).map(|r| r.value)
    }

    /// `r(s) - κ` inside the band `(a, b)`.  Within [`EDGE_TAYLOR`] of an
    /// endpoint the difference comes from the endpoint jet, since direct
    /// subtraction there leaves only rounding noise.
    fn excess(&self, s: f64, delta: f64, kappa: f64, edges: &(Jet, Jet)) -> f64 {
        if delta.abs() < EDGE_TAYLOR {
            let j = if delta >= 0.0 { edges.0 } else { edges.1 };
            j.dr * delta + 0.5 * j.ddr * delta * delta
        } else {
            self.profile.r(s) - kappa
        }
    }

    fn reduced_f(&self, kappa: f64) -> Result<f64> {
        let p = self.profile;
        let (a, b) = self.band(kappa);
        let edges = (p.jet(a), p.jet(b));
        self.integrate_band(a, b, |s, delta| {
            let e = self.excess(s, delta, kappa, &edges);
            if e <= 0.0 {
                return 0.0;
            }
            let r = kappa + e;
            2.0 * (e * (r + kappa)).sqrt() / r
        })
    }

    /// `∫_{r > κ} ds / (r √(r² - κ²))`.
    fn reduced_fp(&self, kappa: f64) -> Result<f64> {
        let p = self.profile;
        let (a, b) = self.band(kappa);
        let edges = (p.jet(a), p.jet(b));
        self.integrate_band(a, b, |s, delta| {
            let e = self.excess(s, delta, kappa, &edges);
            if e <= 0.0 {
                // Only reachable at δ = 0, where the transformed integrand
                // has a finite limit; the weight h sin u vanishes there.
                return 0.0;
            }
            let r = kappa + e;
            1.0 / (r * (e * (r + kappa)).sqrt())
        })
    }

    pub fn f(&self, eta: f64) -> Result<f64> {
        Ok(self.f_fp(eta)?.0)
    }

    pub fn fp(&self, eta: f64) -> Result<f64> {
        Ok(self.f_fp(eta)?.1)
    }

    /// Maximal intervals of `Γ = {r ≥ r₀}` with positive length.
    pub fn gamma_intervals(&self) -> Vec<(f64, f64)> {
        let p = self.profile;
        let r0 = self.ann.r0;
        let mut nodes = vec![0.0];
        nodes.extend(p.equators().map(|e| e.list.iter().map(|q| q.s).collect::<Vec<_>>()).unwrap_or_default());
        nodes.push(p.length());
        let value = |s: f64| if s == self.ann.s0 { 0.0 } else { p.r(s) - r0 };
        let mut cuts = Vec::new();
        for w in nodes.windows(2) {
            let (va, vb) = (value(w[0]), value(w[1]));
            if va == 0.0 {
                cuts.push(w[0]);
            }
            if va * vb < 0.0 {
                if let Some(root) = brent(|s| p.r(s) - r0, w[0], w[1], 1e-15) {
                    cuts.push(root);
                }
            }
        }
        cuts.push(0.0);
        cuts.push(p.length());
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();
        let mut out: Vec<(f64, f64)> = Vec::new();
        for w in cuts.windows(2) {
            if w[1] > w[0] && p.r(0.5 * (w[0] + w[1])) > r0 {
                match out.last_mut() {
                    Some(last) if last.1 == w[0] => last.1 = w[1],
                    _ => out.push((w[0], w[1])),
                }
            }
        }
        out
    }

    /// Integrates `g(s)` over `Γ`.
    pub fn integrate_gamma(&self, g: impl Fn(f64) -> f64) -> Result<f64> {
        let mut total = 0.0;
        for (a, b) in self.gamma_intervals() {
            total += self.integrate_band(a, b, |s, _| g(s))?;
        }
        Ok(total)
    }

    /// `F(±1) = ∫_Γ 2√(1 - r₀²/r²) ds + (m+n)L/2`.
    pub fn endpoint(&self) -> Result<f64> {
        let p = self.profile;
        let r0 = self.ann.r0;
        let gamma = self.integrate_gamma(|s| {
            let r = p.r(s);
            2.0 * ((r - r0) * (r + r0)).max(0.0).sqrt() / r
        })?;
        Ok(gamma + self.ann.signature.half_order() * self.ann.length)
    }
}

impl GenfunEval for IntegralEvaluator<'_> {
    fn f_fp(&self, eta: f64) -> Result<(f64, f64)> {
        if !(eta.abs() <= 1.0) {
            return Err(Error::EtaOutOfRange(eta));
        }
        let ann = &self.ann;
        let c = ann.signature.half_order() * ann.length;
        if eta == 0.0 {
            return Ok((2.0 * self.profile.length(), 0.0));
        }
        if eta.abs() == 1.0 {
            return Ok((self.endpoint()?, f64::NAN));
        }
        let kappa = ann.r0 * eta.abs();
        let f = self.reduced_f(kappa)? + c * eta.abs();
        let fp = sign(eta) * (c - 2.0 * kappa * ann.r0 * self.reduced_fp(kappa)?);
        Ok((f, fp))
    }
}

/// Evaluates `(F, F')` from a single first-return integration.
pub struct ReturnsEvaluator<'a> {
    pub profile: &'a MetricProfile,
    pub annulus: Annulus,
    pub options: ReturnOptions,
}

impl GenfunEval for ReturnsEvaluator<'_> {
    fn f_fp(&self, eta: f64) -> Result<(f64, f64)> {
        if eta == 0.0 {
            let d = annulus::meridian_return(self.profile, &self.annulus);
            return Ok((d.tau, 0.0));
        }
        let d = annulus::first_return(self.profile, &self.annulus, eta, &self.options)?;
        let fp = d.fp(&self.annulus);
        Ok((d.tau + eta * fp, fp))
    }
}

/// `F` and `F'` on `etas` by direct quadrature.
pub fn genfun_from_integral(eval: &IntegralEvaluator<'_>, etas: &[f64]) -> Result<GeneratingFunction> {
    let values: Vec<(f64, f64)> = etas.par_iter().map(|&eta| eval.f_fp(eta)).collect::<Result<_>>()?;
    let ann = eval.annulus();
    Ok(GeneratingFunction {
        signature: ann.signature,
        length: ann.length,
        eta_grid: etas.to_vec(),
        f: values.iter().map(|v| v.0).collect(),
        fp: values.iter().map(|v| v.1).collect(),
        route: Route::FromIntegral,
        endpoint_value: Some(eval.endpoint()?),
    })
}

/// Oddness tolerance on `F'` from return data, relative to `L`.
pub const ODDNESS_TOL: f64 = 1e-5;

/// `F` and `F'` from return data.  Censored entries and their mirror images
/// are skipped.
pub fn genfun_from_returns(grid: &ReturnGrid) -> Result<GeneratingFunction> {
    let ann = &grid.annulus;
    let censored: Vec<f64> = grid.entries.iter().filter(|e| e.censored).map(|e| e.eta.abs()).collect();
    let mut g = GeneratingFunction {
        signature: ann.signature,
        length: ann.length,
        eta_grid: Vec::new(),
        f: Vec::new(),
        fp: Vec::new(),
        route: Route::FromReturnMap,
        endpoint_value: None,
    };
    for e in &grid.entries {
        if censored.contains(&e.eta.abs()) {
            continue;
        }
        let fp = if e.eta == 0.0 { 0.0 } else { e.fp(ann) };
        g.eta_grid.push(e.eta);
        g.fp.push(fp);
        g.f.push(e.tau + e.eta * fp);
    }
    for (i, &eta) in g.eta_grid.iter().enumerate() {
        if eta > 0.0 {
            if let Some(j) = g.index_of(-eta) {
                let defect = (g.fp[i] + g.fp[j]).abs() / g.length;
                if defect > ODDNESS_TOL {
                    return Err(Error::InconsistentData { eta, defect });
                }
            }
        }
    }
    Ok(g)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CriticalKind {
    Min,
    Max,
    Inflection,
    /// `F'` vanishes on an interval of grid points.
    Plateau,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CriticalPoint {
    pub eta0: f64,
    pub mu: f64,
    pub kind: CriticalKind,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum CriticalSet {
    /// `F` is numerically constant with value `mu`.
    AllCritical { mu: f64 },
    Points(Vec<CriticalPoint>),
}

/// Relative tolerance on `|F'|/L` for grid values counted as zero.
pub const PLATEAU_TOL: f64 = 1e-9;

/// Critical points of `F` on `(-1, 1)`, refined with `eval`.
pub fn critical_points(g: &GeneratingFunction, eval: &dyn GenfunEval) -> Result<CriticalSet> {
    if g.is_flat() {
        let mu = g.f.iter().sum::<f64>() / g.f.len() as f64;
        return Ok(CriticalSet::AllCritical { mu });
    }
    let zero = PLATEAU_TOL * g.length;
    let sgn = |v: f64| if v.abs() <= zero { 0 } else if v > 0.0 { 1 } else { -1 };
    let n = g.eta_grid.len();
    let mut out = Vec::new();
    let mut i = 0;
    while i < n {
        if sgn(g.fp[i]) == 0 {
            let start = i;
            while i + 1 < n && sgn(g.fp[i + 1]) == 0 {
                i += 1;
            }
            let end = i;
            let before = if start > 0 { sgn(g.fp[start - 1]) } else { 0 };
            let after = if end + 1 < n { sgn(g.fp[end + 1]) } else { 0 };
            let kind = if end > start {
                CriticalKind::Plateau
            } else {
                match (before, after) {
                    (-1, 1) => CriticalKind::Min,
                    (1, -1) => CriticalKind::Max,
                    _ => CriticalKind::Inflection,
                }
            };
            let k = (start + end) / 2;
            out.push(CriticalPoint { eta0: g.eta_grid[k], mu: g.f[k], kind });
            i += 1;
            continue;
        }
        if i + 1 < n {
            let (s0, s1) = (sgn(g.fp[i]), sgn(g.fp[i + 1]));
            if s1 != 0 && s0 != s1 {
                let (a, b) = (g.eta_grid[i], g.eta_grid[i + 1]);
                let root = refine_root(eval, a, b, g.fp[i], g.fp[i + 1])?;
                let mu = eval.f_fp(root)?.0;
                let kind = if s0 < 0 { CriticalKind::Min } else { CriticalKind::Max };
                out.push(CriticalPoint { eta0: root, mu, kind });
            }
        }
        i += 1;
    }
    Ok(CriticalSet::Points(out))
}

/// Brent refinement of a sign change of `F' - 0` on `[a, b]`.
pub(crate) fn refine_root(eval: &dyn GenfunEval, a: f64, b: f64, fa: f64, fb: f64) -> Result<f64> {
    refine_level(eval, a, b, fa, fb, 0.0)
}

/// Solves `F'(η) = level` on a bracket with known end values of `F'`.
pub(crate) fn refine_level(eval: &dyn GenfunEval, a: f64, b: f64, fa: f64, fb: f64, level: f64) -> Result<f64> {
    let mut failure = None;
    let root = crate::numeric::roots::brent_with_values(
        |eta| match eval.f_fp(eta) {
            Ok((_, fp)) => fp - level,
            Err(e) => {
                failure.get_or_insert(e);
                f64::NAN
            }
        },
        a,
        b,
        fa - level,
        fb - level,
        1e-12,
    );
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(root.unwrap_or(0.5 * (a + b)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::annulus::{return_grid, Annulus};
    use crate::profile::{make_besse, make_dumbbell, make_round, perturb_poles, BesseSpec};
    use std::f64::consts::{PI, TAU};

    fn sig(m: u32, n: u32) -> OrbifoldSignature {
        OrbifoldSignature::new(m, n).unwrap()
    }

    #[test]
    fn round_integral_route() {
        let p = make_round();
        let ann = Annulus::new(&p).unwrap();
        let ev = IntegralEvaluator::new(&p, ann, 1e-10).unwrap();
        assert_eq!(ev.f(0.0).unwrap(), TAU);
        for eta in [-0.999, -0.5, 0.1, 0.7] {
            let (f, fp) = ev.f_fp(eta).unwrap();
            assert!((f - TAU).abs() < 1e-8, "F({eta}) = {f}");
            assert!(fp.abs() < 1e-8, "F'({eta}) = {fp}");
        }
        assert!((ev.endpoint().unwrap() - TAU).abs() < 1e-12);
        assert!(ev.gamma_intervals().is_empty());
    }

    #[test]
    fn besse_integral_route_is_constant() {
        let p = make_besse(BesseSpec::new(sig(2, 3), vec![0.3])).unwrap();
        let ann = Annulus::new(&p).unwrap();
        let ev = IntegralEvaluator::new(&p, ann, 1e-10).unwrap();
        for eta in [-0.9, -0.2, 0.4, 0.95] {
            assert!((ev.f(eta).unwrap() - 5.0 * PI).abs() < 1e-7);
        }
    }

    #[test]
    fn derivative_matches_central_difference() {
        let base = make_round();
        let p = perturb_poles(&base, sig(2, 3), 0.4, 0.3).unwrap();
        let ann = Annulus::new(&p).unwrap();
        let ev = IntegralEvaluator::new(&p, ann, 1e-11).unwrap();
        for eta in [-0.3, -0.05, 0.2] {
            let h = 1e-5;
            let fd = (ev.f(eta + h).unwrap() - ev.f(eta - h).unwrap()) / (2.0 * h);
            let fp = ev.fp(eta).unwrap();
            assert!((fd - fp).abs() < 1e-5 * ann.length, "eta {eta}: {fd} vs {fp}");
        }
    }

    #[test]
    fn dumbbell_endpoint_uses_gamma() {
        let p = make_dumbbell(0.5).unwrap();
        let ann = Annulus::new(&p).unwrap();
        let ev = IntegralEvaluator::new(&p, ann, 1e-10).unwrap();
        let gamma = ev.gamma_intervals();
        assert_eq!(gamma.len(), 1);
        assert!(gamma[0].0 < ann.s0 && gamma[0].1 > ann.s0);
        let endpoint = ev.endpoint().unwrap();
        assert!(endpoint > ann.length);
        let near = ev.f(1.0 - 1e-9).unwrap();
        assert!((near - endpoint).abs() < 1e-4, "{near} vs {endpoint}");
    }

    #[test]
    fn returns_route_matches_integral_route() {
        let p = perturb_poles(&make_round(), sig(1, 1), 0.3, 0.1).unwrap();
        let grid = return_grid(&p, 41, &ReturnOptions::default()).unwrap();
        let from_returns = genfun_from_returns(&grid).unwrap();
        let ev = IntegralEvaluator::new(&p, grid.annulus, 1e-10).unwrap();
        let from_integral = genfun_from_integral(&ev, &from_returns.eta_grid).unwrap();
        for i in 0..from_returns.f.len() {
            let tol = 1e-5 * from_returns.length;
            assert!((from_returns.f[i] - from_integral.f[i]).abs() < tol, "{}", from_returns.eta_grid[i]);
            assert!((from_returns.fp[i] - from_integral.fp[i]).abs() < tol);
        }
        let (even, odd) = from_integral.symmetry_defects();
        assert!(even < 1e-9 && odd < 1e-9);
        assert!(from_integral.lower_bound_margin() > 0.0);
    }

    #[test]
    fn critical_points_of_round_are_all() {
        let p = make_round();
        let ann = Annulus::new(&p).unwrap();
        let ev = IntegralEvaluator::new(&p, ann, 1e-10).unwrap();
        let g = genfun_from_integral(&ev, &annulus::chebyshev_grid(21, 1e-5)).unwrap();
        match critical_points(&g, &ev).unwrap() {
            CriticalSet::AllCritical { mu } => assert!((mu - TAU).abs() < 1e-8),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn critical_points_of_bumped_sphere_include_meridian_and_minimum() {
        let p = perturb_poles(&make_round(), sig(1, 1), 0.3, -0.1).unwrap();
        let ann = Annulus::new(&p).unwrap();
        let ev = IntegralEvaluator::new(&p, ann, 1e-10).unwrap();
        let g = genfun_from_integral(&ev, &annulus::chebyshev_grid(101, 1e-5)).unwrap();
        let CriticalSet::Points(points) = critical_points(&g, &ev).unwrap() else { panic!("flat") };
        assert!(points.iter().any(|c| c.eta0 == 0.0));
        assert!(points.iter().any(|c| c.kind == CriticalKind::Min && c.mu < TAU));
    }
}
