//! End-to-end analysis of one profile, and one-parameter sweeps.

use rayon::prelude::*;
use serde::Serialize;

use crate::annulus::{self, sign, Annulus, ReturnGrid};
use crate::config::Numerics;
use crate::error::{Error, Result};
use crate::genfun::{self, CriticalSet, GeneratingFunction, GenfunEval, IntegralEvaluator};
use crate::measure::{self, VolumeReport};
use crate::profile::{Equators, MetricProfile, OrbifoldSignature};
use crate::systole::{self, EnumOptions, Enumeration, SystoleReport};

/// Consistency measurements, all relative to `L` unless noted.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Checks {
    /// `max |F_integral - F_returns|`.
    pub route_f: f64,
    pub route_fp: f64,
    /// `max |F'_integral - L·W - sign(η)(m+n)L/2|` with `W` from the ODE.
    pub winding_identity: f64,
    /// `max |F - ηF' - τ|` with `F` from the integral route.
    pub tau_identity: f64,
    pub evenness: f64,
    pub oddness: f64,
    /// `min F(η) - (m+n)L|η|/2` (absolute).
    pub lower_bound_margin: f64,
    /// `(max F - min F)` on the grid.
    pub flatness: f64,
    /// Largest Clairaut drift over the return grid (absolute).
    pub clairaut_drift: f64,
    pub censored: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct Analysis {
    pub signature: OrbifoldSignature,
    pub numerics: Numerics,
    pub annulus: Annulus,
    pub equators: Equators,
    pub returns: ReturnGrid,
    pub genfun_returns: GeneratingFunction,
    pub genfun_integral: GeneratingFunction,
    pub critical: CriticalSet,
    pub volume: VolumeReport,
    pub enumeration: Enumeration,
    pub systole: SystoleReport,
    pub checks: Checks,
    pub cutoff: f64,
    pub q_max: u32,
}

/// Extra return-grid points allowed by refinement, per base grid point.
const REFINE_BUDGET_FACTOR: usize = 1;

pub fn analyze(p: &MetricProfile, numerics: &Numerics) -> Result<Analysis> {
    numerics.validate()?;
    let sig = p.signature();
    let equators = p.equators()?;
    let ann = Annulus::new(p)?;
    let l = ann.length;
    let ropts = numerics.returns();

    let mut returns = annulus::return_grid(p, numerics.eta_grid_n, &ropts)?;
    annulus::refine(p, &mut returns, &ropts, REFINE_BUDGET_FACTOR * numerics.eta_grid_n)?;
    let genfun_returns = genfun::genfun_from_returns(&returns)?;

    let eval = IntegralEvaluator::new(p, ann, numerics.quad_rel_tol)?;
    let genfun_integral = genfun::genfun_from_integral(&eval, &returns.etas())?;
    let critical = genfun::critical_points(&genfun_integral, &eval)?;
    let volume = measure::contact_volume_decomposed(p, &eval, Some(&genfun_integral))?;

    let mut opts = EnumOptions::defaults_for(sig, l);
    if let Some(c) = numerics.length_cutoff {
        opts.cutoff = c;
    }
    if let Some(q) = numerics.q_max {
        opts.q_max = q;
    }
    let enumeration = systole::enumerate_closed(p, &genfun_integral, &eval, &critical, &opts)?;
    let systole = systole::ratios(sig, volume.area, l, enumeration.geodesics.clone(), opts.cutoff)?;
    let checks = checks(&returns, &genfun_returns, &genfun_integral);
    Ok(Analysis {
        signature: sig,
        numerics: *numerics,
        annulus: ann,
        equators,
        returns,
        genfun_returns,
        genfun_integral,
        critical,
        volume,
        enumeration,
        systole,
        checks,
        cutoff: opts.cutoff,
        q_max: opts.q_max,
    })
}

fn checks(returns: &ReturnGrid, by_returns: &GeneratingFunction, by_integral: &GeneratingFunction) -> Checks {
    let ann = &returns.annulus;
    let l = ann.length;
    let half = ann.signature.half_order();
    let (mut route_f, mut route_fp, mut winding, mut tau, mut drift) = (0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for (i, &eta) in by_returns.eta_grid.iter().enumerate() {
        if let Some(j) = by_integral.index_of(eta) {
            route_f = route_f.max((by_returns.f[i] - by_integral.f[j]).abs());
            route_fp = route_fp.max((by_returns.fp[i] - by_integral.fp[j]).abs());
        }
    }
    for e in returns.entries.iter().filter(|e| !e.censored) {
        drift = drift.max(e.ode_drift);
        let Some(j) = by_integral.index_of(e.eta) else { continue };
        tau = tau.max((by_integral.tau(j) - e.tau).abs());
        if e.eta != 0.0 {
            winding = winding.max((by_integral.fp[j] - l * e.winding - sign(e.eta) * half * l).abs());
        }
    }
    let (even, odd) = by_returns.symmetry_defects();
    let (lo, hi) = by_integral.f.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &f| (lo.min(f), hi.max(f)));
    Checks {
        route_f: route_f / l,
        route_fp: route_fp / l,
        winding_identity: winding / l,
        tau_identity: tau / l,
        evenness: even / l,
        oddness: odd / l,
        lower_bound_margin: by_integral.lower_bound_margin(),
        flatness: (hi - lo) / l,
        clairaut_drift: drift,
        censored: returns.entries.iter().filter(|e| e.censored).count(),
    }
}

/// One row of a parameter sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepRow {
    pub param: f64,
    pub area: f64,
    pub l_min_contr: f64,
    pub rho_contr: f64,
    pub rho_contr_2: Option<f64>,
    pub rho_periodspec: f64,
    pub rho_sys: f64,
    /// `(bound - ρ_contr) / bound`.
    pub margin: f64,
}

impl SweepRow {
    pub fn from_report(param: f64, r: &SystoleReport) -> Self {
        Self {
            param,
            area: r.area,
            l_min_contr: r.l_min_contr,
            rho_contr: r.rho_contr,
            rho_contr_2: r.rho_k(2),
            rho_periodspec: r.rho_periodspec,
            rho_sys: r.rho_sys,
            margin: (r.bounds.contractible - r.rho_contr) / r.bounds.contractible,
        }
    }
}

/// Analyzes `build(param)` for every parameter, in parallel.
pub fn sweep<F>(params: &[f64], numerics: &Numerics, build: F) -> Result<Vec<SweepRow>>
where
    F: Fn(f64) -> Result<MetricProfile> + Sync,
{
    params
        .par_iter()
        .map(|&x| {
            let p = build(x)?;
            let a = analyze(&p, numerics).map_err(|e| Error::InvalidParameter(format!("sweep parameter {x}: {e}")))?;
            Ok(SweepRow::from_report(x, &a.systole))
        })
        .collect()
}

/// `(F, F')` at a single `η` by the integral route.
pub fn genfun_at(p: &MetricProfile, eta: f64, quad_rel_tol: f64) -> Result<(f64, f64)> {
    IntegralEvaluator::new(p, Annulus::new(p)?, quad_rel_tol)?.f_fp(eta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profile::{make_besse, make_round, BesseSpec};
    use std::f64::consts::PI;

    fn quick() -> Numerics {
        Numerics { eta_grid_n: 101, ..Numerics::default() }
    }

    #[test]
    fn round_analysis() {
        let a = analyze(&make_round(), &quick()).unwrap();
        assert!((a.volume.area - 4.0 * PI).abs() < 1e-10);
        assert!((a.systole.rho_contr - 4.0 * PI).abs() < 1e-6);
        assert!(a.checks.flatness < 1e-9);
        assert!(a.checks.route_f < 1e-7 && a.checks.winding_identity < 1e-7);
        assert!(matches!(a.critical, CriticalSet::AllCritical { .. }));
    }

    #[test]
    fn besse_analysis_is_at_bound() {
        let p = make_besse(BesseSpec::new(OrbifoldSignature::new(2, 1).unwrap(), vec![0.2])).unwrap();
        let a = analyze(&p, &quick()).unwrap();
        assert!((a.systole.rho_contr - 6.0 * PI).abs() < 1e-4 * 6.0 * PI);
        assert!(!a.systole.verdicts.any_violation());
        assert!(a.volume.rel_mismatch < 1e-6);
    }

    #[test]
    fn sweep_rows_in_order() {
        let n = quick();
        let rows = sweep(&[0.3, 0.2], &n, |eps| {
            crate::profile::perturb_poles(&make_round(), OrbifoldSignature::new(1, 1).unwrap(), eps, -0.1)
        })
        .unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[0].param, 0.3);
        assert!(rows.iter().all(|r| r.margin > 0.0));
    }
}
