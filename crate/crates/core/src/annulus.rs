//! Birkhoff annulus at the minimal equator and its first-return data.
//!
//! Coordinates are `ξ = r(s₀)·θ` and `η = -cos β` on the set of unit vectors
//! based at `s = s₀` pointing to the north side.  The winding `W` stored in
//! [`ReturnData`] is the signed `θ`-advance over one return divided by `2π`;
//! it is odd in `η`.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::flow::{self, Crossing, EventKind, EventSpec, FlowOptions, PhasePoint};
use crate::profile::{MetricProfile, OrbifoldSignature};

/// Reference data of the annulus: the minimal equator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Annulus {
    pub signature: OrbifoldSignature,
    pub s0: f64,
    pub r0: f64,
    /// Equator length `L = 2π r₀`.
    pub length: f64,
    /// Several equators tie for the minimal radius.
    pub tie: bool,
}

impl Annulus {
    pub fn new(p: &MetricProfile) -> Result<Self> {
        let eq = p.equators()?;
        let e = eq.reference();
        Ok(Self { signature: p.signature(), s0: e.s, r0: e.radius, length: e.length(), tie: eq.tie })
    }

    /// Unit vector at `(ξ, η)` in flow coordinates.
    pub fn phase_point(&self, point: AnnulusPoint) -> PhasePoint {
        PhasePoint::new(point.xi / self.r0, (-point.eta).acos(), self.s0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AnnulusPoint {
    pub xi: f64,
    pub eta: f64,
}

impl AnnulusPoint {
    /// Reduces `xi` to `[0, L)`; rejects `eta` outside `(-1, 1)`.
    pub fn new(xi: f64, eta: f64, length: f64) -> Result<Self> {
        if !(eta > -1.0 && eta < 1.0) {
            return Err(Error::EtaOutOfRange(eta));
        }
        Ok(Self { xi: xi.rem_euclid(length), eta })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReturnData {
    pub eta: f64,
    pub tau: f64,
    /// Unreduced `ξ`-advance, continuous in `η` and equal to `αL/2` at `η = 0`.
    pub delta_xi: f64,
    /// Signed `θ`-advance over one return divided by `2π`.
    pub winding: f64,
    pub ode_drift: f64,
    /// No return before the time cap; `tau` holds the cap, other values NaN.
    pub censored: bool,
}

impl ReturnData {
    /// Winding shifted by `m+n` on `η > 0` so that it is continuous across the
    /// meridian: `W̃(η) + W̃(-η) = m + n`.
    pub fn continuous_winding(&self, sig: OrbifoldSignature) -> f64 {
        if self.eta > 0.0 {
            self.winding + sig.order() as f64
        } else {
            self.winding
        }
    }

    /// `F'(η)` implied by the winding.
    pub fn fp(&self, ann: &Annulus) -> f64 {
        ann.length * (self.winding + sign(self.eta) * ann.signature.half_order())
    }
}

pub(crate) fn sign(eta: f64) -> f64 {
    if eta > 0.0 {
        1.0
    } else if eta < 0.0 {
        -1.0
    } else {
        0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReturnOptions {
    pub flow: FlowOptions,
    /// Time cap in units of `(m+n)·L`.
    pub time_cap_factor: f64,
    /// Grid stays inside `(-1 + delta, 1 - delta)`.
    pub delta: f64,
    /// Continuous-winding jump between neighbours that triggers refinement.
    pub max_winding_jump: f64,
    /// Intervals narrower than this are not refined further.
    pub min_width: f64,
    /// Upper bound on refinement points as a multiple of the base grid size.
    pub max_extra_factor: usize,
}

impl Default for ReturnOptions {
    fn default() -> Self {
        Self {
            flow: FlowOptions::default(),
            time_cap_factor: 50.0,
            delta: 1e-5,
            max_winding_jump: 1.0 / 16.0,
            min_width: 1e-6,
            max_extra_factor: 4,
        }
    }
}

impl ReturnOptions {
    pub fn time_cap(&self, ann: &Annulus) -> f64 {
        self.time_cap_factor * ann.signature.order() as f64 * ann.length
    }
}

/// First return of the orbit through `(0, η)`.
pub fn first_return(p: &MetricProfile, ann: &Annulus, eta: f64, opts: &ReturnOptions) -> Result<ReturnData> {
    if !(eta.abs() < 1.0) || eta.abs() <= opts.flow.pole_guard_k {
        return Err(Error::EtaOutOfRange(eta));
    }
    let cap = opts.time_cap(ann);
    let x0 = ann.phase_point(AnnulusPoint { xi: 0.0, eta });
    let spec = EventSpec::first_crossing(ann.s0, Crossing::Up);
    let tr = flow::integrate(p, x0, cap, &spec, &opts.flow)?;
    let Some(ev) = tr.events.iter().find(|e| e.kind == EventKind::SectionCross) else {
        return Err(Error::NoReturn { eta, cap });
    };
    let winding = ev.state.theta / std::f64::consts::TAU;
    let mut data = ReturnData {
        eta,
        tau: ev.time,
        delta_xi: 0.0,
        winding,
        ode_drift: tr.clairaut_drift,
        censored: false,
    };
    data.delta_xi = data.fp(ann) + 0.5 * ann.signature.alpha() as f64 * ann.length;
    Ok(data)
}

/// Return data of the meridian family at `η = 0`, assembled from arcs.
pub fn meridian_return(p: &MetricProfile, ann: &Annulus) -> ReturnData {
    let sig = p.signature();
    let passage = flow::meridian_theta_jump(sig.m()) + flow::meridian_theta_jump(sig.n());
    ReturnData {
        eta: 0.0,
        tau: 2.0 * p.length(),
        delta_xi: 0.5 * sig.alpha() as f64 * ann.length,
        winding: passage / std::f64::consts::TAU,
        ode_drift: 0.0,
        censored: false,
    }
}

/// Symmetric Chebyshev-clustered grid of odd size `n` on
/// `[-(1-delta), 1-delta]` with `η = 0` at the centre.
pub fn chebyshev_grid(n: usize, delta: f64) -> Vec<f64> {
    let half = n / 2;
    let mut grid = vec![0.0; n];
    for i in 0..half {
        let eta = -(1.0 - delta) * (std::f64::consts::PI * i as f64 / (n - 1) as f64).cos();
        grid[i] = eta;
        grid[n - 1 - i] = -eta;
    }
    grid
}

/// Return data on a symmetric grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReturnGrid {
    pub annulus: Annulus,
    pub entries: Vec<ReturnData>,
    /// Number of points added by local refinement.
    pub refined: usize,
}

impl ReturnGrid {
    pub fn etas(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.eta).collect()
    }

    /// Entry at exactly `eta`, if present.
    pub fn get(&self, eta: f64) -> Option<&ReturnData> {
        self.entries.iter().find(|e| e.eta == eta)
    }
}

fn entry(p: &MetricProfile, ann: &Annulus, eta: f64, opts: &ReturnOptions) -> Result<ReturnData> {
    if eta == 0.0 {
        return Ok(meridian_return(p, ann));
    }
    match first_return(p, ann, eta, opts) {
        Ok(d) => Ok(d),
        Err(Error::NoReturn { cap, .. }) => Ok(ReturnData {
            eta,
            tau: cap,
            delta_xi: f64::NAN,
            winding: f64::NAN,
            ode_drift: f64::NAN,
            censored: true,
        }),
        Err(e) => Err(Error::GridEntry { eta, source: Box::new(e) }),
    }
}

fn evaluate(p: &MetricProfile, ann: &Annulus, etas: &[f64], opts: &ReturnOptions) -> Result<Vec<ReturnData>> {
    etas.par_iter().map(|&eta| entry(p, ann, eta, opts)).collect()
}

/// First-return data on a Chebyshev grid of `n_grid` points, refined where
/// the continuous winding changes quickly between neighbours.
pub fn return_grid(p: &MetricProfile, n_grid: usize, opts: &ReturnOptions) -> Result<ReturnGrid> {
    if n_grid < 17 || n_grid.is_multiple_of(2) {
        return Err(Error::InvalidParameter(format!("return grid size {n_grid} must be odd and at least 17")));
    }
    let ann = Annulus::new(p)?;
    let etas = chebyshev_grid(n_grid, opts.delta);
    let entries = evaluate(p, &ann, &etas, opts)?;
    let mut grid = ReturnGrid { annulus: ann, entries, refined: 0 };
    refine(p, &mut grid, opts, n_grid * opts.max_extra_factor)?;
    Ok(grid)
}

/// Inserts symmetric midpoints `±η` wherever neighbouring entries on the
/// `η ≤ 0` half differ in continuous winding by more than the threshold.
pub fn refine(p: &MetricProfile, grid: &mut ReturnGrid, opts: &ReturnOptions, budget: usize) -> Result<()> {
    let ann = grid.annulus;
    let sig = ann.signature;
    loop {
        let mut mids = Vec::new();
        for w in grid.entries.windows(2) {
            let (a, b) = (&w[0], &w[1]);
            if b.eta > 0.0 || a.censored || b.censored {
                continue;
            }
            let jump = (b.continuous_winding(sig) - a.continuous_winding(sig)).abs();
            if jump > opts.max_winding_jump && b.eta - a.eta > opts.min_width {
                mids.push(0.5 * (a.eta + b.eta));
            }
        }
        if mids.is_empty() {
            return Ok(());
        }
        if grid.refined + 2 * mids.len() > budget {
            log::warn!("return grid refinement budget of {budget} points exhausted");
            return Ok(());
        }
        let mut new_etas: Vec<f64> = mids.iter().flat_map(|&m| [m, -m]).collect();
        new_etas.retain(|&e| e != 0.0);
        let fresh = evaluate(p, &ann, &new_etas, opts)?;
        grid.refined += fresh.len();
        grid.entries.extend(fresh);
        grid.entries.sort_by(|a, b| a.eta.total_cmp(&b.eta));
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profile::{make_besse, make_round, BesseSpec};
    use std::f64::consts::{FRAC_PI_4, PI, TAU};

    #[test]
    fn round_returns_are_great_circles() {
        let p = make_round();
        let ann = Annulus::new(&p).unwrap();
        let opts = ReturnOptions::default();
        let d = first_return(&p, &ann, -FRAC_PI_4.cos(), &opts).unwrap();
        assert!((d.tau - TAU).abs() < 1e-9);
        assert!((d.winding - 1.0).abs() < 1e-9);
        for eta in [-0.99, -0.3, 0.2, 0.8] {
            let d = first_return(&p, &ann, eta, &opts).unwrap();
            assert!((d.tau - TAU).abs() < 1e-9, "eta {eta}: {}", d.tau);
            assert!(d.ode_drift < 1e-9);
        }
    }

    #[test]
    fn besse_reflection_symmetry() {
        let p = make_besse(BesseSpec::linear(OrbifoldSignature::new(2, 1).unwrap())).unwrap();
        let ann = Annulus::new(&p).unwrap();
        let opts = ReturnOptions::default();
        let plus = first_return(&p, &ann, 0.5, &opts).unwrap();
        let minus = first_return(&p, &ann, -0.5, &opts).unwrap();
        assert!((plus.tau - minus.tau).abs() < 1e-8);
        let sig = ann.signature;
        assert!((plus.continuous_winding(sig) + minus.continuous_winding(sig) - 3.0).abs() < 1e-8);
        assert!((plus.winding + minus.winding).abs() < 1e-8);
    }

    #[test]
    fn meridian_entries() {
        let p = make_round();
        let ann = Annulus::new(&p).unwrap();
        let d = meridian_return(&p, &ann);
        assert_eq!((d.tau, d.winding), (TAU, 1.0));
        assert_eq!(d.delta_xi, 0.0);
        let q = make_besse(BesseSpec::linear(OrbifoldSignature::new(2, 1).unwrap())).unwrap();
        let ann = Annulus::new(&q).unwrap();
        let d = meridian_return(&q, &ann);
        assert!((d.tau - 3.0 * PI).abs() < 1e-12);
        assert_eq!(d.winding, 1.5);
        assert!((d.delta_xi - PI).abs() < 1e-12);
    }

    #[test]
    fn grid_is_symmetric_with_centre() {
        let g = chebyshev_grid(21, 1e-5);
        assert_eq!(g[10], 0.0);
        for i in 0..21 {
            assert_eq!(g[i], -g[20 - i]);
        }
        assert!(g.windows(2).all(|w| w[1] > w[0]));
        assert!((g[0] + 1.0 - 1e-5).abs() < 1e-15);
    }

    #[test]
    fn eta_validation() {
        let p = make_round();
        let ann = Annulus::new(&p).unwrap();
        let opts = ReturnOptions::default();
        assert!(matches!(first_return(&p, &ann, 1.0, &opts), Err(Error::EtaOutOfRange(_))));
        assert!(matches!(first_return(&p, &ann, 0.0, &opts), Err(Error::EtaOutOfRange(_))));
        assert!(AnnulusPoint::new(7.0, 0.3, TAU).unwrap().xi < TAU);
        assert!(return_grid(&p, 16, &opts).is_err());
    }

    #[test]
    fn tiny_time_cap_censors() {
        let p = make_round();
        let opts = ReturnOptions { time_cap_factor: 0.1, ..ReturnOptions::default() };
        let g = return_grid(&p, 17, &opts).unwrap();
        assert!(g.entries.iter().filter(|e| e.eta != 0.0).all(|e| e.censored));
    }
}
