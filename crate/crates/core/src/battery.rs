//! Acceptance battery over the seeded corpus.
//!
//! Every criterion yields one [`Outcome`]; analysis failures on a profile
//! count as a failed criterion rather than aborting the run.

use std::f64::consts::{PI, TAU};
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::annulus::AnnulusPoint;
use crate::config::Numerics;
use crate::corpus::{self, CorpusEntry};
use crate::error::Result;
use crate::flow::{self, EventSpec, PhasePoint};
use crate::pipeline::{self, Analysis};
use crate::profile::{make_besse, make_round, perturb_band, perturb_poles, BesseSpec, MetricProfile, OrbifoldSignature};
use crate::systole::{self, EnumOptions, GeodesicKind, AT_BOUND_TOL};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Outcome {
    pub id: u8,
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = if self.pass { "PASS" } else { "FAIL" };
        write!(f, "{tag} [{}] {}: {}", self.id, self.name, self.detail)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BatteryOptions {
    pub seed: u64,
    pub numerics: Numerics,
    pub besse_per_signature: usize,
    pub random_orbits: usize,
}

impl Default for BatteryOptions {
    fn default() -> Self {
        Self { seed: 20240601, numerics: Numerics::default(), besse_per_signature: 3, random_orbits: 100 }
    }
}

/// Per-criterion thresholds.
pub mod tol {
    pub const AREA: f64 = 1e-6;
    pub const FLAT: f64 = 1e-5;
    pub const RATIO: f64 = 1e-4;
    pub const ROUND: f64 = 1e-6;
    pub const STRICT_MARGIN: f64 = 10.0 * super::AT_BOUND_TOL;
    pub const ROUTE: f64 = 1e-5;
    pub const VOLUME: f64 = 1e-5;
    pub const WINDING: f64 = 1e-5;
    pub const CLOSURE: f64 = 1e-6;
    pub const DRIFT: f64 = 1e-9;
    pub const EVENNESS: f64 = 1e-6;
    pub const POLE_TREND: f64 = 0.1;
    pub const BAND_GAIN: f64 = 1e-3;
}

struct Case {
    label: String,
    profile: MetricProfile,
    analysis: std::result::Result<Analysis, String>,
}

impl Case {
    fn run(label: String, profile: MetricProfile, numerics: &Numerics) -> Self {
        let analysis = pipeline::analyze(&profile, numerics).map_err(|e| e.to_string());
        Self { label, profile, analysis }
    }
}

fn analyze_corpus(entries: &[CorpusEntry], numerics: &Numerics) -> Vec<Case> {
    entries
        .par_iter()
        .map(|e| match e.spec.build() {
            Ok(p) => Case::run(e.label.clone(), p, numerics),
            Err(err) => Case { label: e.label.clone(), profile: make_round(), analysis: Err(err.to_string()) },
        })
        .collect()
}

fn rel(value: f64, target: f64) -> f64 {
    (value - target).abs() / target.abs()
}

/// Collects failures of a per-case predicate into an [`Outcome`].
struct Tally {
    id: u8,
    name: &'static str,
    checked: usize,
    failures: Vec<String>,
    worst: f64,
}

impl Tally {
    fn new(id: u8, name: &'static str) -> Self {
        Self { id, name, checked: 0, failures: Vec::new(), worst: 0.0 }
    }

    fn check(&mut self, label: &str, what: &str, value: f64, limit: f64) {
        self.checked += 1;
        self.worst = self.worst.max(value / limit);
        if !(value < limit) {
            self.failures.push(format!("{label}: {what} = {value:.3e} (limit {limit:.1e})"));
        }
    }

    fn fail(&mut self, label: &str, why: &str) {
        self.checked += 1;
        self.failures.push(format!("{label}: {why}"));
    }

    fn finish(self) -> Outcome {
        let detail = if self.failures.is_empty() {
            format!("{} checks, worst value/limit {:.2e}", self.checked, self.worst)
        } else {
            format!("{} of {} checks failed; {}", self.failures.len(), self.checked, self.failures.join("; "))
        };
        Outcome { id: self.id, name: self.name, pass: self.failures.is_empty(), detail }
    }
}

/// Runs all nine criteria.
pub fn run(opts: &BatteryOptions) -> Vec<Outcome> {
    let numerics = &opts.numerics;
    let besse = analyze_corpus(&corpus::besse_suite(opts.seed, opts.besse_per_signature), numerics);
    let perturbed = analyze_corpus(&corpus::perturbed_suite(opts.seed), numerics);
    let round = Case::run("round".into(), make_round(), numerics);
    let all: Vec<&Case> = besse.iter().chain(&perturbed).chain(std::iter::once(&round)).collect();

    vec![
        besse_equality(&besse),
        round_exactness(&round),
        strict_inequality(&perturbed),
        cross_routes(&all),
        winding_identity(&all),
        closure(&all),
        conservation(&all, opts),
        pole_deformation(numerics),
        band_gain(numerics),
    ]
}

fn besse_equality(cases: &[Case]) -> Outcome {
    let mut t = Tally::new(1, "Besse equality suite");
    for c in cases {
        let a = match &c.analysis {
            Ok(a) => a,
            Err(e) => {
                t.fail(&c.label, e);
                continue;
            }
        };
        let order = a.signature.order() as f64;
        let s = &a.systole;
        t.check(&c.label, "area error", rel(a.volume.area, TAU * order), tol::AREA);
        t.check(&c.label, "flatness", a.checks.flatness, tol::FLAT);
        t.check(&c.label, "rho_contr error", rel(s.rho_contr, s.bounds.contractible), tol::RATIO);
        if let Some(b) = s.bounds.order_two {
            match s.rho_k(2) {
                Some(v) => t.check(&c.label, "rho_contr,2 error", rel(v, b), tol::RATIO),
                None => t.fail(&c.label, "rho_contr,2 missing"),
            }
        }
        t.check(&c.label, "rho_periodspec error", rel(s.rho_periodspec, s.bounds.period_spectrum), tol::RATIO);
    }
    t.finish()
}

fn round_exactness(c: &Case) -> Outcome {
    let mut t = Tally::new(2, "Round-sphere exactness");
    match &c.analysis {
        Ok(a) => {
            let f_dev = a.genfun_integral.f.iter().map(|f| rel(*f, TAU)).fold(0.0, f64::max);
            t.check(&c.label, "area error", rel(a.volume.area, 4.0 * PI), tol::ROUND);
            t.check(&c.label, "L error", rel(a.annulus.length, TAU), tol::ROUND);
            t.check(&c.label, "F - 2pi", f_dev, tol::ROUND);
            t.check(&c.label, "l_min_contr error", rel(a.systole.l_min_contr, 4.0 * PI), tol::ROUND);
            t.check(&c.label, "rho_contr error", rel(a.systole.rho_contr, 4.0 * PI), tol::ROUND);
        }
        Err(e) => t.fail(&c.label, e),
    }
    t.finish()
}

fn strict_inequality(cases: &[Case]) -> Outcome {
    let mut t = Tally::new(3, "Strict inequality suite");
    if cases.len() < 10 {
        t.fail("corpus", &format!("only {} perturbed profiles", cases.len()));
    }
    for c in cases {
        let a = match &c.analysis {
            Ok(a) => a,
            Err(e) => {
                t.fail(&c.label, e);
                continue;
            }
        };
        let s = &a.systole;
        if s.verdicts.any_violation() {
            t.fail(&c.label, "bound violated");
        }
        // A margin must exceed the threshold; check its shortfall.
        let mut margin = |what: &str, value: f64, bound: f64| {
            let m = (bound - value) / bound;
            t.check(&c.label, what, tol::STRICT_MARGIN / m.max(f64::MIN_POSITIVE), 1.0);
        };
        margin("threshold/contractible margin", s.rho_contr, s.bounds.contractible);
        if let (Some(b), Some(v)) = (s.bounds.order_two, s.rho_k(2)) {
            margin("threshold/order-two margin", v, b);
        }
        margin("threshold/period-spectrum margin", s.rho_periodspec, s.bounds.period_spectrum);
    }
    t.finish()
}

fn cross_routes(cases: &[&Case]) -> Outcome {
    let mut t = Tally::new(4, "Cross-route consistency");
    for c in cases {
        match &c.analysis {
            Ok(a) => {
                t.check(&c.label, "|F_int - F_ret|/L", a.checks.route_f, tol::ROUTE);
                t.check(&c.label, "volume mismatch", a.volume.rel_mismatch, tol::VOLUME);
            }
            Err(e) => t.fail(&c.label, e),
        }
    }
    t.finish()
}

fn winding_identity(cases: &[&Case]) -> Outcome {
    let mut t = Tally::new(5, "Winding identity");
    for c in cases {
        match &c.analysis {
            Ok(a) => t.check(&c.label, "winding identity / L", a.checks.winding_identity, tol::WINDING),
            Err(e) => t.fail(&c.label, e),
        }
    }
    t.finish()
}

/// Phase distance after re-integrating `g` from its initial condition, or
/// `None` for meridians, which start at a cone point.
fn reintegrate(p: &MetricProfile, a: &Analysis, g: &systole::ClosedGeodesic) -> Option<Result<f64>> {
    let flow_opts = EnumOptions::defaults_for(a.signature, a.annulus.length).flow;
    match g.kind {
        GeodesicKind::Meridian => None,
        GeodesicKind::EquatorIterate { s, .. } => Some((|| {
            let x0 = PhasePoint::new(0.0, 0.0, s);
            let tr = flow::integrate(p, x0, g.length, &EventSpec::default(), &flow_opts)?;
            Ok(x0.phase_distance(&tr.last().1))
        })()),
        GeodesicKind::Oscillating => {
            let eta = g.eta?;
            Some(systole::closure_defect(p, &a.annulus, eta, g.length, &flow_opts).map(|(d, _)| d))
        }
    }
}

fn closure(cases: &[&Case]) -> Outcome {
    let mut t = Tally::new(6, "Closure verification");
    let mut meridians = 0;
    for c in cases {
        let a = match &c.analysis {
            Ok(a) => a,
            Err(e) => {
                t.fail(&c.label, e);
                continue;
            }
        };
        let results: Vec<_> = a.systole.geodesics.par_iter().map(|g| (g, reintegrate(&c.profile, a, g))).collect();
        for (g, r) in results {
            match r {
                None => meridians += 1,
                Some(Ok(d)) => t.check(&c.label, &format!("closure defect at length {:.6}", g.length), d, tol::CLOSURE),
                Some(Err(e)) => t.fail(&c.label, &e.to_string()),
            }
        }
    }
    let mut out = t.finish();
    out.detail.push_str(&format!(", {meridians} meridians not re-integrated"));
    out
}

fn conservation(cases: &[&Case], opts: &BatteryOptions) -> Outcome {
    let mut t = Tally::new(7, "Conservation and property battery");
    for (idx, c) in cases.iter().enumerate() {
        let a = match &c.analysis {
            Ok(a) => a,
            Err(e) => {
                t.fail(&c.label, e);
                continue;
            }
        };
        let l = a.annulus.length;
        // Orbits of 10L run at the closure-test tolerance.
        let flow_opts = EnumOptions::defaults_for(a.signature, l).flow;
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed.wrapping_add(idx as u64));
        // |η| bounded away from 0 keeps orbits clear of the cone points.
        let starts: Vec<AnnulusPoint> = (0..opts.random_orbits)
            .map(|_| {
                let eta = rng.gen_range(0.02..0.99) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
                AnnulusPoint { xi: rng.gen_range(0.0..l), eta }
            })
            .collect();
        let drifts: Vec<Result<f64>> = starts
            .par_iter()
            .map(|&pt| {
                let tr = flow::integrate(&c.profile, a.annulus.phase_point(pt), 10.0 * l, &EventSpec::default(), &flow_opts)?;
                Ok(tr.clairaut_drift)
            })
            .collect();
        match drifts.into_iter().collect::<Result<Vec<f64>>>() {
            Ok(d) => t.check(&c.label, "max Clairaut drift", d.into_iter().fold(0.0, f64::max), tol::DRIFT),
            Err(e) => t.fail(&c.label, &e.to_string()),
        }
        t.check(&c.label, "evenness / L", a.checks.evenness, tol::EVENNESS);
        if !(a.checks.lower_bound_margin > 0.0) {
            t.fail(&c.label, &format!("lower bound margin {:.3e}", a.checks.lower_bound_margin));
        }
    }
    t.finish()
}

/// Cap widths of the pole-capped round metrics on S²(2,3).
pub const POLE_EPS: [f64; 4] = [0.4, 0.2, 0.1, 0.05];

fn pole_deformation(numerics: &Numerics) -> Outcome {
    let mut t = Tally::new(8, "Pole deformation of the round sphere");
    let sig = OrbifoldSignature::new(2, 3).expect("valid signature");
    let rows: Vec<(f64, Result<f64>)> = POLE_EPS
        .par_iter()
        .map(|&eps| {
            let r = perturb_poles(&make_round(), sig, eps, 0.3).and_then(|p| pipeline::analyze(&p, numerics)).map(|a| a.systole.rho_sys);
            (eps, r)
        })
        .collect();
    let mut values = Vec::new();
    for (eps, r) in rows {
        match r {
            Ok(v) => {
                let label = format!("eps {eps}");
                let floor = TAU / sig.order() as f64;
                if !(v > floor) {
                    t.fail(&label, &format!("rho_sys {v:.6} not above {floor:.6}"));
                }
                values.push(v);
            }
            Err(e) => t.fail(&format!("eps {eps}"), &e.to_string()),
        }
    }
    if values.len() == POLE_EPS.len() {
        if !values.windows(2).all(|w| w[1] > w[0]) {
            t.fail("sequence", "rho_sys not increasing");
        }
        t.check("eps 0.05", "|rho_sys - pi|/pi", rel(values[3], PI), tol::POLE_TREND);
    }
    let mut out = t.finish();
    let list: Vec<String> = values.iter().map(|v| format!("{v:.6}")).collect();
    out.detail.push_str(&format!(", rho_sys = [{}]", list.join(", ")));
    out
}

/// A Besse metric on S²(1,3) and an area-decreasing band bump of it.
pub fn band_gain_profiles() -> Result<(MetricProfile, MetricProfile)> {
    let sig = OrbifoldSignature::new(1, 3)?;
    let besse = make_besse(BesseSpec::linear(sig))?;
    let bumped = perturb_band(&besse, 0.6, 0.3, -0.1)?;
    Ok((besse, bumped))
}

fn band_gain(numerics: &Numerics) -> Outcome {
    let mut t = Tally::new(9, "Band perturbation raises rho_sys,4 on S2(1,3)");
    let run = || -> Result<(f64, f64, f64, f64)> {
        let (besse, bumped) = band_gain_profiles()?;
        let a0 = pipeline::analyze(&besse, numerics)?;
        let a1 = pipeline::analyze(&bumped, numerics)?;
        let k = |a: &Analysis| a.systole.rho_k(4).unwrap_or(f64::NAN);
        Ok((k(&a0), k(&a1), a0.volume.area, a1.volume.area))
    };
    match run() {
        Ok((before, after, area0, area1)) => {
            if !(area1 < area0) {
                t.fail("band", "area did not decrease");
            }
            let gain = (after - before) / before;
            t.check("band", "threshold/gain", tol::BAND_GAIN / gain.max(f64::MIN_POSITIVE), 1.0);
            let mut out = t.finish();
            out.detail.push_str(&format!(", rho_sys,4 {before:.6} -> {after:.6} (gain {gain:.3e})"));
            return out;
        }
        Err(e) => t.fail("band", &e.to_string()),
    }
    t.finish()
}
