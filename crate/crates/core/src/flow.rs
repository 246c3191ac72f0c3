//! Geodesic flow in `(θ, β, s)` coordinates.
//!
//! `β` is the angle against the positive parallel direction, so the unit-speed
//! geodesic equations read `θ' = cos β / r`, `β' = r' cos β / r`, `s' = sin β`
//! and `K = r cos β` is conserved.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::numeric::roots::{brent, brent_with_values};
use crate::numeric::{Dop853, OdeOptions};
use crate::profile::MetricProfile;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhasePoint {
    pub theta: f64,
    pub beta: f64,
    pub s: f64,
}

impl PhasePoint {
    pub fn new(theta: f64, beta: f64, s: f64) -> Self {
        Self { theta, beta, s }
    }

    fn to_array(self) -> [f64; 3] {
        [self.theta, self.beta, self.s]
    }

    fn from_array(y: [f64; 3]) -> Self {
        Self { theta: y[0], beta: y[1], s: y[2] }
    }

    /// Distance to `other` with both angles compared modulo `2π`.
    pub fn phase_distance(&self, other: &PhasePoint) -> f64 {
        let wrap = |d: f64| {
            let t = d.rem_euclid(std::f64::consts::TAU);
            t.min(std::f64::consts::TAU - t)
        };
        wrap(self.theta - other.theta).max(wrap(self.beta - other.beta)).max((self.s - other.s).abs())
    }
}

/// Clairaut integral `K = r(s) cos β`.
pub fn clairaut(p: &MetricProfile, x: &PhasePoint) -> f64 {
    p.r(x.s) * x.beta.cos()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum EventKind {
    SectionCross,
    PolePassage,
    Truncated,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Event {
    pub time: f64,
    pub kind: EventKind,
    pub state: PhasePoint,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Crossing {
    /// `s` increasing through the section.
    Up,
    Down,
    Either,
}

/// Which events to look for and when to stop.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EventSpec {
    /// Parallel `s = level` to monitor.
    pub section: Option<(f64, Crossing)>,
    /// Stop after this many section crossings.
    pub stop_after: Option<usize>,
    /// Keep every accepted step; otherwise only the endpoints and events.
    pub record_steps: bool,
    /// Additionally record dense-output samples every `sample_dt`.
    pub sample_dt: Option<f64>,
}

impl Default for EventSpec {
    fn default() -> Self {
        Self { section: None, stop_after: None, record_steps: true, sample_dt: None }
    }
}

impl EventSpec {
    /// Stop at the first crossing of `level` in the given direction.
    pub fn first_crossing(level: f64, direction: Crossing) -> Self {
        Self { section: Some((level, direction)), stop_after: Some(1), record_steps: false, sample_dt: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Largest step as a fraction of `M`.
    pub max_step_frac: f64,
    /// Pole guard band as a fraction of `M`.
    pub pole_guard: f64,
    /// Near-meridional threshold on `|K|` as a fraction of the reference radius.
    pub pole_guard_k: f64,
    /// Relative distance of `|K|` to a critical value below which the
    /// oscillating/asymptotic distinction is refused.
    pub ambiguity_tol: f64,
}

impl Default for FlowOptions {
    fn default() -> Self {
        Self { rel_tol: 1e-10, abs_tol: 1e-12, max_step_frac: 1.0 / 32.0, pole_guard: 1e-6, pole_guard_k: 1e-8, ambiguity_tol: 1e-6 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<PhasePoint>,
    pub clairaut_drift: f64,
    pub events: Vec<Event>,
}

impl Trajectory {
    pub fn last(&self) -> (f64, PhasePoint) {
        (*self.times.last().expect("non-empty"), *self.states.last().expect("non-empty"))
    }

    pub fn crossings(&self) -> impl Iterator<Item = &Event> {
        self.events.iter().filter(|e| e.kind == EventKind::SectionCross)
    }

    /// Largest deviation of `|γ'|_g` from one over the stored samples.
    pub fn speed_defect(&self, p: &MetricProfile) -> f64 {
        self.states
            .iter()
            .map(|x| {
                let r = p.r(x.s);
                let theta_dot = x.beta.cos() / r;
                ((r * theta_dot).powi(2) + x.beta.sin().powi(2)).sqrt() - 1.0
            })
            .fold(0.0, |a: f64, d| a.max(d.abs()))
    }

    fn push(&mut self, t: f64, x: PhasePoint) {
        if self.times.last().is_some_and(|&last| last == t) {
            *self.states.last_mut().expect("non-empty") = x;
        } else {
            self.times.push(t);
            self.states.push(x);
        }
    }
}

fn geodesic_rhs(p: &MetricProfile) -> impl FnMut(f64, &[f64; 3]) -> [f64; 3] + '_ {
    move |_t, y| {
        let j = p.jet(y[2]);
        let (sb, cb) = y[1].sin_cos();
        if !(j.r > 0.0) {
            return [f64::NAN; 3];
        }
        [cb / j.r, j.dr * cb / j.r, sb]
    }
}

/// Integrates the geodesic flow from `x0` for time `t_max` (negative for
/// backward integration), stopping early at requested events or when the
/// orbit enters the pole guard band.
pub fn integrate(p: &MetricProfile, x0: PhasePoint, t_max: f64, spec: &EventSpec, opts: &FlowOptions) -> Result<Trajectory> {
    let m_len = p.length();
    let guard = opts.pole_guard * m_len;
    if !(x0.s > guard && x0.s < m_len - guard) {
        return Err(Error::OutsideRegularPart { s: x0.s });
    }
    let k0 = clairaut(p, &x0);
    let mut traj = Trajectory { times: vec![0.0], states: vec![x0], clairaut_drift: 0.0, events: Vec::new() };
    if t_max == 0.0 {
        return Ok(traj);
    }
    let direction = t_max.signum();
    let ode = OdeOptions {
        rel_tol: opts.rel_tol,
        abs_tol: opts.abs_tol,
        max_step: opts.max_step_frac * m_len,
        scale_ceiling: std::f64::consts::TAU.max(m_len),
        ..OdeOptions::default()
    };
    let mut solver = Dop853::new(geodesic_rhs(p), 0.0, x0.to_array(), direction, ode);
    let mut crossings = 0usize;
    let mut g_prev = spec.section.map(|(level, _)| x0.s - level);
    let mut next_sample = spec.sample_dt.map(|dt| dt.abs() * direction);
    let drift = |y: &[f64; 3]| (p.r(y[2]) * y[1].cos() - k0).abs();
    let breaks = p.breakpoints();
    let break_slack = 1e-13 * m_len;

    loop {
        solver.step(t_max)?;
        // Steps never straddle a point where the profile loses smoothness.
        let (s0, s1) = (solver.y_prev()[2], solver.y()[2]);
        let mut t_break: Option<f64> = None;
        for &b in &breaks {
            if (s0 - b).abs() > break_slack && (s0 - b) * (s1 - b) < 0.0 {
                let (t_old, t_new) = (solver.t_prev(), solver.t());
                if let Some(t) = brent_with_values(|t| solver.dense(t)[2] - b, t_old, t_new, s0 - b, s1 - b, 1e-14) {
                    if t_break.is_none_or(|tb| (t - tb) * direction < 0.0) {
                        t_break = Some(t);
                    }
                }
            }
        }
        if let Some(t) = t_break {
            solver.restep_to(t);
        }
        let (t_old, t_new) = (solver.t_prev(), solver.t());
        let mut hit = None;
        if let (Some((level, dir)), Some(g0)) = (spec.section, g_prev) {
            let g1 = solver.y()[2] - level;
            let up = g0 < 0.0 && g1 >= 0.0;
            let down = g0 > 0.0 && g1 <= 0.0;
            let wanted = match dir {
                Crossing::Up => up,
                Crossing::Down => down,
                Crossing::Either => up || down,
            };
            if wanted {
                let t_hit = brent_with_values(|t| solver.dense(t)[2] - level, t_old, t_new, g0, g1, 1e-14)
                    .unwrap_or(t_new);
                hit = Some((t_hit, up));
            } else {
                g_prev = Some(g1);
            }
        }
        let t_sampled = hit.map_or(t_new, |(t_hit, _)| t_hit);
        if let (Some(dt), Some(ts)) = (spec.sample_dt, next_sample.as_mut()) {
            while (t_sampled - *ts) * direction > 0.0 || *ts == t_new {
                let y = solver.dense(*ts);
                traj.clairaut_drift = traj.clairaut_drift.max(drift(&y));
                traj.push(*ts, PhasePoint::from_array(y));
                *ts += dt.abs() * direction;
            }
        }
        if let Some((t_hit, up)) = hit {
            solver.restep_to(t_hit);
            let y = *solver.y();
            traj.clairaut_drift = traj.clairaut_drift.max(drift(&y));
            let x = PhasePoint::from_array(y);
            traj.push(t_hit, x);
            traj.events.push(Event { time: t_hit, kind: EventKind::SectionCross, state: x });
            crossings += 1;
            g_prev = Some(if up { f64::MIN_POSITIVE } else { -f64::MIN_POSITIVE });
            if spec.stop_after.is_some_and(|n| crossings >= n) {
                return Ok(traj);
            }
            continue;
        }

        let y = *solver.y();
        traj.clairaut_drift = traj.clairaut_drift.max(drift(&y));
        let x = PhasePoint::from_array(y);
        if spec.record_steps || solver.t() == t_max {
            traj.push(solver.t(), x);
        }
        if !(x.s > guard && x.s < m_len - guard) {
            traj.push(solver.t(), x);
            traj.events.push(Event { time: solver.t(), kind: EventKind::PolePassage, state: x });
            traj.events.push(Event { time: solver.t(), kind: EventKind::Truncated, state: x });
            return Ok(traj);
        }
        if solver.t() == t_max {
            return Ok(traj);
        }
    }
}

/// Qualitative type of a geodesic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Classification {
    Meridional,
    Equatorial,
    Oscillating { s1: f64, s2: f64 },
    Asymptotic { s_minus: f64, s_plus: f64 },
}

/// Classifies the geodesic through `x0` using only the profile and `K`.
pub fn classify(p: &MetricProfile, x0: &PhasePoint, opts: &FlowOptions) -> Result<Classification> {
    let m_len = p.length();
    if !(x0.s > 0.0 && x0.s < m_len) {
        return Err(Error::OutsideRegularPart { s: x0.s });
    }
    let equators = p.equators()?;
    let r0 = equators.reference().radius;
    let k = clairaut(p, x0).abs();
    if k <= opts.pole_guard_k * r0 {
        return Ok(Classification::Meridional);
    }
    let on_equator = equators.list.iter().any(|e| (e.s - x0.s).abs() < 1e-9);
    if on_equator && x0.beta.sin().abs() < 1e-12 {
        return Ok(Classification::Equatorial);
    }
    // Monotone pieces of r are separated by the critical points.
    let mut nodes = vec![0.0];
    nodes.extend(equators.list.iter().map(|e| e.s));
    nodes.push(m_len);
    let piece = nodes.windows(2).position(|w| x0.s >= w[0] && x0.s <= w[1]).unwrap_or(0);

    let boundary = |leftward: bool| -> Result<(f64, bool)> {
        let mut i = piece;
        loop {
            let (a, b) = (nodes[i], nodes[i + 1]);
            let far = if leftward { a } else { b };
            let is_critical = far > 0.0 && far < m_len;
            let r_far = p.r(far);
            if is_critical {
                let rel = (r_far - k).abs() / k;
                if r_far == k {
                    return Ok((far, true));
                }
                if rel < opts.ambiguity_tol {
                    return Err(Error::ToleranceAmbiguity { k, critical: r_far });
                }
            }
            if r_far < k {
                let (lo, hi) = if leftward { (a, x0.s.min(b)) } else { (x0.s.max(a), b) };
                let root = brent(|s| p.r(s) - k, lo, hi, 1e-14).unwrap_or(far);
                return Ok((root, false));
            }
            if leftward {
                i -= 1;
            } else {
                i += 1;
            }
        }
    };
    let (s1, asym_left) = boundary(true)?;
    let (s2, asym_right) = boundary(false)?;
    if asym_left || asym_right {
        return Ok(Classification::Asymptotic { s_minus: s1, s_plus: s2 });
    }
    Ok(Classification::Oscillating { s1, s2 })
}

/// `θ` advance collected by a meridian passing through a cone point of the
/// given order: `order·π`, i.e. straight through for odd orders and a
/// reflection for even ones.
pub fn meridian_theta_jump(order: u32) -> f64 {
    order as f64 * std::f64::consts::PI
}

/// Closed meridian assembled from arcs: length `(1+α)·2M` and winding
/// `(1+α)(m+n)/2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeridianOrbit {
    pub length: f64,
    pub winding: f64,
    pub returns: u32,
}

pub fn closed_meridian(p: &MetricProfile) -> MeridianOrbit {
    let sig = p.signature();
    let returns = 1 + sig.alpha();
    let per_return = meridian_theta_jump(sig.m()) + meridian_theta_jump(sig.n());
    MeridianOrbit {
        length: returns as f64 * 2.0 * p.length(),
        winding: returns as f64 * per_return / std::f64::consts::TAU,
        returns,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profile::{make_dumbbell, make_round};
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI, TAU};

    #[test]
    fn clairaut_examples() {
        let p = make_round();
        assert!((clairaut(&p, &PhasePoint::new(0.0, 0.0, FRAC_PI_2)) - 1.0).abs() < 1e-15);
        assert!(clairaut(&p, &PhasePoint::new(0.0, FRAC_PI_2, PI / 3.0)).abs() < 1e-15);
        assert!((clairaut(&p, &PhasePoint::new(0.0, FRAC_PI_4, FRAC_PI_2)) - 0.5f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn equator_orbit() {
        let p = make_round();
        let tr = integrate(&p, PhasePoint::new(0.0, 0.0, FRAC_PI_2), TAU, &EventSpec::default(), &FlowOptions::default()).unwrap();
        let (t, x) = tr.last();
        assert_eq!(t, TAU);
        assert!((x.theta - TAU).abs() < 1e-9 && x.beta.abs() < 1e-12 && (x.s - FRAC_PI_2).abs() < 1e-12);
    }

    #[test]
    fn great_circle_closes() {
        let p = make_round();
        let x0 = PhasePoint::new(0.0, FRAC_PI_4, FRAC_PI_2);
        let tr = integrate(&p, x0, TAU, &EventSpec::default(), &FlowOptions::default()).unwrap();
        let (_, x) = tr.last();
        assert!((x.theta - TAU).abs() < 1e-8, "{x:?}");
        assert!((x.beta - FRAC_PI_4).abs() < 1e-8 && (x.s - FRAC_PI_2).abs() < 1e-8);
        assert!(tr.clairaut_drift < 1e-9);
        assert!(tr.speed_defect(&p) < 1e-12);
    }

    #[test]
    fn section_crossing_is_accurate() {
        let p = make_round();
        let x0 = PhasePoint::new(0.0, 1.0, FRAC_PI_2);
        let tr = integrate(&p, x0, 10.0, &EventSpec::first_crossing(FRAC_PI_2, Crossing::Up), &FlowOptions::default()).unwrap();
        let e = tr.crossings().next().unwrap();
        assert!((e.time - TAU).abs() < 1e-10, "{}", e.time);
        assert!((e.state.s - FRAC_PI_2).abs() < 1e-12);
    }

    #[test]
    fn time_reversal() {
        let p = make_dumbbell(0.5).unwrap();
        let x0 = PhasePoint::new(0.3, 0.7, 1.1);
        let opts = FlowOptions::default();
        let fwd = integrate(&p, x0, 12.0, &EventSpec::default(), &opts).unwrap();
        let back = integrate(&p, fwd.last().1, -12.0, &EventSpec::default(), &opts).unwrap();
        assert!(back.last().1.phase_distance(&x0) < 1e-7);
    }

    #[test]
    fn theta_monotone_for_nonzero_k() {
        let p = make_dumbbell(0.5).unwrap();
        let tr = integrate(&p, PhasePoint::new(0.0, 2.0, 0.9), 20.0, &EventSpec::default(), &FlowOptions::default()).unwrap();
        assert!(tr.states.windows(2).all(|w| w[1].theta < w[0].theta));
    }

    #[test]
    fn classify_round() {
        let p = make_round();
        let opts = FlowOptions::default();
        match classify(&p, &PhasePoint::new(0.0, FRAC_PI_4, FRAC_PI_2), &opts).unwrap() {
            Classification::Oscillating { s1, s2 } => {
                assert!((s1 - FRAC_PI_4).abs() < 1e-12 && (s2 - 3.0 * FRAC_PI_4).abs() < 1e-12);
            }
            other => panic!("{other:?}"),
        }
        assert_eq!(classify(&p, &PhasePoint::new(0.0, FRAC_PI_2, PI / 3.0), &opts).unwrap(), Classification::Meridional);
        assert_eq!(classify(&p, &PhasePoint::new(0.0, 0.0, FRAC_PI_2), &opts).unwrap(), Classification::Equatorial);
    }

    #[test]
    fn classify_dumbbell_near_neck() {
        let p = make_dumbbell(0.5).unwrap();
        let bulge = p.equators().unwrap().list[0];
        let k = 0.5 - 1e-3;
        let x0 = PhasePoint::new(0.0, (k / bulge.radius).acos(), bulge.s);
        match classify(&p, &x0, &FlowOptions::default()).unwrap() {
            Classification::Oscillating { s1, s2 } => assert!(s1 < bulge.s && s2 > FRAC_PI_2),
            other => panic!("{other:?}"),
        }
        let strict = FlowOptions { ambiguity_tol: 1e-2, ..FlowOptions::default() };
        assert!(matches!(classify(&p, &x0, &strict), Err(Error::ToleranceAmbiguity { .. })));
        // Exactly at the neck value the band ends at the neck.
        let x1 = PhasePoint::new(0.0, (0.5 / bulge.radius).acos(), bulge.s);
        let c = classify(&p, &x1, &FlowOptions { ambiguity_tol: 0.0, ..FlowOptions::default() });
        assert!(matches!(c, Ok(Classification::Asymptotic { .. }) | Ok(Classification::Oscillating { .. })));
    }

    #[test]
    fn meridian_assembly() {
        let m = closed_meridian(&make_round());
        assert_eq!((m.length, m.winding, m.returns), (TAU, 1.0, 1));
    }
}
