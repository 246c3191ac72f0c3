//! CSV tables and the text report.
//!
//! Every float is written with 17 significant digits so that reruns of the
//! same configuration produce byte-identical files.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use spindle_core::battery::Outcome;
use spindle_core::config::RunConfig;
use spindle_core::flow::{clairaut, Trajectory};
use spindle_core::genfun::{CriticalSet, GeneratingFunction, FLAT_TOL, ODDNESS_TOL, PLATEAU_TOL};
use spindle_core::pipeline::{Analysis, SweepRow};
use spindle_core::profile::MetricProfile;
use spindle_core::systole::{EnumOptions, GeodesicKind, Verdict, AT_BOUND_TOL};

pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn opt(x: Option<f64>) -> String {
    x.map_or_else(String::new, num)
}

/// Writes `rows` under `header` to `dir/name`.
pub fn write_csv(dir: &Path, name: &str, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<()> {
    let path = dir.join(name);
    let mut w = csv::Writer::from_path(&path).with_context(|| format!("creating {}", path.display()))?;
    w.write_record(header)?;
    for row in rows {
        w.write_record(&row)?;
    }
    w.flush().with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

pub fn profile_csv(dir: &Path, p: &MetricProfile, samples: usize) -> Result<()> {
    let m = p.length();
    let rows = (0..samples).map(|i| {
        let s = m * i as f64 / (samples - 1) as f64;
        let j = p.jet(s);
        vec![num(s), num(j.r), num(j.dr), num(j.ddr)]
    });
    write_csv(dir, "profile.csv", &["s", "r", "dr", "ddr"], rows)
}

pub fn trajectory_csv(dir: &Path, p: &MetricProfile, tr: &Trajectory) -> Result<()> {
    let rows = tr.times.iter().zip(&tr.states).map(|(t, x)| vec![num(*t), num(x.theta), num(x.beta), num(x.s), num(clairaut(p, x))]);
    write_csv(dir, "trajectory.csv", &["t", "theta", "beta", "s", "clairaut"], rows)
}

pub fn sweep_csv(dir: &Path, param: &str, rows: &[SweepRow]) -> Result<()> {
    let header = [param, "area", "l_min_contr", "rho_contr", "rho_contr_2", "rho_periodspec", "rho_sys", "margin"];
    let rows = rows.iter().map(|r| {
        vec![num(r.param), num(r.area), num(r.l_min_contr), num(r.rho_contr), opt(r.rho_contr_2), num(r.rho_periodspec), num(r.rho_sys), num(r.margin)]
    });
    write_csv(dir, "sweep.csv", &header, rows)
}

fn genfun_rows(g: &GeneratingFunction) -> impl Iterator<Item = (f64, f64, f64, f64)> + '_ {
    (0..g.eta_grid.len()).map(move |i| (g.eta_grid[i], g.f[i], g.fp[i], g.tau(i)))
}

/// All tables of an analysis.
pub fn analysis_csvs(dir: &Path, p: &MetricProfile, a: &Analysis) -> Result<()> {
    profile_csv(dir, p, 1001)?;
    write_csv(
        dir,
        "returns.csv",
        &["eta", "tau", "delta_xi", "winding", "ode_drift", "censored"],
        a.returns.entries.iter().map(|e| {
            vec![num(e.eta), num(e.tau), num(e.delta_xi), num(e.winding), num(e.ode_drift), e.censored.to_string()]
        }),
    )?;
    let by_returns = &a.genfun_returns;
    write_csv(
        dir,
        "genfun.csv",
        &["eta", "f", "fp", "tau", "f_returns", "fp_returns"],
        genfun_rows(&a.genfun_integral).map(|(eta, f, fp, tau)| {
            let j = by_returns.index_of(eta);
            vec![num(eta), num(f), num(fp), num(tau), opt(j.map(|j| by_returns.f[j])), opt(j.map(|j| by_returns.fp[j]))]
        }),
    )?;
    let critical: Vec<Vec<String>> = match &a.critical {
        CriticalSet::AllCritical { mu } => vec![vec![String::new(), num(*mu), "all".into()]],
        CriticalSet::Points(pts) => pts.iter().map(|c| vec![num(c.eta0), num(c.mu), format!("{:?}", c.kind).to_lowercase()]).collect(),
    };
    write_csv(dir, "critical.csv", &["eta0", "mu", "kind"], critical)?;
    write_csv(
        dir,
        "geodesics.csv",
        &["kind", "eta", "q", "length", "total_winding", "class", "family", "class_from_limit"],
        a.systole.geodesics.iter().map(|g| {
            let kind = match g.kind {
                GeodesicKind::EquatorIterate { i, s } => format!("equator(i={i};s={})", num(s)),
                GeodesicKind::Meridian => "meridian".into(),
                GeodesicKind::Oscillating => "oscillating".into(),
            };
            vec![
                kind,
                opt(g.eta),
                g.q.to_string(),
                num(g.length),
                g.total_winding.to_string(),
                g.homotopy.value.to_string(),
                g.family.to_string(),
                g.class_from_limit.to_string(),
            ]
        }),
    )?;
    write_csv(
        dir,
        "tau.csv",
        &["k", "tau"],
        a.systole.tau_seq.iter().enumerate().map(|(i, t)| vec![(i + 1).to_string(), num(*t)]),
    )?;
    let s = &a.systole;
    let mut ratios = vec![
        vec!["rho_contr".into(), num(s.rho_contr), num(s.bounds.contractible), verdict_str(s.verdicts.contractible)],
        vec!["rho_periodspec".into(), num(s.rho_periodspec), num(s.bounds.period_spectrum), verdict_str(s.verdicts.period_spectrum)],
        vec!["rho_sys".into(), num(s.rho_sys), String::new(), String::new()],
        vec!["rho_s3".into(), num(s.rho_s3), String::new(), String::new()],
    ];
    for &(k, v) in &s.rho_contr_k {
        let (bound, verdict) = match (k, s.bounds.order_two, s.verdicts.order_two) {
            (2, Some(b), Some(v)) => (num(b), verdict_str(v)),
            _ => (String::new(), String::new()),
        };
        ratios.push(vec![format!("rho_contr_{k}"), num(v), bound, verdict]);
    }
    write_csv(dir, "ratios.csv", &["ratio", "value", "bound", "verdict"], ratios)
}

pub fn verdict_str(v: Verdict) -> String {
    match v {
        Verdict::BelowBound => "below_bound".into(),
        Verdict::AtBound { .. } => "at_bound".into(),
        Verdict::Violation => "violation".into(),
    }
}

/// Human-readable summary, including every tolerance that enters a verdict.
pub fn analysis_text(cfg: &RunConfig, a: &Analysis) -> String {
    let mut o = String::new();
    let s = &a.systole;
    let enum_opts = EnumOptions::defaults_for(a.signature, a.annulus.length);
    let _ = writeln!(o, "orbifold {}  (alpha = {})", a.signature, a.signature.alpha());
    let _ = writeln!(o, "metric {:?}", cfg.metric);
    let _ = writeln!(o, "\n[geometry]");
    let eq = a.equators.reference();
    let _ = writeln!(o, "reference equator     s0 = {}  r0 = {}", num(eq.s), num(eq.radius));
    let _ = writeln!(o, "equators              {}", a.equators.list.len());
    let _ = writeln!(o, "L                     {}", num(a.annulus.length));
    let _ = writeln!(o, "area                  {}", num(a.volume.area));
    let _ = writeln!(o, "contact volume        {} (direct)  {} (decomposed)", num(a.volume.vol_direct), num(a.volume.vol_decomposed));
    let _ = writeln!(o, "volume mismatch       {:.3e}", a.volume.rel_mismatch);

    let _ = writeln!(o, "\n[generating function]");
    match &a.critical {
        CriticalSet::AllCritical { mu } => {
            let _ = writeln!(o, "F is constant         {}", num(*mu));
        }
        CriticalSet::Points(pts) => {
            for c in pts {
                let _ = writeln!(o, "critical point        eta = {}  F = {}  {:?}", num(c.eta0), num(c.mu), c.kind);
            }
        }
    }
    let c = &a.checks;
    let _ = writeln!(o, "route |F| gap / L     {:.3e}", c.route_f);
    let _ = writeln!(o, "route |F'| gap / L    {:.3e}", c.route_fp);
    let _ = writeln!(o, "winding identity / L  {:.3e}", c.winding_identity);
    let _ = writeln!(o, "tau identity / L      {:.3e}", c.tau_identity);
    let _ = writeln!(o, "evenness / L          {:.3e}", c.evenness);
    let _ = writeln!(o, "oddness of F' / L     {:.3e}", c.oddness);
    let _ = writeln!(o, "lower-bound margin    {:.3e}", c.lower_bound_margin);
    let _ = writeln!(o, "flatness / L          {:.3e}", c.flatness);
    let _ = writeln!(o, "Clairaut drift        {:.3e}", c.clairaut_drift);
    let _ = writeln!(o, "censored returns      {}", c.censored);

    let _ = writeln!(o, "\n[closed geodesics]  cutoff {}  q_max {}", num(a.cutoff), a.q_max);
    let _ = writeln!(o, "enumerated            {}", s.geodesics.len());
    let _ = writeln!(o, "rejected candidates   {}", a.enumeration.rejected.len());
    let _ = writeln!(o, "max closure defect    {:.3e}", a.enumeration.max_closure_defect);
    if s.geodesics.iter().any(|g| g.class_from_limit) {
        let _ = writeln!(o, "note: meridian classes are assigned from the limiting winding");
    }
    let _ = writeln!(o, "l_min                 {}", num(s.l_min));
    for &(k, l) in &s.l_min_k {
        let _ = writeln!(o, "l_min in order-{k:<2}     {}", num(l));
    }
    let taus: Vec<String> = s.tau_seq.iter().map(|t| num(*t)).collect();
    let _ = writeln!(o, "tau                   [{}]", taus.join(", "));

    let _ = writeln!(o, "\n[ratios]");
    let line = |o: &mut String, name: &str, v: f64, b: f64, verdict: Verdict| {
        let _ = writeln!(o, "{name:<21} {}  bound {}  {}", num(v), num(b), verdict_str(verdict));
    };
    line(&mut o, "rho_contr", s.rho_contr, s.bounds.contractible, s.verdicts.contractible);
    if let (Some(b), Some(v), Some(vd)) = (s.bounds.order_two, s.rho_k(2), s.verdicts.order_two) {
        line(&mut o, "rho_contr,2", v, b, vd);
    }
    line(&mut o, "rho_periodspec", s.rho_periodspec, s.bounds.period_spectrum, s.verdicts.period_spectrum);
    let _ = writeln!(o, "{:<21} {}", "rho_sys", num(s.rho_sys));
    let _ = writeln!(o, "{:<21} {}", "rho_contr/(2pi(m+n))", num(s.rho_s3));

    let n = &a.numerics;
    let _ = writeln!(o, "\n[tolerances]");
    let _ = writeln!(o, "eta grid              {} points (+{} refined)", n.eta_grid_n, a.returns.refined);
    let _ = writeln!(o, "return map ODE        rel {:.1e}  abs {:.1e}", n.ode_rel_tol, n.ode_abs_tol);
    let _ = writeln!(o, "closure ODE           rel {:.1e}  abs {:.1e}", enum_opts.flow.rel_tol, enum_opts.flow.abs_tol);
    let _ = writeln!(o, "closure distance      {:.1e}", enum_opts.closure_tol);
    let _ = writeln!(o, "quadrature            rel {:.1e}", n.quad_rel_tol);
    let _ = writeln!(o, "flatness              {FLAT_TOL:.1e}");
    let _ = writeln!(o, "plateau               {PLATEAU_TOL:.1e}");
    let _ = writeln!(o, "oddness               {ODDNESS_TOL:.1e}");
    let _ = writeln!(o, "at-bound              {AT_BOUND_TOL:.1e} relative");
    let verdict = if s.verdicts.any_violation() { "VIOLATION" } else { "ok" };
    let _ = writeln!(o, "\nverdict: {verdict}");
    o
}

pub fn battery_text(outcomes: &[Outcome]) -> String {
    let mut o = String::new();
    for r in outcomes {
        let _ = writeln!(o, "{r}");
    }
    let passed = outcomes.iter().filter(|r| r.pass).count();
    let _ = writeln!(o, "{passed}/{} criteria passed", outcomes.len());
    o
}

pub fn write_text(dir: &Path, name: &str, text: &str) -> Result<()> {
    let path = dir.join(name);
    fs::write(&path, text).with_context(|| format!("writing {}", path.display()))
}
