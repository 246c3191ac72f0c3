mod report;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use spindle_core::annulus::{Annulus, AnnulusPoint};
use spindle_core::battery::{self, BatteryOptions};
use spindle_core::config::{MetricSpec, RunConfig};
use spindle_core::flow::{self, EventSpec};
use spindle_core::pipeline;

/// Closed geodesics and systolic ratios of rotationally symmetric spindle
/// orbifolds.
#[derive(Debug, Parser)]
#[command(name = "spindle", version)]
struct Cli {
    /// TOML run configuration; defaults apply when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory, overriding `output.out_dir`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads (default: available parallelism).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Length cutoff for the closed-geodesic enumeration.
    #[arg(long, global = true)]
    cutoff: Option<f64>,
    /// Largest number of annulus returns per closed geodesic.
    #[arg(long, global = true)]
    qmax: Option<u32>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Full pipeline on the configured metric: report and CSV tables.
    Analyze,
    /// Integrates one geodesic from the Birkhoff annulus.
    Geodesic {
        /// Annulus coordinate `η = -cos β` in (-1, 1).
        #[arg(long, allow_hyphen_values = true)]
        eta: f64,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        xi: f64,
        /// Arc length to integrate; negative runs backwards.
        #[arg(long, allow_hyphen_values = true)]
        t_max: f64,
        /// Sampling interval of the trajectory table (default: every step).
        #[arg(long)]
        dt: Option<f64>,
    },
    /// Samples the configured profile `r(s)`.
    BesseGen {
        #[arg(long, default_value_t = 1001)]
        samples: usize,
    },
    /// Analyzes a one-parameter family built from the configured metric.
    Sweep {
        #[arg(long, value_enum)]
        param: SweepParam,
        #[arg(long, allow_hyphen_values = true)]
        from: f64,
        #[arg(long, allow_hyphen_values = true)]
        to: f64,
        #[arg(long, default_value_t = 5)]
        steps: usize,
    },
    /// Runs the acceptance battery on the built-in corpus.
    Verify {
        /// Random orbits per profile in the conservation check.
        #[arg(long, default_value_t = 100)]
        orbits: usize,
    },
}

/// Field of a `perturbed` metric varied by `sweep`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SweepParam {
    Eps,
    Bulge,
    Amplitude,
    Center,
    HalfWidth,
}

impl SweepParam {
    fn name(self) -> &'static str {
        match self {
            Self::Eps => "eps",
            Self::Bulge => "bulge",
            Self::Amplitude => "amplitude",
            Self::Center => "center",
            Self::HalfWidth => "half_width",
        }
    }

    fn apply(self, spec: &MetricSpec, x: f64) -> Result<MetricSpec> {
        let mut spec = spec.clone();
        let MetricSpec::Perturbed { eps, bulge, band, .. } = &mut spec else {
            bail!("sweep needs a `perturbed` metric");
        };
        match self {
            Self::Eps => *eps = Some(x),
            Self::Bulge => *bulge = x,
            _ => {
                let b = band.as_mut().context("sweeping a band parameter needs a `band` table")?;
                match self {
                    Self::Amplitude => b.amplitude = x,
                    Self::Center => b.center = x,
                    _ => b.half_width = x,
                }
            }
        }
        Ok(spec)
    }
}

/// Process outcome: success, a bound violation or failed criterion, or an
/// error before a verdict could be reached.
enum Status {
    Ok,
    Violation,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(Status::Ok) => ExitCode::SUCCESS,
        Ok(Status::Violation) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: &Cli) -> Result<Status> {
    if let Some(n) = cli.jobs {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().context("configuring worker pool")?;
    }
    let mut cfg = RunConfig::load(cli.config.as_deref())?;
    if let Some(c) = cli.cutoff {
        cfg.numerics.length_cutoff = Some(c);
    }
    if let Some(q) = cli.qmax {
        cfg.numerics.q_max = Some(q);
    }
    cfg.numerics.validate()?;
    let out = cli.out.clone().unwrap_or_else(|| cfg.output.out_dir.clone());
    std::fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;

    match &cli.command {
        Command::Analyze => analyze(&cfg, &out),
        Command::Geodesic { eta, xi, t_max, dt } => geodesic(&cfg, &out, *eta, *xi, *t_max, *dt),
        Command::BesseGen { samples } => {
            if *samples < 2 {
                bail!("--samples must be at least 2");
            }
            report::profile_csv(&out, &cfg.metric.build()?, *samples)?;
            Ok(Status::Ok)
        }
        Command::Sweep { param, from, to, steps } => sweep(&cfg, &out, *param, *from, *to, *steps),
        Command::Verify { orbits } => verify(&cfg, &out, *orbits),
    }
}

fn analyze(cfg: &RunConfig, out: &Path) -> Result<Status> {
    let p = cfg.metric.build()?;
    let a = pipeline::analyze(&p, &cfg.numerics)?;
    let text = report::analysis_text(cfg, &a);
    print!("{text}");
    report::write_text(out, "report.txt", &text)?;
    if cfg.output.emit_csv {
        report::analysis_csvs(out, &p, &a)?;
    }
    Ok(if a.systole.verdicts.any_violation() { Status::Violation } else { Status::Ok })
}

fn geodesic(cfg: &RunConfig, out: &Path, eta: f64, xi: f64, t_max: f64, dt: Option<f64>) -> Result<Status> {
    let p = cfg.metric.build()?;
    let ann = Annulus::new(&p)?;
    let start = AnnulusPoint::new(xi, eta, ann.length)?;
    let spec = EventSpec { record_steps: dt.is_none(), sample_dt: dt, ..EventSpec::default() };
    let tr = flow::integrate(&p, ann.phase_point(start), t_max, &spec, &cfg.numerics.flow())?;
    report::trajectory_csv(out, &p, &tr)?;
    let (t, x) = tr.last();
    println!("t = {}  theta = {}  beta = {}  s = {}", report::num(t), report::num(x.theta), report::num(x.beta), report::num(x.s));
    println!("Clairaut drift {:.3e}", tr.clairaut_drift);
    Ok(Status::Ok)
}

fn sweep(cfg: &RunConfig, out: &Path, param: SweepParam, from: f64, to: f64, steps: usize) -> Result<Status> {
    if steps == 0 {
        bail!("--steps must be positive");
    }
    let params: Vec<f64> = if steps == 1 {
        vec![from]
    } else {
        (0..steps).map(|i| from + (to - from) * i as f64 / (steps - 1) as f64).collect()
    };
    // Surface spec errors before the parallel run.
    for &x in &params {
        param.apply(&cfg.metric, x)?;
    }
    let rows = pipeline::sweep(&params, &cfg.numerics, |x| {
        param.apply(&cfg.metric, x).expect("checked above").build()
    })?;
    report::sweep_csv(out, param.name(), &rows)?;
    for r in &rows {
        println!("{} = {}  rho_contr = {}  margin = {:.3e}", param.name(), report::num(r.param), report::num(r.rho_contr), r.margin);
    }
    Ok(if rows.iter().any(|r| r.margin < -spindle_core::systole::AT_BOUND_TOL) { Status::Violation } else { Status::Ok })
}

fn verify(cfg: &RunConfig, out: &Path, orbits: usize) -> Result<Status> {
    let opts = BatteryOptions { seed: cfg.seed, numerics: cfg.numerics, random_orbits: orbits, ..BatteryOptions::default() };
    let outcomes = battery::run(&opts);
    let text = report::battery_text(&outcomes);
    print!("{text}");
    report::write_text(out, "verify.txt", &text)?;
    Ok(if outcomes.iter().all(|o| o.pass) { Status::Ok } else { Status::Violation })
}
