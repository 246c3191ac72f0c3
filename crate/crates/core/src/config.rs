//! Run configuration: a TOML document with `metric`, `numerics` and `output`
//! tables plus a top-level `seed`.
//!
//! ```toml
//! seed = 7
//!
//! [metric]
//! type = "perturbed"      # round | besse | perturbed | sampled | dumbbell
//! m = 2
//! n = 3
//! h_coeffs = []           # empty: round base for `eps`, linear Besse base for `band`
//! eps = 0.3               # cap width of the pole perturbation
//! bulge = 0.3
//! band = { center = 1.0, half_width = 0.3, amplitude = 0.05 }
//!
//! [numerics]
//! eta_grid_n = 401
//!
//! [output]
//! out_dir = "out"
//! ```
//!
//! Any key can be overridden from the environment: `SPINDLE_NUMERICS__Q_MAX=6`
//! sets `numerics.q_max`.  Values are parsed as TOML, falling back to a bare
//! string.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::annulus::ReturnOptions;
use crate::error::{Error, Result};
use crate::flow::FlowOptions;
use crate::profile::{
    make_besse, make_dumbbell, make_round, make_sampled, perturb_band, perturb_poles, BesseSpec, MetricProfile,
    OrbifoldSignature,
};

pub const ENV_PREFIX: &str = "SPINDLE_";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BandSpec {
    pub center: f64,
    pub half_width: f64,
    pub amplitude: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
#[derive(Default)]
pub enum MetricSpec {
    #[default]
    Round,
    Besse {
        m: u32,
        n: u32,
        #[serde(default)]
        h_coeffs: Vec<f64>,
    },
    Perturbed {
        m: u32,
        n: u32,
        #[serde(default)]
        h_coeffs: Vec<f64>,
        eps: Option<f64>,
        #[serde(default = "default_bulge")]
        bulge: f64,
        band: Option<BandSpec>,
    },
    Sampled {
        m: u32,
        n: u32,
        knots: Vec<(f64, f64)>,
    },
    Dumbbell {
        c: f64,
    },
}

fn default_bulge() -> f64 {
    0.3
}


impl MetricSpec {
    pub fn build(&self) -> Result<MetricProfile> {
        match self {
            Self::Round => Ok(make_round()),
            Self::Besse { m, n, h_coeffs } => make_besse(BesseSpec::new(OrbifoldSignature::new(*m, *n)?, h_coeffs.clone())),
            Self::Perturbed { m, n, h_coeffs, eps, bulge, band } => {
                let sig = OrbifoldSignature::new(*m, *n)?;
                let mut p = if h_coeffs.is_empty() && eps.is_some() {
                    make_round()
                } else {
                    make_besse(BesseSpec::new(sig, h_coeffs.clone()))?
                };
                if eps.is_none() && band.is_none() {
                    return Err(Error::ConfigParse("perturbed metric needs `eps` or `band`".into()));
                }
                if let Some(eps) = eps {
                    p = perturb_poles(&p, sig, *eps, *bulge)?;
                }
                if let Some(b) = band {
                    p = perturb_band(&p, b.center, b.half_width, b.amplitude)?;
                }
                Ok(p)
            }
            Self::Sampled { m, n, knots } => make_sampled(OrbifoldSignature::new(*m, *n)?, knots.clone()),
            Self::Dumbbell { c } => make_dumbbell(*c),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Numerics {
    pub eta_grid_n: usize,
    pub ode_rel_tol: f64,
    pub ode_abs_tol: f64,
    pub quad_rel_tol: f64,
    /// Defaults to `2(2-α)`.
    pub q_max: Option<u32>,
    /// Defaults to `3(m+n)L`.
    pub length_cutoff: Option<f64>,
    pub time_cap_factor: f64,
}

impl Default for Numerics {
    fn default() -> Self {
        Self {
            eta_grid_n: 401,
            ode_rel_tol: 1e-10,
            ode_abs_tol: 1e-12,
            quad_rel_tol: 1e-10,
            q_max: None,
            length_cutoff: None,
            time_cap_factor: 50.0,
        }
    }
}

impl Numerics {
    pub fn validate(&self) -> Result<()> {
        if self.eta_grid_n.is_multiple_of(2) || self.eta_grid_n < 17 {
            return Err(Error::ConfigParse(format!("eta_grid_n = {} must be odd and at least 17", self.eta_grid_n)));
        }
        let positive = [
            ("ode_rel_tol", self.ode_rel_tol),
            ("ode_abs_tol", self.ode_abs_tol),
            ("quad_rel_tol", self.quad_rel_tol),
            ("time_cap_factor", self.time_cap_factor),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::ConfigParse(format!("{name} = {v} must be positive")));
            }
        }
        if let Some(c) = self.length_cutoff {
            if !(c > 0.0) {
                return Err(Error::ConfigParse(format!("length_cutoff = {c} must be positive")));
            }
        }
        if self.q_max == Some(0) {
            return Err(Error::ConfigParse("q_max must be at least 1".into()));
        }
        Ok(())
    }

    pub fn flow(&self) -> FlowOptions {
        FlowOptions { rel_tol: self.ode_rel_tol, abs_tol: self.ode_abs_tol, ..FlowOptions::default() }
    }

    pub fn returns(&self) -> ReturnOptions {
        ReturnOptions { flow: self.flow(), time_cap_factor: self.time_cap_factor, ..ReturnOptions::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Output {
    pub out_dir: PathBuf,
    pub emit_csv: bool,
}

impl Default for Output {
    fn default() -> Self {
        Self { out_dir: PathBuf::from("out"), emit_csv: true }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub metric: MetricSpec,
    pub numerics: Numerics,
    pub output: Output,
}

impl RunConfig {
    /// Parses a TOML document and applies environment overrides.
    pub fn from_toml<I>(text: &str, env: I) -> Result<Self>
    where
        I: IntoIterator<Item = (String, String)>,
    {
        let mut table: toml::Table = text.parse().map_err(|e: toml::de::Error| Error::ConfigParse(e.to_string()))?;
        let mut overrides: Vec<(String, String)> = env.into_iter().filter(|(k, _)| k.starts_with(ENV_PREFIX)).collect();
        overrides.sort();
        for (key, value) in overrides {
            apply_override(&mut table, &key[ENV_PREFIX.len()..], &value)?;
        }
        let cfg: Self = toml::Value::Table(table).try_into().map_err(|e: toml::de::Error| Error::ConfigParse(e.to_string()))?;
        cfg.numerics.validate()?;
        Ok(cfg)
    }

    /// Reads `path` (or starts from defaults) and applies `SPINDLE_*`
    /// variables from the process environment.
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let text = match path {
            Some(p) => std::fs::read_to_string(p).map_err(|e| Error::Io(format!("{}: {e}", p.display())))?,
            None => String::new(),
        };
        Self::from_toml(&text, std::env::vars())
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }
}

fn apply_override(table: &mut toml::Table, key: &str, raw: &str) -> Result<()> {
    let path: Vec<String> = key.split("__").map(str::to_ascii_lowercase).collect();
    if path.iter().any(String::is_empty) {
        return Err(Error::ConfigParse(format!("malformed override key {ENV_PREFIX}{key}")));
    }
    let value = format!("v = {raw}")
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()));
    let (last, parents) = path.split_last().expect("non-empty path");
    let mut cur = table;
    for p in parents {
        cur = cur
            .entry(p.clone())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()))
            .as_table_mut()
            .ok_or_else(|| Error::ConfigParse(format!("override {ENV_PREFIX}{key}: `{p}` is not a table")))?;
    }
    cur.insert(last.clone(), value);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<RunConfig> {
        RunConfig::from_toml(text, Vec::new())
    }

    #[test]
    fn defaults() {
        let cfg = parse("").unwrap();
        assert_eq!(cfg.metric, MetricSpec::Round);
        assert_eq!(cfg.numerics.eta_grid_n, 401);
        assert!(cfg.output.emit_csv);
    }

    #[test]
    fn besse_block() {
        let cfg = parse("[metric]\ntype = \"besse\"\nm = 2\nn = 1\nh_coeffs = [0.1]\n").unwrap();
        let p = cfg.metric.build().unwrap();
        assert_eq!(p.signature().order(), 3);
    }

    #[test]
    fn perturbed_block_with_band() {
        let text = "[metric]\ntype = \"perturbed\"\nm = 1\nn = 3\nh_coeffs = [0.0]\nband = { center = 0.8, half_width = 0.3, amplitude = -0.1 }\n";
        let p = parse(text).unwrap().metric.build().unwrap();
        assert!(p.r(0.8) < make_besse(BesseSpec::linear(OrbifoldSignature::new(1, 3).unwrap())).unwrap().r(0.8));
    }

    #[test]
    fn even_grid_rejected() {
        let err = parse("[numerics]\neta_grid_n = 400\n").unwrap_err();
        assert!(matches!(err, Error::ConfigParse(_)));
    }

    #[test]
    fn negative_tolerance_rejected() {
        assert!(parse("[numerics]\node_rel_tol = -1e-3\n").is_err());
    }

    #[test]
    fn unknown_key_rejected() {
        assert!(parse("[numerics]\netagrid = 3\n").is_err());
    }

    #[test]
    fn env_overrides() {
        let env = vec![
            ("SPINDLE_NUMERICS__Q_MAX".to_string(), "6".to_string()),
            ("SPINDLE_SEED".to_string(), "99".to_string()),
            ("SPINDLE_OUTPUT__OUT_DIR".to_string(), "/tmp/x".to_string()),
            ("OTHER".to_string(), "1".to_string()),
        ];
        let cfg = RunConfig::from_toml("seed = 1\n", env).unwrap();
        assert_eq!(cfg.numerics.q_max, Some(6));
        assert_eq!(cfg.seed, 99);
        assert_eq!(cfg.output.out_dir, PathBuf::from("/tmp/x"));
    }

    #[test]
    fn round_trip() {
        let cfg = parse("seed = 3\n[metric]\ntype = \"dumbbell\"\nc = 0.5\n").unwrap();
        assert_eq!(parse(&cfg.to_toml()).unwrap(), cfg);
    }
}
