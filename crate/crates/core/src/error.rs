use thiserror::Error;

/// Errors raised anywhere in the analysis pipeline.
///
/// Each variant names the module that produced it so that CLI messages can be
/// traced back without a backtrace.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("profile: invalid signature (m={m}, n={n}); both orders must be positive")]
    InvalidSignature { m: u32, n: u32 },

    #[error("profile: Besse function leaves the admissible range: |h({v:.6})| = {value:.6} >= {bound:.6}")]
    RangeViolation { v: f64, value: f64, bound: f64 },

    #[error("profile: modified segment is not monotone near s = {s:.6} (r' = {slope:.3e})")]
    MonotonicityViolation { s: f64, slope: f64 },

    #[error("profile: invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("profile: r' vanishes on an interval near s = {s:.6}")]
    DegenerateCritical { s: f64 },

    #[error("profile: no interior critical point of r")]
    NoEquator,

    #[error("flow: integrator failed to meet tolerance at t = {t:.6} (step {h:.3e})")]
    StepFailure { t: f64, h: f64 },

    #[error("flow: |K| = {k:.3e} is within tolerance of the critical value {critical:.6}")]
    ToleranceAmbiguity { k: f64, critical: f64 },

    #[error("flow: initial point outside the regular part (s = {s:.6})")]
    OutsideRegularPart { s: f64 },

    #[error("annulus: no return to the Birkhoff annulus before t = {cap:.3} (eta = {eta:.6})")]
    NoReturn { eta: f64, cap: f64 },

    #[error("annulus: eta = {0:.6} is outside (-1, 1) or too close to the meridian")]
    EtaOutOfRange(f64),

    #[error("annulus: return at eta = {eta:.6} failed: {source}")]
    GridEntry { eta: f64, source: Box<Error> },

    #[error("genfun: quadrature did not converge (estimate {estimate:.3e}, error {error:.3e})")]
    QuadratureFailure { estimate: f64, error: f64 },

    #[error("genfun: return data violate oddness of F' at eta = {eta:.6} (defect {defect:.3e} L)")]
    InconsistentData { eta: f64, defect: f64 },

    #[error("topology: {k} does not divide {order}")]
    NotADivisor { k: u32, order: u32 },

    #[error("systole: adjacent grid values of F' jump by {jump:.3e} near eta = {eta:.6}; roots may be missed")]
    GridTooCoarse { eta: f64, jump: f64 },

    #[error("systole: cutoff {cutoff:.6} does not exceed the sought length")]
    CutoffTooSmall { cutoff: f64 },

    #[error("config: {0}")]
    ConfigParse(String),

    #[error("io: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
