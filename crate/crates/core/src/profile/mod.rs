//! Radial profiles `r(s)` of rotationally symmetric spindle orbifolds.
//!
//! A profile describes the metric `r(s)² dθ² + ds²` on `(0, M) × S¹`.  The
//! cone points of orders `m` (at `s = 0`) and `n` (at `s = M`) are encoded by
//! the end slopes `r'(0) = 1/m` and `r'(M) = -1/n`.

mod besse;
mod perturb;
mod sampled;

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

pub use besse::BesseSpec;
pub use perturb::Perturbation;

use crate::error::{Error, Result};
use crate::numeric::roots::brent_with_values;
use besse::BesseCurve;
use sampled::Pchip;

/// Orders `(m, n)` of the two cone points.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawSignature", into = "RawSignature")]
pub struct OrbifoldSignature {
    m: u32,
    n: u32,
}

#[derive(Serialize, Deserialize)]
struct RawSignature {
    m: u32,
    n: u32,
}

impl TryFrom<RawSignature> for OrbifoldSignature {
    type Error = Error;
    fn try_from(raw: RawSignature) -> Result<Self> {
        Self::new(raw.m, raw.n)
    }
}

impl From<OrbifoldSignature> for RawSignature {
    fn from(sig: OrbifoldSignature) -> Self {
        Self { m: sig.m, n: sig.n }
    }
}

impl OrbifoldSignature {
    pub fn new(m: u32, n: u32) -> Result<Self> {
        if m == 0 || n == 0 {
            return Err(Error::InvalidSignature { m, n });
        }
        Ok(Self { m, n })
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    /// Order `m + n` of the fundamental group of the unit tangent bundle.
    pub fn order(&self) -> u32 {
        self.m + self.n
    }

    /// Parity constant: 0 when `m + n` is even, 1 when odd.
    pub fn alpha(&self) -> u32 {
        self.order() % 2
    }

    /// `(m + n) / 2` as a real number.
    pub fn half_order(&self) -> f64 {
        0.5 * self.order() as f64
    }

    /// Smallest iterate after which a simple curve not enclosing the cone
    /// points lifts to a contractible loop.
    pub fn k_free(&self) -> u32 {
        self.order() / gcd(self.m, self.n)
    }
}

impl std::fmt::Display for OrbifoldSignature {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "S2({},{})", self.m, self.n)
    }
}

pub(crate) fn gcd(mut a: u32, mut b: u32) -> u32 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Value and first two derivatives of `r` at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet {
    pub r: f64,
    pub dr: f64,
    pub ddr: f64,
}

/// How a profile was built.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Provenance {
    Round,
    Besse(BesseSpec),
    /// `r = sin s - c·sin³ s` on `[0, π]`; three critical points when `1/3 < c < 1`.
    Dumbbell { c: f64 },
    Perturbed { base: Box<Provenance>, params: Perturbation },
    Sampled { knots: Vec<(f64, f64)> },
}

#[derive(Debug, Clone)]
enum Kernel {
    Round,
    Besse(BesseCurve),
    Dumbbell(f64),
    Poles { base: Box<MetricProfile>, eps: f64, bulge: f64, north_gap: f64, south_gap: f64 },
    Band { base: Box<MetricProfile>, center: f64, half_width: f64, amplitude: f64 },
    Sampled(Pchip),
}

/// An immutable radial profile.
#[derive(Debug, Clone)]
pub struct MetricProfile {
    signature: OrbifoldSignature,
    length: f64,
    provenance: Provenance,
    kernel: Kernel,
}

/// Number of samples used for positivity and critical-point scans.
const SCAN: usize = 10_000;
/// Absolute tolerance on `s` for critical points.
const CRIT_XTOL: f64 = 1e-13;

/// Unit round sphere.
pub fn make_round() -> MetricProfile {
    MetricProfile {
        signature: OrbifoldSignature { m: 1, n: 1 },
        length: PI,
        provenance: Provenance::Round,
        kernel: Kernel::Round,
    }
}

/// Besse metric determined by `spec`, normalized to equator length `2π`.
pub fn make_besse(spec: BesseSpec) -> Result<MetricProfile> {
    spec.check()?;
    let curve = BesseCurve::new(&spec);
    let p = MetricProfile {
        signature: spec.signature,
        length: curve.length(),
        kernel: Kernel::Besse(curve),
        provenance: Provenance::Besse(spec),
    };
    p.validate()?;
    Ok(p)
}

/// Dumbbell-shaped smooth sphere `r = sin s - c sin³ s`.
pub fn make_dumbbell(c: f64) -> Result<MetricProfile> {
    if !(0.0..1.0).contains(&c) {
        return Err(Error::InvalidParameter(format!("dumbbell coefficient {c} outside [0, 1)")));
    }
    let p = MetricProfile {
        signature: OrbifoldSignature { m: 1, n: 1 },
        length: PI,
        provenance: Provenance::Dumbbell { c },
        kernel: Kernel::Dumbbell(c),
    };
    p.validate()?;
    Ok(p)
}

/// Replaces the caps `[0, eps]` and `[M - eps, M]` of `base` so that the end
/// slopes match the cone orders of `signature`.
pub fn perturb_poles(base: &MetricProfile, signature: OrbifoldSignature, eps: f64, bulge: f64) -> Result<MetricProfile> {
    let m_len = base.length;
    if !(eps > 0.0 && eps < m_len / 4.0) {
        return Err(Error::InvalidParameter(format!("cap width {eps} outside (0, M/4)")));
    }
    if !bulge.is_finite() {
        return Err(Error::InvalidParameter("non-finite cap bulge".into()));
    }
    let north_gap = 1.0 / signature.m as f64 - base.jet(0.0).dr;
    let south_gap = 1.0 / signature.n as f64 + base.jet(m_len).dr;
    let p = MetricProfile {
        signature,
        length: m_len,
        provenance: Provenance::Perturbed {
            base: Box::new(base.provenance.clone()),
            params: Perturbation::Poles { eps, bulge },
        },
        kernel: Kernel::Poles { base: Box::new(base.clone()), eps, bulge, north_gap, south_gap },
    };
    let samples = 4000;
    for i in 1..=samples {
        let u = eps * i as f64 / samples as f64;
        let north = p.jet(u).dr;
        if north <= 0.0 {
            return Err(Error::MonotonicityViolation { s: u, slope: north });
        }
        let south = p.jet(m_len - u).dr;
        if south >= 0.0 {
            return Err(Error::MonotonicityViolation { s: m_len - u, slope: south });
        }
    }
    p.validate()?;
    Ok(p)
}

/// Multiplies `r` by `1 + amplitude (1 - x²)⁴` on `|s - center| < half_width`.
/// Rejected when the number of critical points of `r` changes.
pub fn perturb_band(base: &MetricProfile, center: f64, half_width: f64, amplitude: f64) -> Result<MetricProfile> {
    if !(half_width > 0.0 && center - half_width > 0.0 && center + half_width < base.length) {
        return Err(Error::InvalidParameter(format!(
            "band [{}, {}] not inside (0, {})",
            center - half_width,
            center + half_width,
            base.length
        )));
    }
    if !(amplitude > -1.0 && amplitude.is_finite()) {
        return Err(Error::InvalidParameter(format!("band amplitude {amplitude} must exceed -1")));
    }
    let p = MetricProfile {
        signature: base.signature,
        length: base.length,
        provenance: Provenance::Perturbed {
            base: Box::new(base.provenance.clone()),
            params: Perturbation::Band { center, half_width, amplitude },
        },
        kernel: Kernel::Band { base: Box::new(base.clone()), center, half_width, amplitude },
    };
    p.validate()?;
    let before = base.equators()?.list.len();
    let after = p.equators()?.list.len();
    if before != after {
        return Err(Error::InvalidParameter(format!(
            "band perturbation changes the number of critical points ({before} -> {after})"
        )));
    }
    Ok(p)
}

/// Monotone cubic interpolation of `(s, r)` knots; the first knot must be
/// `(0, 0)` and the last `(M, 0)`.
pub fn make_sampled(signature: OrbifoldSignature, knots: Vec<(f64, f64)>) -> Result<MetricProfile> {
    let (first, last) = match (knots.first(), knots.last()) {
        (Some(f), Some(l)) => (*f, *l),
        _ => return Err(Error::InvalidParameter("empty knot list".into())),
    };
    if first != (0.0, 0.0) || last.1 != 0.0 {
        return Err(Error::InvalidParameter("knots must start at (0, 0) and end with r = 0".into()));
    }
    let pchip = Pchip::new(&knots, 1.0 / signature.m as f64, -1.0 / signature.n as f64)?;
    let p = MetricProfile {
        signature,
        length: last.0,
        provenance: Provenance::Sampled { knots },
        kernel: Kernel::Sampled(pchip),
    };
    p.validate()?;
    Ok(p)
}

/// Interior critical point of `r`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Equator {
    pub s: f64,
    pub radius: f64,
    pub kind: EquatorKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum EquatorKind {
    /// Local maximum of `r` (a bulge).
    Max,
    /// Local minimum of `r` (a neck).
    Min,
}

impl Equator {
    pub fn length(&self) -> f64 {
        2.0 * PI * self.radius
    }
}

/// All equators sorted by `s`, with the index of the reference (minimal
/// radius) one.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Equators {
    pub list: Vec<Equator>,
    pub minimal: usize,
    /// Several equators share the minimal radius; the first was chosen.
    pub tie: bool,
}

impl Equators {
    pub fn reference(&self) -> &Equator {
        &self.list[self.minimal]
    }
}

impl MetricProfile {
    pub fn signature(&self) -> OrbifoldSignature {
        self.signature
    }

    /// Meridional length `M`.
    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    /// Value and derivatives of `r` at `s`, clamped to `[0, M]`.
    pub fn jet(&self, s: f64) -> Jet {
        let s = s.clamp(0.0, self.length);
        match &self.kernel {
            Kernel::Round => {
                let (sn, cs) = s.sin_cos();
                Jet { r: sn.max(0.0), dr: cs, ddr: -sn }
            }
            Kernel::Besse(curve) => curve.jet(s),
            Kernel::Dumbbell(c) => {
                let (sn, cs) = s.sin_cos();
                let q = 1.0 - 3.0 * c * sn * sn;
                Jet { r: (sn - c * sn * sn * sn).max(0.0), dr: cs * q, ddr: -sn * q - 6.0 * c * sn * cs * cs }
            }
            Kernel::Poles { base, eps, bulge, north_gap, south_gap } => {
                let j = base.jet(s);
                if s < *eps {
                    let c = perturb::cap_correction(s, *eps, *north_gap, *bulge);
                    Jet { r: j.r + c.r, dr: j.dr + c.dr, ddr: j.ddr + c.ddr }
                } else if s > self.length - eps {
                    let c = perturb::cap_correction(self.length - s, *eps, *south_gap, *bulge);
                    Jet { r: j.r + c.r, dr: j.dr - c.dr, ddr: j.ddr + c.ddr }
                } else {
                    j
                }
            }
            Kernel::Band { base, center, half_width, amplitude } => {
                let j = base.jet(s);
                if (s - center).abs() >= *half_width {
                    return j;
                }
                let b = perturb::band_factor(s, *center, *half_width, *amplitude);
                Jet {
                    r: j.r * b.r,
                    dr: j.dr * b.r + j.r * b.dr,
                    ddr: j.ddr * b.r + 2.0 * j.dr * b.dr + j.r * b.ddr,
                }
            }
            Kernel::Sampled(p) => p.jet(s),
        }
    }

    pub fn r(&self, s: f64) -> f64 {
        self.jet(s).r
    }

    pub fn dr(&self, s: f64) -> f64 {
        self.jet(s).dr
    }

    /// Interior points where the profile is only finitely smooth, sorted.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut out = match &self.kernel {
            Kernel::Round | Kernel::Besse(_) | Kernel::Dumbbell(_) => Vec::new(),
            Kernel::Poles { base, eps, .. } => {
                let mut v = base.breakpoints();
                v.extend([*eps, self.length - eps]);
                v
            }
            Kernel::Band { base, center, half_width, .. } => {
                let mut v = base.breakpoints();
                v.extend([center - half_width, center + half_width]);
                v
            }
            Kernel::Sampled(p) => {
                let k = p.knots();
                k[1..k.len() - 1].to_vec()
            }
        };
        out.retain(|&s| s > 0.0 && s < self.length);
        out.sort_by(f64::total_cmp);
        out.dedup();
        out
    }

    /// Checks `r = 0` at both ends and `r > 0` on a dense interior grid.
    pub fn validate(&self) -> Result<()> {
        if !(self.length.is_finite() && self.length > 0.0) {
            return Err(Error::InvalidParameter(format!("meridional length {} not positive", self.length)));
        }
        for end in [0.0, self.length] {
            let r = self.r(end);
            if r.abs() > 1e-12 * self.length {
                return Err(Error::InvalidParameter(format!("r({end}) = {r:e} should vanish")));
            }
        }
        for i in 1..SCAN {
            let s = self.length * i as f64 / SCAN as f64;
            let r = self.r(s);
            if !(r > 0.0) {
                return Err(Error::InvalidParameter(format!("r({s}) = {r:e} is not positive")));
            }
        }
        Ok(())
    }

    /// Scan grid for `r'`: uniform points plus breakpoints.
    fn scan_grid(&self) -> Vec<f64> {
        let mut grid: Vec<f64> = (1..SCAN).map(|i| self.length * i as f64 / SCAN as f64).collect();
        grid.extend(self.breakpoints());
        grid.sort_by(f64::total_cmp);
        grid.dedup();
        grid
    }

    /// All interior critical points of `r`, with the minimal one marked.
    pub fn equators(&self) -> Result<Equators> {
        let grid = self.scan_grid();
        let slopes: Vec<f64> = grid.iter().map(|&s| self.dr(s)).collect();
        let scale = slopes.iter().fold(0.0f64, |a, d| a.max(d.abs()));
        let flat = 1e-12 * scale.max(1.0);
        let mut run = 0;
        for (i, d) in slopes.iter().enumerate() {
            run = if d.abs() <= flat { run + 1 } else { 0 };
            if run >= 3 {
                return Err(Error::DegenerateCritical { s: grid[i] });
            }
        }
        let mut list = Vec::new();
        let mut i = 0;
        while i + 1 < grid.len() {
            let (d0, d1) = (slopes[i], slopes[i + 1]);
            if d0 != 0.0 && d1 != 0.0 && d0.signum() != d1.signum() {
                let s = brent_with_values(|s| self.dr(s), grid[i], grid[i + 1], d0, d1, CRIT_XTOL)
                    .expect("bracket has a sign change");
                list.push(self.equator_at(s, d0 > 0.0));
                i += 1;
            } else if d1 == 0.0 && i + 2 < grid.len() {
                let d2 = slopes[i + 2];
                if d0 != 0.0 && d2 != 0.0 && d0.signum() != d2.signum() {
                    list.push(self.equator_at(grid[i + 1], d0 > 0.0));
                }
                i += 2;
            } else {
                i += 1;
            }
        }
        if list.is_empty() {
            return Err(Error::NoEquator);
        }
        let min_r = list.iter().map(|e| e.radius).fold(f64::INFINITY, f64::min);
        let ties: Vec<usize> = (0..list.len()).filter(|&k| list[k].radius <= min_r * (1.0 + 1e-10)).collect();
        let tie = ties.len() > 1;
        if tie {
            log::warn!("{} equators share the minimal radius {min_r}; using the one at s = {}", ties.len(), list[ties[0]].s);
        }
        Ok(Equators { list, minimal: ties[0], tie })
    }

    fn equator_at(&self, s: f64, rising_before: bool) -> Equator {
        Equator { s, radius: self.r(s), kind: if rising_before { EquatorKind::Max } else { EquatorKind::Min } }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sig(m: u32, n: u32) -> OrbifoldSignature {
        OrbifoldSignature::new(m, n).unwrap()
    }

    #[test]
    fn signature_constants() {
        let s = sig(2, 3);
        assert_eq!((s.order(), s.alpha(), s.k_free()), (5, 1, 5));
        assert_eq!(sig(2, 4).k_free(), 3);
        assert_eq!(sig(1, 1).k_free(), 2);
        assert!(OrbifoldSignature::new(0, 2).is_err());
    }

    #[test]
    fn round_profile() {
        let p = make_round();
        assert_eq!(p.length(), PI);
        assert!((p.r(PI / 2.0) - 1.0).abs() < 1e-15);
        assert_eq!(p.jet(0.0).dr, 1.0);
        let eq = p.equators().unwrap();
        assert_eq!(eq.list.len(), 1);
        assert!((eq.reference().s - PI / 2.0).abs() < 1e-12);
        assert!((eq.reference().length() - 2.0 * PI).abs() < 1e-12);
    }

    #[test]
    fn besse_with_zero_h_is_round() {
        let p = make_besse(BesseSpec::linear(sig(1, 1))).unwrap();
        assert!((p.length() - PI).abs() < 1e-14);
        for s in [0.1, 0.7, 1.9, 3.0] {
            assert!((p.r(s) - s.sin()).abs() < 1e-13);
        }
    }

    #[test]
    fn besse_two_one() {
        let p = make_besse(BesseSpec::linear(sig(2, 1))).unwrap();
        assert!((p.length() - 1.5 * PI).abs() < 1e-13);
        let eq = p.equators().unwrap();
        assert_eq!(eq.list.len(), 1);
        assert!((eq.reference().length() - 2.0 * PI).abs() < 1e-10);
        assert!((p.jet(0.0).dr - 0.5).abs() < 1e-14);
        assert!((p.jet(p.length()).dr + 1.0).abs() < 1e-14);
    }

    #[test]
    fn besse_derivatives_consistent() {
        let p = make_besse(BesseSpec::new(sig(2, 3), vec![0.3, -0.2])).unwrap();
        for s in [0.4, 2.0, 3.7] {
            let h = 1e-6;
            let j = p.jet(s);
            assert!(((p.r(s + h) - p.r(s - h)) / (2.0 * h) - j.dr).abs() < 1e-7);
            assert!(((p.dr(s + h) - p.dr(s - h)) / (2.0 * h) - j.ddr).abs() < 1e-6);
        }
    }

    #[test]
    fn dumbbell_has_three_equators_with_neck_minimal() {
        let p = make_dumbbell(0.5).unwrap();
        let eq = p.equators().unwrap();
        assert_eq!(eq.list.len(), 3);
        assert_eq!(eq.minimal, 1);
        assert_eq!(eq.reference().kind, EquatorKind::Min);
        assert!((eq.reference().radius - 0.5).abs() < 1e-12);
        // Cross-check against sign changes of r' on a fine grid.
        let n = 100_000;
        let changes = (1..n)
            .filter(|&i| {
                let (a, b) = (PI * i as f64 / n as f64, PI * (i + 1) as f64 / n as f64);
                p.dr(a).signum() != p.dr(b).signum()
            })
            .count();
        assert_eq!(changes, 3);
    }

    #[test]
    fn pole_caps_agree_with_base_bitwise() {
        let base = make_round();
        let p = perturb_poles(&base, sig(2, 3), 0.3, 0.3).unwrap();
        for i in 0..=1000 {
            let s = 0.3 + (PI - 0.6) * i as f64 / 1000.0;
            assert_eq!(p.jet(s), base.jet(s));
        }
        assert!((p.jet(0.0).dr - 0.5).abs() < 1e-15);
        assert!((p.jet(PI).dr + 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(p.equators().unwrap().list.len(), 1);
    }

    #[test]
    fn smooth_caps_keep_unit_slope() {
        let p = perturb_poles(&make_round(), sig(1, 1), 0.2, 0.0).unwrap();
        assert!((p.jet(0.0).dr - 1.0).abs() < 1e-15);
    }

    #[test]
    fn cap_monotonicity_enforced() {
        let err = perturb_poles(&make_round(), sig(1, 1), 0.3, -3.0).unwrap_err();
        assert!(matches!(err, Error::MonotonicityViolation { .. }));
        assert!(perturb_poles(&make_round(), sig(1, 1), 1.0, 0.0).is_err());
    }

    #[test]
    fn band_rejects_new_critical_points() {
        let base = make_round();
        assert!(perturb_band(&base, 0.8, 0.3, 0.05).is_ok());
        assert!(perturb_band(&base, 1.2, 0.3, 2.0).is_err());
    }

    #[test]
    fn sampled_profile_interpolates() {
        let knots: Vec<(f64, f64)> = (0..=64).map(|i| {
            let s = PI * i as f64 / 64.0;
            (s, if i == 64 { 0.0 } else { s.sin() })
        }).collect();
        let p = make_sampled(sig(1, 1), knots).unwrap();
        assert!((p.r(1.0) - 1f64.sin()).abs() < 1e-5);
        let eq = p.equators().unwrap();
        assert_eq!(eq.list.len(), 1);
        assert!((eq.reference().s - PI / 2.0).abs() < 1e-3);
    }

    #[test]
    fn breakpoints_collected() {
        let p = perturb_poles(&make_round(), sig(2, 2), 0.25, 0.1).unwrap();
        let q = perturb_band(&p, 0.9, 0.2, 0.02).unwrap();
        assert_eq!(q.breakpoints(), vec![0.25, 0.7, 1.1, PI - 0.25]);
    }
}
