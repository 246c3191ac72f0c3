//! Seeded test corpora of Besse and perturbed profiles.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::config::{BandSpec, MetricSpec};
use crate::profile::{BesseSpec, OrbifoldSignature};

/// Signatures exercised by the suites.
pub const SIGNATURES: [(u32, u32); 5] = [(1, 1), (2, 1), (2, 3), (3, 3), (5, 2)];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorpusEntry {
    pub label: String,
    pub spec: MetricSpec,
}

/// Rejection-samples an admissible odd correction with up to three terms.
pub fn random_besse(sig: OrbifoldSignature, rng: &mut impl Rng) -> BesseSpec {
    let scale = 0.25 * sig.half_order();
    loop {
        let terms = rng.gen_range(1..=3);
        let coeffs: Vec<f64> = (0..terms).map(|_| rng.gen_range(-scale..scale)).collect();
        let spec = BesseSpec::new(sig, coeffs);
        if spec.check().is_ok() && crate::profile::make_besse(spec.clone()).is_ok() {
            return spec;
        }
    }
}

/// `per_signature` random Besse profiles for each signature in [`SIGNATURES`].
pub fn besse_suite(seed: u64, per_signature: usize) -> Vec<CorpusEntry> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    for (m, n) in SIGNATURES {
        let sig = OrbifoldSignature::new(m, n).expect("valid signature");
        for i in 0..per_signature {
            let spec = random_besse(sig, &mut rng);
            out.push(CorpusEntry {
                label: format!("besse-{m}-{n}-{i}"),
                spec: MetricSpec::Besse { m, n, h_coeffs: spec.coeffs },
            });
        }
    }
    out
}

/// Pole perturbations and mid-band bumps of random Besse metrics, two per
/// signature, with amplitudes of at least `0.05`.
pub fn perturbed_suite(seed: u64) -> Vec<CorpusEntry> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    let mut out = Vec::new();
    for (m, n) in SIGNATURES {
        let sig = OrbifoldSignature::new(m, n).expect("valid signature");
        let big_m = std::f64::consts::FRAC_PI_2 * sig.order() as f64;

        let poles = loop {
            let base = random_besse(sig, &mut rng);
            let spec = MetricSpec::Perturbed {
                m,
                n,
                h_coeffs: base.coeffs,
                eps: Some(rng.gen_range(0.1..0.2) * big_m),
                bulge: signed_amplitude(&mut rng, 0.05, 0.3),
                band: None,
            };
            if spec.build().is_ok() {
                break spec;
            }
        };
        out.push(CorpusEntry { label: format!("poles-{m}-{n}"), spec: poles });

        let band = loop {
            let base = random_besse(sig, &mut rng);
            let half_width = rng.gen_range(0.06..0.12) * big_m;
            // Keep the bump on one side of the reference equator.
            let north = rng.gen_bool(0.5);
            let offset = rng.gen_range(0.2..0.3) * big_m;
            let center = if north { offset } else { big_m - offset };
            let spec = MetricSpec::Perturbed {
                m,
                n,
                h_coeffs: base.coeffs,
                eps: None,
                bulge: 0.0,
                band: Some(BandSpec { center, half_width, amplitude: signed_amplitude(&mut rng, 0.05, 0.15) }),
            };
            if spec.build().is_ok() {
                break spec;
            }
        };
        out.push(CorpusEntry { label: format!("band-{m}-{n}"), spec: band });
    }
    out
}

fn signed_amplitude(rng: &mut impl Rng, lo: f64, hi: f64) -> f64 {
    let a = rng.gen_range(lo..hi);
    if rng.gen_bool(0.5) {
        a
    } else {
        -a
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suites_are_deterministic() {
        assert_eq!(besse_suite(5, 2), besse_suite(5, 2));
        assert_eq!(perturbed_suite(5), perturbed_suite(5));
        assert_ne!(besse_suite(5, 2), besse_suite(6, 2));
    }

    #[test]
    fn suites_build() {
        for e in besse_suite(1, 3).iter().chain(&perturbed_suite(1)) {
            e.spec.build().unwrap_or_else(|err| panic!("{}: {err}", e.label));
        }
        assert_eq!(perturbed_suite(1).len(), 10);
    }
}
