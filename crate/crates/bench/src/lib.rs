//! Benchmark fixtures.

use spindle_core::profile::{make_besse, make_round, perturb_poles, BesseSpec, MetricProfile, OrbifoldSignature};

/// Named profiles covering the round, Besse and capped cases.
pub fn fixtures() -> Vec<(&'static str, MetricProfile)> {
    let sig = OrbifoldSignature::new(2, 3).expect("valid signature");
    vec![
        ("round", make_round()),
        ("besse-2-3", make_besse(BesseSpec::new(sig, vec![0.3])).expect("admissible")),
        ("capped-2-3", perturb_poles(&make_round(), sig, 0.2, 0.3).expect("admissible")),
    ]
}
