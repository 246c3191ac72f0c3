//! Closed-form values on round and Besse metrics, run through the full pipeline.

use std::f64::consts::PI;

use spindle_core::annulus::{self, ReturnOptions};
use spindle_core::config::Numerics;
use spindle_core::genfun::CriticalSet;
use spindle_core::pipeline::{self, Analysis};
use spindle_core::profile::{make_besse, BesseSpec, MetricProfile, OrbifoldSignature};
use spindle_core::systole::{GeodesicKind, Verdict};
use spindle_core::topology::class_of_winding;

fn sig(m: u32, n: u32) -> OrbifoldSignature {
    OrbifoldSignature::new(m, n).unwrap()
}

fn besse(m: u32, n: u32, h: &[f64]) -> MetricProfile {
    make_besse(BesseSpec::new(sig(m, n), h.to_vec())).unwrap()
}

fn analyze(p: &MetricProfile) -> Analysis {
    pipeline::analyze(p, &Numerics { eta_grid_n: 101, ..Numerics::default() }).unwrap()
}

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * b.abs()
}

#[test]
fn besse_area_and_contact_volume() {
    let a = analyze(&besse(2, 3, &[0.4, -0.1]));
    assert!(close(a.volume.area, 10.0 * PI, 1e-9));
    assert!(close(a.volume.vol_direct, 20.0 * PI * PI, 1e-9));
    assert!(close(a.volume.vol_decomposed, 20.0 * PI * PI, 1e-6));
    assert_eq!(a.equators.list.len(), 1);
}

#[test]
fn even_order_return_map_is_identity() {
    let p = besse(3, 1, &[0.3]);
    let grid = annulus::return_grid(&p, 41, &ReturnOptions::default()).unwrap();
    let l = grid.annulus.length;
    for e in grid.entries.iter().filter(|e| !e.censored) {
        let r = e.delta_xi.rem_euclid(l);
        assert!(r.min(l - r) < 1e-7 * l, "eta {}: delta_xi {}", e.eta, e.delta_xi);
    }
}

#[test]
fn besse_2_1_spectrum() {
    let a = analyze(&besse(2, 1, &[0.2]));
    assert!(matches!(a.critical, CriticalSet::AllCritical { mu } if close(mu, 3.0 * PI, 1e-8)));
    let s = &a.systole;
    let family = s.geodesics.iter().find(|g| g.family).expect("oscillating family");
    assert!(close(family.length, 6.0 * PI, 1e-8));
    assert_eq!(family.total_winding, 3);
    assert!(family.homotopy.is_contractible());
    let equators: Vec<f64> = s.geodesics.iter().filter(|g| matches!(g.kind, GeodesicKind::EquatorIterate { .. })).map(|g| g.length).collect();
    assert!(close(equators[0], 2.0 * PI, 1e-10) && close(equators[1], 4.0 * PI, 1e-10));
    assert!(close(s.rho_contr, 6.0 * PI, 1e-4));
    assert!(matches!(s.verdicts.contractible, Verdict::AtBound { .. }));
}

#[test]
fn besse_minimal_lengths_in_subgroups() {
    for (m, n) in [(1, 3), (3, 3), (2, 3)] {
        let a = analyze(&besse(m, n, &[0.1]));
        let order = (m + n) as f64;
        let s = &a.systole;
        assert!(close(s.l_min_contr, 2.0 * order * PI, 1e-6), "{m},{n}");
        if (m + n) % 2 == 0 {
            let l2 = s.l_min_k.iter().find(|(k, _)| *k == 2).unwrap().1;
            assert!(close(l2, order * PI, 1e-6), "{m},{n}");
            assert!(close(s.rho_k(2).unwrap(), 0.5 * order * PI, 1e-4));
        }
    }
}

#[test]
fn besse_period_spectrum() {
    for (m, n) in [(2, 1), (1, 3), (2, 3)] {
        let s = analyze(&besse(m, n, &[0.15])).systole;
        let alpha = ((m + n) % 2) as f64;
        let count = ((m + n) as f64 / (2.0 - alpha)) as usize;
        assert_eq!(s.tau_seq.len(), count);
        for (j, t) in s.tau_seq.iter().enumerate().take(count - 1) {
            assert!(close(*t, 2.0 * PI * (j + 1) as f64, 1e-8));
        }
        assert!(close(s.tau_seq[count - 1], 2.0 * (m + n) as f64 * PI / (2.0 - alpha), 1e-6));
        assert!(close(s.rho_periodspec, 2.0 * (m + n) as f64 * PI / (2.0 - alpha).powi(2), 1e-4));
    }
}

#[test]
fn winding_classes() {
    assert!(class_of_winding(5, sig(2, 3)).is_contractible());
    assert_eq!(class_of_winding(1, sig(2, 3)).value, 1);
}
