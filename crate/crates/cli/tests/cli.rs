use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn spindle(dir: &Path, config: &str, args: &[&str], env: &[(&str, &str)]) -> Output {
    let cfg = dir.join("run.toml");
    fs::write(&cfg, config).unwrap();
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_spindle"));
    cmd.arg("--config").arg(&cfg).arg("--out").arg(dir.join("out"));
    cmd.args(args).env_remove("RUST_LOG");
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

const ROUND: &str = "[numerics]\neta_grid_n = 101\n";
const PERTURBED: &str = "[metric]\ntype = \"perturbed\"\nm = 2\nn = 3\neps = 0.3\nbulge = 0.3\n\n[numerics]\neta_grid_n = 101\n";

#[test]
fn analyze_round_sphere() {
    let dir = tempfile::tempdir().unwrap();
    let o = spindle(dir.path(), ROUND, &["analyze"], &[]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert!(text.contains("F is constant"));
    assert!(text.contains("verdict: ok"));
    for f in ["report.txt", "returns.csv", "genfun.csv", "critical.csv", "geodesics.csv", "tau.csv", "ratios.csv", "profile.csv"] {
        assert!(dir.path().join("out").join(f).exists(), "{f} missing");
    }
    let ratios = fs::read_to_string(dir.path().join("out/ratios.csv")).unwrap();
    let row = ratios.lines().find(|l| l.starts_with("rho_contr,")).unwrap();
    let value: f64 = row.split(',').nth(1).unwrap().parse().unwrap();
    assert!((value - 4.0 * std::f64::consts::PI).abs() < 1e-6);
}

#[test]
fn outputs_are_deterministic() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for dir in [&a, &b] {
        assert!(spindle(dir.path(), PERTURBED, &["analyze"], &[]).status.success());
    }
    for f in ["report.txt", "returns.csv", "genfun.csv", "geodesics.csv", "ratios.csv", "tau.csv"] {
        let x = fs::read(a.path().join("out").join(f)).unwrap();
        let y = fs::read(b.path().join("out").join(f)).unwrap();
        assert_eq!(x, y, "{f} differs between runs");
    }
}

#[test]
fn parallelism_does_not_change_results() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    assert!(spindle(a.path(), PERTURBED, &["--jobs", "1", "analyze"], &[]).status.success());
    assert!(spindle(b.path(), PERTURBED, &["--jobs", "3", "analyze"], &[]).status.success());
    let x = fs::read(a.path().join("out/geodesics.csv")).unwrap();
    assert_eq!(x, fs::read(b.path().join("out/geodesics.csv")).unwrap());
}

#[test]
fn even_grid_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = spindle(dir.path(), "[numerics]\neta_grid_n = 400\n", &["analyze"], &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("config"));
}

#[test]
fn env_override_is_validated() {
    let dir = tempfile::tempdir().unwrap();
    let o = spindle(dir.path(), ROUND, &["analyze"], &[("SPINDLE_NUMERICS__ETA_GRID_N", "100")]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn tiny_cutoff_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = spindle(dir.path(), ROUND, &["--cutoff", "1.0", "analyze"], &[]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn geodesic_trajectory() {
    let dir = tempfile::tempdir().unwrap();
    let o = spindle(dir.path(), ROUND, &["geodesic", "--eta", "-0.5", "--t-max", "6.283185307179586", "--dt", "0.1"], &[]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(dir.path().join("out/trajectory.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("t,theta,beta,s,clairaut"));
    let k: Vec<f64> = lines.map(|l| l.rsplit(',').next().unwrap().parse().unwrap()).collect();
    assert!(k.len() > 60);
    assert!(k.iter().all(|v| (v - 0.5).abs() < 1e-9), "K = r0 |eta| for eta < 0");
}

#[test]
fn besse_gen_profile() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = "[metric]\ntype = \"besse\"\nm = 1\nn = 3\nh_coeffs = [0.1]\n";
    let o = spindle(dir.path(), cfg, &["besse-gen", "--samples", "21"], &[]);
    assert!(o.status.success());
    let csv = fs::read_to_string(dir.path().join("out/profile.csv")).unwrap();
    assert_eq!(csv.lines().count(), 22);
    let first: Vec<f64> = csv.lines().nth(1).unwrap().split(',').map(|x| x.parse().unwrap()).collect();
    assert_eq!(first[1], 0.0);
    assert!((first[2] - 1.0).abs() < 1e-12, "r'(0) = 1/m");
}

#[test]
fn sweep_over_cap_width() {
    let dir = tempfile::tempdir().unwrap();
    let o = spindle(dir.path(), PERTURBED, &["sweep", "--param", "eps", "--from", "0.4", "--to", "0.2", "--steps", "3"], &[]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(dir.path().join("out/sweep.csv")).unwrap();
    assert_eq!(csv.lines().count(), 4);
    assert!(csv.starts_with("eps,area,"));
}

#[test]
fn sweep_requires_perturbed_metric() {
    let dir = tempfile::tempdir().unwrap();
    let o = spindle(dir.path(), ROUND, &["sweep", "--param", "eps", "--from", "0.1", "--to", "0.2"], &[]);
    assert_eq!(o.status.code(), Some(2));
}
