use std::path::{Path, PathBuf};

use clap::Parser;
use heightlab::cli::config::Config;
use heightlab::cli::{run, Cli};

fn repo_config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

fn invoke(args: &[&str]) -> (i32, String, String) {
    let cli = Cli::try_parse_from(std::iter::once("heightlab").chain(args.iter().copied())).expect("flags parse");
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = run(&cli, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

#[test]
fn kodaira_prints_matrices() {
    let (code, out, _) = invoke(&["kodaira", "--type", "I_4"]);
    assert_eq!(code, 0);
    assert!(out.contains("M =") && out.contains("M+ =") && out.contains("pass true"));
    assert!(out.contains("i,j,m,m_plus"));
}

#[test]
fn unprojected_nonzero_mean_alpha_names_the_condition() {
    let cfg = repo_config("default.cfg");
    let (code, _, err) = invoke(&[
        "potential",
        "--config",
        cfg.to_str().unwrap(),
        "--set",
        "density.alpha.fat=1,1",
        "--set",
        "solver.project=false",
    ]);
    assert_eq!(code, 2);
    assert!(err.contains("integrability on general fibers"), "{err}");
}

#[test]
fn verify_without_seed_is_a_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("noseed.cfg");
    std::fs::write(&cfg, "[family]\nn = 2\n").unwrap();
    let (code, _, err) = invoke(&["verify", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code, 2);
    assert!(err.contains("seed"));
}

#[test]
fn random_density_without_seed_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("r.cfg");
    std::fs::write(&cfg, "[density.alpha]\nrandom = c1\n[density.beta]\nrandom = c1\n[sweep]\nl_grid = 50:200:6\n").unwrap();
    let (code, _, err) = invoke(&["pairing", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code, 2);
    assert!(err.contains("seed"));
}

#[test]
fn unknown_key_is_rejected() {
    let (code, _, err) = invoke(&["spectrum", "--set", "family.width=3"]);
    assert_eq!(code, 2);
    assert!(err.contains("unknown key"));
}

#[test]
fn under_resolved_quadrature_exits_with_nonconvergence() {
    let (code, _, err) = invoke(&[
        "node-integral",
        "--eta",
        "e22 = 1",
        "--t-grid",
        "1e-6:1e-2:13",
        "--set",
        "node.per_decade=2",
        "--set",
        "node.tol=1e-14",
    ]);
    assert_eq!(code, 3, "{err}");
}

#[test]
fn pairing_csv_is_deterministic_and_documented() {
    let cfg = repo_config("random_pairs.cfg");
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    let mut files = Vec::new();
    for d in &dirs {
        let (code, out, err) = invoke(&["pairing", "--config", cfg.to_str().unwrap(), "--out", d.path().to_str().unwrap()]);
        assert_eq!(code, 0, "{err}");
        assert!(out.contains("c_fit"));
        files.push(std::fs::read(d.path().join("pairing.csv")).unwrap());
    }
    assert_eq!(files[0], files[1]);
    let text = String::from_utf8(files.remove(0)).unwrap();
    let mut lines = text.lines();
    let first = lines.next().unwrap();
    assert!(first.starts_with("# heightlab ") && first.contains("config="));
    assert_eq!(lines.next().unwrap(), "L,s,value,fitted,residual");
    assert!(text.contains("# c_predicted = "));
}

#[test]
fn hand_case_pairing_recovers_minus_one_half() {
    let cfg = repo_config("default.cfg");
    let (code, out, _) = invoke(&["pairing", "--config", cfg.to_str().unwrap(), "--L-grid", "50:200:12"]);
    assert_eq!(code, 0);
    let c_fit: f64 = out
        .lines()
        .find_map(|l| l.strip_prefix("# c_fit = "))
        .expect("trailer")
        .parse()
        .unwrap();
    assert!((c_fit + 0.5).abs() < 0.025, "{c_fit}");
}

#[test]
fn node_integral_recovers_pi() {
    let (code, out, _) = invoke(&["node-integral", "--eta", "e22 = 1", "--t-grid", "1e-6:1e-2:13"]);
    assert_eq!(code, 0);
    let a: f64 = out.lines().find_map(|l| l.strip_prefix("# A_fit = ")).unwrap().parse().unwrap();
    assert!((a / std::f64::consts::PI - 1.0).abs() < 0.01);
}

#[test]
fn dynamics_growth_reports_quadratic_exponent() {
    let cfg = repo_config("default.cfg");
    let (code, out, err) = invoke(&["dynamics", "growth", "--config", cfg.to_str().unwrap(), "--set", "dynamics.fiber_res=64"]);
    assert_eq!(code, 0, "{err}");
    let p: f64 = out.lines().find_map(|l| l.strip_prefix("# exponent = ")).unwrap().parse().unwrap();
    assert!((p - 2.0).abs() < 0.05);
}

#[test]
fn constant_translation_needs_the_flag() {
    let (code, _, err) = invoke(&["dynamics", "flat-identity", "--set", "dynamics.translation=0.3+0.1i"]);
    assert_eq!(code, 2);
    assert!(err.contains("constant"));
    let (code, _, _) = invoke(&[
        "dynamics",
        "flat-identity",
        "--set",
        "dynamics.translation=0.3+0.1i",
        "--set",
        "dynamics.allow_constant=true",
    ]);
    assert_eq!(code, 0);
}

#[test]
fn shipped_configs_parse() {
    for name in ["default.cfg", "random_pairs.cfg"] {
        let c = Config::load(&repo_config(name)).unwrap();
        c.family().unwrap();
        c.solver().unwrap();
        c.l_grid().unwrap();
    }
    let c = Config::load(&repo_config("default.cfg")).unwrap();
    c.fibration().unwrap();
    c.dynamics().unwrap();
    c.eta().unwrap();
    assert!(c.solver().unwrap().seed.is_some());
}

#[test]
fn output_dir_does_not_change_the_hash() {
    let mut a = Config::load(&repo_config("default.cfg")).unwrap();
    let h = a.hash();
    a.set("output", "dir", "/elsewhere");
    assert_eq!(a.hash(), h);
    a.set("solver", "seed", "1");
    assert_ne!(a.hash(), h);
}
