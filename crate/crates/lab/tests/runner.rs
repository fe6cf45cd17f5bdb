use std::path::{Path, PathBuf};

use kleinflow::config::{parse_scenarios, Parameters};
use kleinflow::profile::TolProfile;
use kleinflow::runner::{run_all, run_file, run_scenario, write_manifests, RunError, RunOptions};

const EULER: &str = r#"
id = "euler"
pipeline = "EulerFlow"
seed = 7

[parameters]
linear = [[0.0, 1.0], [-1.0, 0.0]]
linear_norm = 0.1
translation = [0.1, 0.0]
n_values = [100, 1000, 10000]
t = 1.0
error_constant = 2.0
exponent_window = [0.9, 1.1]
"#;

fn scratch(tag: &str) -> PathBuf {
    let d = std::env::temp_dir().join(format!("kleinflow-test-{tag}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&d);
    d
}

fn opts(out: &Path) -> RunOptions {
    RunOptions { out: Some(out.to_path_buf()), ..RunOptions::default() }
}

#[test]
fn euler_artifacts_match_core() {
    let dir = scratch("euler");
    let s = parse_scenarios(EULER, "mem").unwrap();
    let o = run_scenario(&s[0], &opts(&dir)).unwrap();
    assert!(o.output.passed, "{}", o.output.summary);
    let csv = std::fs::read_to_string(dir.join("euler/euler.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("# kleinflow-csv v1 euler"));
    assert_eq!(lines.next(), Some("n,m,sup_error,scaled_error,bound,bound_ok"));
    // Rotation rate 0.1 and drift 0.1: n·error settles near 1e-2.
    for (line, n) in lines.zip([100.0, 1000.0, 10000.0]) {
        let cols: Vec<&str> = line.split(',').collect();
        let err: f64 = cols[2].parse().unwrap();
        assert!(err <= 2.0 / n, "{line}");
        let scaled: f64 = cols[3].parse().unwrap();
        assert!((scaled - 1e-2).abs() < 2e-3, "{line}");
    }
    let report: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.join("euler/report.json")).unwrap()).unwrap();
    assert_eq!(report["seed"], 7);
    assert_eq!(report["grid"]["points"], 200);
    assert_eq!(report["tolerances"]["profile"], "default");
    assert_eq!(report["tolerances"]["core"]["flow"], 1e-8);
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn reruns_are_byte_identical() {
    let (a, b) = (scratch("det-a"), scratch("det-b"));
    let s = kleinflow::builtin::scenarios().unwrap();
    let picked: Vec<_> = s.into_iter().filter(|x| x.id == "eccentric-stretch" || x.id == "pattern-circles").collect();
    for dir in [&a, &b] {
        let r = run_all(&picked, &opts(dir));
        write_manifests(&picked, &r, &opts(dir)).unwrap();
    }
    for rel in ["eccentric-stretch/eccentric.csv", "pattern-circles/witness_sets.csv", "manifest.json"] {
        assert_eq!(std::fs::read(a.join(rel)).unwrap(), std::fs::read(b.join(rel)).unwrap(), "{rel}");
    }
    let _ = std::fs::remove_dir_all(&a);
    let _ = std::fs::remove_dir_all(&b);
}

#[test]
fn seed_override_changes_grid() {
    let dir = scratch("seed");
    let s = parse_scenarios(EULER, "mem").unwrap();
    let o = run_scenario(&s[0], &RunOptions { seed: Some(99), ..opts(&dir) }).unwrap();
    assert_eq!(o.seed, 99);
    assert_eq!(o.output.grid.unwrap()["seed"], 99);
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn strict_profile_tightens_bounds() {
    let dir = scratch("strict");
    let s = parse_scenarios(EULER, "mem").unwrap();
    let o = run_scenario(&s[0], &RunOptions { profile: TolProfile::Strict, ..opts(&dir) }).unwrap();
    // n·error ≈ 1e-2 still clears 0.2, so the constant has to shrink too.
    assert_eq!(o.output.metrics["error_constant"], 0.2);
    let mut tight = s[0].clone();
    if let Parameters::Euler(p) = &mut tight.parameters {
        p.error_constant = 0.05;
    }
    let o = run_scenario(&tight, &RunOptions { profile: TolProfile::Strict, ..opts(&dir) }).unwrap();
    assert!(!o.output.passed);
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn pipeline_errors_name_the_scenario() {
    let dir = scratch("err");
    let src = r#"
id = "coarse"
pipeline = "PatternFlowDemo"
seed = 1

[parameters]
k = 2
spacing = 1.0
radius = 0.25
samples = 16
velocity = [0.37, 0.11]
t0 = 4.0
n_max = 1
"#;
    let s = parse_scenarios(src, "mem").unwrap();
    let e = run_scenario(&s[0], &opts(&dir)).unwrap_err();
    assert!(matches!(e, RunError::Pipeline { ref id, .. } if id == "coarse"));
    assert!(e.to_string().starts_with("scenario `coarse`"));
    let report = std::fs::read_to_string(dir.join("coarse/report.json")).unwrap();
    assert!(report.contains("\"error\""));
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn config_errors_carry_location() {
    let dir = scratch("cfg");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("bad.toml");
    std::fs::write(&path, "id = \"x\"\npipeline = \"EulerFlow\"\nseed = 1\n[parameters]\n").unwrap();
    let e = run_file(&path, &opts(&dir)).unwrap_err();
    let RunError::Config(c) = &e else { panic!("{e}") };
    assert_eq!(c.line, Some(4));
    assert_eq!(c.field.as_deref(), Some("parameters.linear"));
    assert!(e.to_string().contains("bad.toml:4"));
    let _ = std::fs::remove_dir_all(&dir);
}
