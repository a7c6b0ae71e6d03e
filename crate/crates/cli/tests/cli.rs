use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_equiaffine")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn list_names_every_family() {
    let o = run(&["list"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    for family in ["paraboloid", "ellipsoid", "hyperboloid", "q1n", "calabi(n1,n2)", "thm12"] {
        assert!(text.contains(family), "{family} missing from:\n{text}");
    }
    assert!(text.contains("x1 x2 ... x(n+1) = 1"));
}

#[test]
fn list_json_is_machine_readable() {
    let o = run(&["list", "--json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let families: Vec<&str> = v.as_array().unwrap().iter().map(|e| e["family"].as_str().unwrap()).collect();
    assert_eq!(families, ["paraboloid", "ellipsoid", "hyperboloid", "q1n", "calabi", "thm12"]);
}

#[test]
fn invariants_at_paraboloid_vertex() {
    let o = run(&["invariants", "--chart", "paraboloid", "--n", "3", "--point", "0,0,0", "--json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["H"].as_f64(), Some(0.0));
    assert_eq!(v["cubic_norm"].as_f64(), Some(0.0));
}

#[test]
fn invariants_on_calabi_are_umbilic() {
    let o = run(&["invariants", "--chart", "calabi", "--n1", "2", "--n2", "2", "--point", "0,0,0.5,0.7", "--json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let h = v["H"].as_f64().unwrap();
    assert!(h < 0.0);
    assert!(v["umbilicity"].as_f64().unwrap() < 1e-12);
    for e in v["shape_eigenvalues"].as_array().unwrap() {
        assert!((e.as_f64().unwrap() - h).abs() < 1e-12);
    }
    let human = run(&["invariants", "--chart", "calabi", "--n1", "2", "--n2", "2", "--point", "0,0,0.5,0.7"]);
    assert!(stdout(&human).contains("S eigenvalues"));
}

#[test]
fn invariants_reject_bad_arity() {
    let o = run(&["invariants", "--chart", "paraboloid", "--n", "3", "--point", "0,0"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("coordinates"));
}

#[test]
fn invariants_reject_low_order() {
    let o = run(&["invariants", "--chart", "q1n", "--n", "3", "--point", "0,0,0", "--jet-order", "3"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn verify_writes_passing_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.json");
    let o = run(&["verify", "--chart", "q1n", "--n", "3", "--seed", "7", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["verdict"], serde_json::Value::Bool(true));
    assert_eq!(v["seed"].as_u64(), Some(7));
    assert_eq!(v["schema_version"].as_u64(), Some(1));
}

#[test]
fn verify_calabi_passes() {
    let o = run(&["verify", "--chart", "calabi", "--n1", "2", "--n2", "2"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("verdict: pass"));
}

#[test]
fn verify_rejects_insufficient_order() {
    let o = run(&["verify", "--chart", "calabi", "--n1", "2", "--n2", "2", "--jet-order", "3"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn verify_fails_on_tight_tolerance() {
    let o = run(&["verify", "--chart", "calabi", "--n1", "2", "--n2", "2", "--points", "2", "--tol-identity", "1e-30"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("FAIL"));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(run(&["verify", "--chart", "nope"]).status.code(), Some(2));
    assert_eq!(run(&["verify"]).status.code(), Some(2));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(run(&["verify", "--chart", "q1n", "--n", "3", "--format", "xml"]).status.code(), Some(2));
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("suite.cfg");
    let out = dir.path().join("r.csv");
    std::fs::write(
        &cfg,
        format!("# thm12 suite\nchart = thm12\nn = 3\npoints = 3\nseed = 1\nformat = csv\nout = {}\n", out.display()),
    )
    .unwrap();
    let o = run(&["verify", "--config", cfg.to_str().unwrap(), "--points", "2"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("thm12(3): 2 points"));
    let csv = std::fs::read_to_string(&out).unwrap();
    assert_eq!(csv.lines().count(), 3);
    assert!(csv.lines().next().unwrap().starts_with("index,u0,u1,u2,"));
}

#[test]
fn missing_config_file_is_usage_error() {
    assert_eq!(run(&["verify", "--config", "/nonexistent/suite.cfg"]).status.code(), Some(2));
}

#[test]
fn identical_runs_write_identical_reports() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for p in [&a, &b] {
        let o = run(&["verify", "--chart", "thm12", "--n", "3", "--points", "4", "--out", p.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0));
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}
