use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_lorentz-compare"))
}

fn run_config(dir: &Path, json: &str, extra: &[&str]) -> Output {
    let cfg = dir.join("exp.json");
    std::fs::write(&cfg, json).unwrap();
    bin().arg("run").arg("--config").arg(&cfg).arg("--out").arg(dir.join("out")).args(extra).output().unwrap()
}

#[test]
fn list_names_every_experiment() {
    let out = bin().arg("list").output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    for name in [
        "ode",
        "radial-hessian",
        "radial-laplacian",
        "bochner",
        "hypersurface-props",
        "newton-identities",
        "estimates",
        "sphere-sharpness",
        "bernstein",
    ] {
        assert!(text.lines().any(|l| l.split_whitespace().next() == Some(name)), "{name}");
    }
}

#[test]
fn ode_example_exits_zero_with_r0_pi() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_config(dir.path(), r#"{"experiment":"ode","G":{"kind":"constant","value":-1}}"#, &[]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("out/ode.json")).unwrap()).unwrap();
    assert!((json["extra"]["r0"].as_f64().unwrap() - std::f64::consts::PI).abs() < 1e-6);
    assert!(dir.path().join("out/ode.csv").exists());
}

#[test]
fn sphere_sharpness_example_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_config(dir.path(), r#"{"experiment":"sphere-sharpness","model":{"c":0,"n":3},"t":2}"#, &[]);
    assert_eq!(out.status.code(), Some(0));
    let csv = std::fs::read_to_string(dir.path().join("out/sphere-sharpness.csv")).unwrap();
    let mut rows = csv.lines();
    let header: Vec<_> = rows.next().unwrap().split(',').collect();
    let j = header.iter().position(|h| *h == "slack").unwrap();
    for row in rows {
        let s: f64 = row.split(',').nth(j).unwrap().parse().unwrap();
        assert!(s.abs() < 1e-5);
    }
}

#[test]
fn odd_polynomial_exits_two_with_evenness_message() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_config(dir.path(), r#"{"experiment":"ode","G":{"kind":"polynomial","coeffs":[0,1]}}"#, &[]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("not even"));
}

#[test]
fn violation_exits_one() {
    // A negative tolerance turns equality cases into reported violations.
    let dir = tempfile::tempdir().unwrap();
    let out =
        run_config(dir.path(), r#"{"experiment":"sphere-sharpness","model":{"c":0,"n":2},"t":1}"#, &["--tol", "-1"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stdout).contains("FAIL"));
}

#[test]
fn same_seed_gives_identical_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = r#"{"experiment":"radial-hessian","model":{"c":1,"n":2},"sampling":{"count":8}}"#;
    let read = |sub: &str| {
        let d = dir.path().join(sub);
        std::fs::create_dir_all(&d).unwrap();
        let out = run_config(&d, cfg, &["--seed", "11"]);
        assert_eq!(out.status.code(), Some(0));
        let mut files: Vec<_> = std::fs::read_dir(d.join("out")).unwrap().map(|e| e.unwrap().path()).collect();
        files.sort();
        files.iter().map(|f| std::fs::read(f).unwrap()).collect::<Vec<_>>()
    };
    let (a, b) = (read("a"), read("b"));
    assert_eq!(a.len(), 2);
    assert_eq!(a, b);
}

#[test]
fn unwritable_output_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("blocker");
    std::fs::write(&blocker, "").unwrap();
    let cfg = dir.path().join("exp.json");
    std::fs::write(&cfg, r#"{"experiment":"newton-identities","sampling":{"count":3}}"#).unwrap();
    let out = bin().args(["run", "--config"]).arg(&cfg).arg("--out").arg(blocker.join("reports")).output().unwrap();
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn missing_config_file_exits_two() {
    let out = bin().args(["run", "--config", "/nonexistent/exp.json"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}
