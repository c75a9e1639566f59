use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_einstein-forge"))
        .args(args)
        .env_remove("EINSTEIN_FORGE_TOL")
        .output()
        .expect("binary runs")
}

fn report(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!(
            "stdout is not JSON ({e}): {}\nstderr: {}",
            String::from_utf8_lossy(&out.stdout),
            String::from_utf8_lossy(&out.stderr)
        )
    })
}

#[test]
fn verify_exit_codes() {
    let ok = run(&["verify", "--catalog", "mercator-n4"]);
    assert_eq!(ok.status.code(), Some(0));
    let lambda = report(&ok)["summary"]["lambda_hat"].as_f64().unwrap();
    assert!((lambda - 3.0).abs() < 1e-8);

    let flat = run(&["verify", "--metric", "flat(4)"]);
    assert_eq!(flat.status.code(), Some(0));
    assert_eq!(report(&flat)["summary"]["lambda_hat"].as_f64(), Some(0.0));

    let product = run(&["verify", "--metric", "product(sphere(2),flat(1))"]);
    assert_eq!(product.status.code(), Some(1));
    assert_eq!(report(&product)["pass"], false);

    let bad = run(&["verify", "--metric", "sphere("]);
    assert_eq!(bad.status.code(), Some(2));
    assert!(bad.stdout.is_empty());
    assert!(String::from_utf8_lossy(&bad.stderr).contains("error"));

    assert_eq!(
        run(&["verify", "--metric", "flat(2)", "--domain", "x"]).status.code(),
        Some(2)
    );
    assert_eq!(run(&["solve", "warp", "--n", "4"]).status.code(), Some(2));
    assert_eq!(run(&["catalog", "show", "no-such-entry"]).status.code(), Some(2));
}

#[test]
fn reports_are_byte_stable_unless_timed() {
    let args = ["verify", "--metric", "sphere(3)", "--grid", "16"];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(a.stdout, b.stdout);
    let v = report(&a);
    assert_eq!(v["command"], "verify --metric sphere(3) --grid 16");
    assert_eq!(v["version"], env!("CARGO_PKG_VERSION"));
    assert!(v.get("timing_s").is_none());
    let timed = report(&run(&["--timing", "verify", "--metric", "sphere(3)", "--grid", "16"]));
    assert!(timed["timing_s"].as_f64().unwrap() >= 0.0);
}

#[test]
fn parallel_grid_gives_identical_numbers() {
    let serial = report(&run(&["verify", "--catalog", "calabi-ricci-flat"]));
    let parallel = report(&run(&["verify", "--catalog", "calabi-ricci-flat", "--parallel"]));
    assert_eq!(serial["summary"], parallel["summary"]);
}

#[test]
fn tolerance_from_environment_and_flag() {
    let bin = env!("CARGO_BIN_EXE_einstein-forge");
    let strict = Command::new(bin)
        .args(["verify", "--metric", "sphere(3)"])
        .env("EINSTEIN_FORGE_TOL", "1e-20")
        .output()
        .unwrap();
    assert_eq!(strict.status.code(), Some(1));
    let flag_wins = Command::new(bin)
        .args(["verify", "--metric", "sphere(3)", "--tol", "1e-9"])
        .env("EINSTEIN_FORGE_TOL", "1e-20")
        .output()
        .unwrap();
    assert_eq!(flag_wins.status.code(), Some(0));
}

#[test]
fn domain_overrides_and_envelope_files() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.json");
    std::fs::write(&path, r#"{"metric": "hyperbolic(3)", "domain": {"r": [0.5, 2.0]}}"#).unwrap();
    let out = run(&["verify", "--file", path.to_str().unwrap(), "--domain", "r=0.5:3"]);
    assert_eq!(out.status.code(), Some(0));
    assert!((report(&out)["summary"]["lambda_hat"].as_f64().unwrap() + 2.0).abs() < 1e-10);
    let unknown = run(&["verify", "--metric", "flat(2)", "--domain", "q=0:1"]);
    assert_eq!(unknown.status.code(), Some(2));
}

#[test]
fn conformal_mode() {
    let ok = run(&[
        "verify",
        "--metric",
        "conformal(1/cosh(t), product(diag(t;+1;1), sphere(3)))",
        "--mode",
        "conformal",
    ]);
    assert_eq!(ok.status.code(), Some(0));
    let with_phi = run(&[
        "verify",
        "--metric",
        "flat(3)",
        "--mode",
        "conformal",
        "--phi",
        "1 + x1^2",
    ]);
    assert_eq!(with_phi.status.code(), Some(1));
    let missing = run(&["verify", "--metric", "flat(3)", "--mode", "conformal"]);
    assert_eq!(missing.status.code(), Some(2));
}

#[test]
fn solve_families() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("warp.csv");
    let out = run(&[
        "solve",
        "warp",
        "--n",
        "4",
        "--k",
        "1",
        "--d",
        "0.5",
        "--u0",
        "1.7320508075688772",
        "--x0",
        "0",
        "--emit",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v = report(&out);
    assert!((v["summary"]["c"].as_f64().unwrap() + 0.75).abs() < 1e-10);
    assert_eq!(v["summary"]["classification"]["type"], "PeriodicEjiri");
    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("x,u,du,ddu,c,e\n"));

    let ext = report(&run(&["solve", "extremal", "--c", "2", "--d", "-1.3333333333333333"]));
    let lo = 3f64.sqrt() - 1.0;
    assert!(ext["summary"]["k_min"].as_f64().unwrap() >= lo - 1e-8);
    assert!((ext["summary"]["k_max"].as_f64().unwrap() - 2.0).abs() < 1e-8);

    let b = report(&run(&[
        "solve",
        "brinkmann",
        "--eps",
        "1",
        "--k",
        "1",
        "--phi0",
        "1",
        "--dphi0",
        "0",
    ]));
    assert_eq!(b["summary"]["family"], "trig");
    let ft = run(&["solve", "ft", "--eps", "1", "--k-star", "-1", "--to", "5"]);
    assert_eq!(ft.status.code(), Some(0));
}

#[test]
fn classify_types() {
    let kind = |args: &[&str]| {
        let mut full = vec!["classify"];
        full.extend_from_slice(args);
        report(&run(&full))["summary"]["type"].as_str().unwrap().to_string()
    };
    assert_eq!(
        kind(&["--n", "4", "--kbar", "0.25", "--k", "1", "--c", "-0.75"]),
        "PeriodicEjiri"
    );
    assert_eq!(kind(&["--n", "4", "--kbar", "0", "--k", "1", "--c", "-0.75"]), "II");
    assert_eq!(kind(&["--n", "4", "--kbar", "-1", "--k", "-2", "--c", "1"]), "I");
    assert_eq!(
        run(&["classify", "--n", "2", "--kbar", "1", "--k", "0", "--c", "0"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn drop_lemma_and_catalog() {
    let d = report(&run(&["droplemma", "--instance", "4,1,0.25"]));
    assert_eq!(d["pass"], true);
    assert_eq!(
        d["summary"]["polynomials"][1]["coefficients"],
        serde_json::json!([0, 16])
    );
    assert!((d["summary"]["instance"]["a"].as_f64().unwrap() - (3f64.sqrt() - 1.0)).abs() < 1e-12);

    let list = report(&run(&["catalog", "list"]));
    assert!(list["summary"].as_array().unwrap().len() >= 30);
    let show = report(&run(&["catalog", "show", "flatexample"]));
    assert_eq!(show["summary"]["expectation"]["kind"], "flat");
    let one = run(&["catalog", "verify", "ppwave-harmonic"]);
    assert_eq!(one.status.code(), Some(0));
    let all = run(&["catalog", "verify", "--all", "--parallel", "--grid", "16"]);
    assert_eq!(all.status.code(), Some(0), "{}", String::from_utf8_lossy(&all.stderr));
}

#[test]
fn profiles() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("b.csv");
    let out = run(&[
        "profile",
        "beltrami",
        "--t-end",
        "5",
        "--samples",
        "50",
        "--emit",
        csv.to_str().unwrap(),
    ]);
    let v = report(&out);
    assert!((v["summary"]["t0"].as_f64().unwrap() - 72f64.powf(0.25)).abs() < 1e-12);
    assert!((v["summary"]["k_at_t0"].as_f64().unwrap() + 2f64.sqrt()).abs() < 1e-10);
    let text = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().next(), Some("t,r,h,K"));
    assert_eq!(text.lines().count(), 51);

    let f = report(&run(&["profile", "figure1"]));
    let axis = f["summary"]["axis_points"].as_array().unwrap();
    assert_eq!(axis[0]["smooth"], true);
    assert_eq!(axis[1]["smooth"], false);
    assert_eq!(run(&["profile", "beltrami", "--t-end", "2"]).status.code(), Some(2));
}
