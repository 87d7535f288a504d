use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn nlsphere(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nlsphere")).args(args).output().expect("binary runs")
}

fn table(bytes: &[u8]) -> Vec<csv::StringRecord> {
    let text = std::str::from_utf8(bytes).unwrap();
    assert!(text.starts_with("# nlsphere "), "missing version header");
    let mut r = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
    r.records().map(|x| x.unwrap()).collect()
}

fn header(bytes: &[u8]) -> String {
    std::str::from_utf8(bytes).unwrap().lines().nth(1).unwrap().to_string()
}

#[test]
fn eigs_normalization() {
    let out = nlsphere(&["eigs", "--a", "0.5", "--delta", "0.1", "--lmax", "32"]);
    assert!(out.status.success());
    assert_eq!(header(&out.stdout), "l,Lambda,Theta,Mu,MuT,TG");
    let rows = table(&out.stdout);
    assert_eq!(rows.len(), 33);
    let lambda0: f64 = rows[0][1].parse().unwrap();
    assert!((lambda0 - 1.0).abs() <= 1e-10);
    // 17 significant digits
    assert_eq!(rows[5][1].split('e').next().unwrap().len(), 18);
}

#[test]
fn eigs_json_and_negative_a() {
    let out = nlsphere(&["eigs", "--a", "-0.5", "--delta", "0.25", "--lmax", "4", "--format", "json"]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["rows"].as_array().unwrap().len(), 5);
    assert!((v["rows"][0]["lambda"].as_f64().unwrap() - 1.0).abs() < 1e-10);
}

#[test]
fn verify_example_passes() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("report.json");
    let out = nlsphere(&[
        "verify", "--tol", "1e-6", "--lmax", "6", "--delta", "0.25", "--a", "0.5", "--seed", "7", "-o",
        report.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(v["passed"], true);
    let recs = v["records"].as_array().unwrap();
    for suite in ["operators", "oracle", "stokes"] {
        assert!(recs.iter().any(|r| r["suite"] == suite));
    }
    for key in ["identity", "params", "l", "m", "residual", "resolution"] {
        assert!(recs[0].get(key).is_some(), "{key}");
    }
}

#[test]
fn exit_codes() {
    assert_eq!(nlsphere(&["eigs", "--a", "1.5", "--delta", "0.1"]).status.code(), Some(2));
    assert_eq!(nlsphere(&["eigs", "--delta", "0.1"]).status.code(), Some(2));
    let fail = nlsphere(&["verify", "--lmax", "2", "--tol", "1e-30", "--points", "1"]);
    assert_eq!(fail.status.code(), Some(1));
    let v: serde_json::Value = serde_json::from_slice(&fail.stdout).unwrap();
    assert_eq!(v["passed"], false);
    let nc = nlsphere(&[
        "verify", "--lmax", "2", "--points", "1", "--n-radial", "1", "--n-azimuthal", "1", "--max-doublings", "1",
    ]);
    assert_eq!(nc.status.code(), Some(3), "{}", String::from_utf8_lossy(&nc.stderr));
}

#[test]
fn convergence_slopes() {
    let out = nlsphere(&["convergence", "--a", "0.5", "--lmax", "4", "--deltas", "0.2,0.1,0.05,0.025"]);
    assert!(out.status.success());
    assert_eq!(header(&out.stdout), "kind,quantity,l,delta,value");
    let rows = table(&out.stdout);
    let slopes: Vec<f64> = rows
        .iter()
        .filter(|r| &r[0] == "slope" && &r[1] == "abs_lambda_minus_1")
        .map(|r| r[4].parse().unwrap())
        .collect();
    assert_eq!(slopes.len(), 4);
    assert!(slopes.iter().all(|s| (1.8..=2.2).contains(s)), "{slopes:?}");
    let distances = rows.iter().filter(|r| &r[0] == "distance").count();
    assert_eq!(distances, 7 * 4);
}

#[test]
fn stokes_zonal_and_columns() {
    let out = nlsphere(&["stokes", "--zonal", "--a", "-0.5,0.5", "--deltas", "0.1", "--theta0", "1.5707963267948966"]);
    assert!(out.status.success());
    assert_eq!(header(&out.stdout), "theta0,a,delta,lmax,lhs,rhs,residual");
    let rows = table(&out.stdout);
    assert_eq!(rows.len(), 2);
    for r in rows {
        let (lhs, rhs, res): (f64, f64, f64) = (r[4].parse().unwrap(), r[5].parse().unwrap(), r[6].parse().unwrap());
        assert!(lhs < 0.0 && (lhs - rhs).abs() < 1e-12 && res < 1e-12);
    }
}

fn run_to(args: &[&str], path: &Path) -> Vec<u8> {
    let mut a = args.to_vec();
    a.extend(["-o", path.to_str().unwrap()]);
    assert!(nlsphere(&a).status.success());
    fs::read(path).unwrap()
}

#[test]
fn deterministic_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("out");
    for args in [
        &["stokes", "--seed", "3", "--lmax", "6"][..],
        &["convergence", "--a", "-0.25", "--seed", "3"][..],
        &["verify", "--lmax", "3", "--seed", "3", "--points", "2"][..],
    ] {
        assert_eq!(run_to(args, &p), run_to(args, &p), "{args:?}");
    }
    let a = run_to(&["stokes", "--seed", "3"], &p);
    let b = run_to(&["stokes", "--seed", "4"], &p);
    assert_ne!(a, b);
}

#[test]
fn apply_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("u.json");
    fs::write(
        &input,
        r#"{"version":"0","kind":"scalar","lmax":2,"coeffs":[{"l":1,"m":0,"re":1.0,"im":0.0}]}"#,
    )
    .unwrap();
    let grad = dir.path().join("g.csv");
    let out = nlsphere(&[
        "apply", "--input", input.to_str().unwrap(), "--op", "surf-grad", "--local", "-o", grad.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let bytes = fs::read(&grad).unwrap();
    assert_eq!(header(&bytes), "component,l,m,re,im");
    let div = nlsphere(&["apply", "--input", grad.to_str().unwrap(), "--op", "surf-div", "--local"]);
    assert!(div.status.success());
    assert_eq!(header(&div.stdout), "l,m,re,im");
    for r in table(&div.stdout) {
        let re: f64 = r[2].parse().unwrap();
        let expect = if &r[0] == "1" && &r[1] == "0" { -2.0 } else { 0.0 };
        assert!((re - expect).abs() < 1e-13, "{r:?}");
    }
    // nonlocal needs kernel parameters
    let bad = nlsphere(&["apply", "--input", input.to_str().unwrap(), "--op", "surf-grad"]);
    assert_eq!(bad.status.code(), Some(2));
    let nl = nlsphere(&[
        "apply", "--input", input.to_str().unwrap(), "--op", "nonlocal-laplacian", "--a", "0.5", "--delta", "0.1",
        "--format", "json",
    ]);
    assert!(nl.status.success());
    let v: serde_json::Value = serde_json::from_slice(&nl.stdout).unwrap();
    assert_eq!(v["kind"], "scalar");
}
