use std::process::{Command, Output};

use serde_json::Value;

fn dbr(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dbr"))
        .args(args)
        .env_remove("DBR_TOL")
        .output()
        .expect("run dbr")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn re(v: &Value) -> f64 {
    v[0].as_f64().unwrap()
}

fn close(v: &Value, want: f64) -> bool {
    (re(v) - want).abs() < 1e-9 && v[1].as_f64().unwrap().abs() < 1e-9
}

#[test]
fn two_point_kernel_document() {
    let out = dbr(&["kernel", "--atoms", "1,0", "--weights", "1,1"]);
    assert_eq!(out.status.code(), Some(0));
    let doc = json(&out);
    assert_eq!(doc["command"], "kernel");
    let r = &doc["result"];
    let q = r["q"].as_array().unwrap();
    assert_eq!(q.len(), 2);
    assert!(close(&q[0], 2.0) && close(&q[1], -1.0));
    let k1 = r["atom_kernels"][0]["num"].as_array().unwrap();
    assert!(close(&k1[0], 2.0) && close(&k1[1], -0.5));
    assert!(close(&r["gram"][0][1], -2.0));
    assert_eq!(r["passed"], true);
    assert!(r["checks"]["reproducing"].as_f64().unwrap() < 1e-9);
    assert_eq!(r["kernel"]["numerator"].as_array().unwrap().len(), 4);
}

#[test]
fn tuple_table() {
    let out = dbr(&[
        "tuple", "--lambda", "1", "--p", "0,1", "--m", "2", "--kmax", "10",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let r = &json(&out)["result"];
    assert_eq!(r["exact"], true);
    assert_eq!(r["length"], 4);
    let entries = r["entries"].as_array().unwrap();
    let column = |i: usize| -> Vec<String> {
        let values = entries[i]["exact"].as_array().unwrap();
        values.iter().map(|v| v.as_str().unwrap().to_string()).collect()
    };
    let (first, second, third) = (column(1), column(2), column(3));
    assert_eq!(first.len(), 11);
    for (k, ((a, b), c)) in first.iter().zip(&second).zip(&third).enumerate() {
        assert_eq!(*a, (k + 1).to_string());
        assert_eq!(*b, (k + 3).to_string());
        assert_eq!(c, "2");
    }
    assert_eq!(entries[2]["closed_form"], "(D + 3)δ(1)");
    assert_eq!(r["allowability"]["gram_psd"], true);
}

#[test]
fn closed_form_tuple() {
    let out = dbr(&[
        "tuple",
        "--lambda",
        "zeta:4:1",
        "--m",
        "2",
        "--closed-form",
        "--kmax",
        "2",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let r = &json(&out)["result"];
    assert_eq!(r["entries"][3]["closed_form"], "2δ(i)");
}

#[test]
fn schur_for_point_mass_on_circle() {
    let out = dbr(&["schur", "--atoms", "1@0.7", "--weights", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let r = &json(&out)["result"];
    assert_eq!(r["rank"], 1);
    assert!(r["degree_one"]["boundary_gap"].as_f64().unwrap().abs() < 1e-8);
}

#[test]
fn defect_of_two_atom_tuple() {
    let out = dbr(&[
        "defect",
        "--lambda",
        "1",
        "--p",
        "1",
        "--m",
        "1",
        "--lambda",
        "-1",
        "--p",
        "1",
        "--m",
        "2",
        "--order",
        "1",
        "--truncation",
        "8",
        "--annihilate=-1,-1,1,1",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let r = &json(&out)["result"];
    assert_eq!(r["rank"], 2);
    assert_eq!(r["expansive"], true);
    assert_eq!(r["annihilation"]["annihilated"], true);
}

#[test]
fn local_norm_is_strict_four_isometry() {
    let out = dbr(&[
        "defect",
        "--local",
        "--lambda",
        "1",
        "--p",
        "0,1",
        "--m",
        "2",
        "--order",
        "4",
        "--truncation",
        "10",
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["result"]["isometry_order"], 4);
}

#[test]
fn fixture_suite_passes_and_is_reproducible() {
    let a = dbr(&["verify", "--suite", "paper"]);
    assert_eq!(
        a.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&a.stderr)
    );
    let b = dbr(&["verify"]);
    assert_eq!(a.stdout, b.stdout);
    let doc = json(&a);
    assert_eq!(doc["result"]["checks"].as_array().unwrap().len(), 10);
    assert_eq!(doc["result"]["passed"], true);
    let stderr = String::from_utf8_lossy(&a.stderr);
    assert_eq!(
        stderr.lines().filter(|l| l.starts_with("[PASS]")).count(),
        10
    );
}

#[test]
fn output_is_deterministic() {
    let args = [
        "kernel",
        "--atoms",
        "0.3+0.4i,zeta:5:2",
        "--weights",
        "1,0.5",
    ];
    assert_eq!(dbr(&args).stdout, dbr(&args).stdout);
}

#[test]
fn output_file() {
    let path = std::path::Path::new(env!("CARGO_TARGET_TMPDIR")).join("kernel.json");
    let out = dbr(&[
        "kernel",
        "--atoms",
        "0",
        "--weights",
        "1",
        "--output",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let doc: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(doc["command"], "kernel");
}

#[test]
fn input_errors_exit_one() {
    for args in [
        &["kernel", "--atoms", "2", "--weights", "1"][..],
        &["kernel", "--atoms", "1,x", "--weights", "1,1"],
        &["kernel", "--atoms", "1", "--weights", "-1"],
        &["kernel", "--atoms", "1"],
        &["tuple", "--lambda", "0.5", "--p", "1", "--m", "1"],
        &["tuple", "--lambda", "1", "--p", "0,0,1", "--m", "2"],
        &["frobnicate"],
    ] {
        let out = dbr(args);
        assert_eq!(out.status.code(), Some(1), "{args:?}");
        assert!(!out.stderr.is_empty());
    }
}

#[test]
fn tolerance_from_environment() {
    let out = Command::new(env!("CARGO_BIN_EXE_dbr"))
        .args(["verify", "--atoms", "1,0", "--weights", "1,1"])
        .env("DBR_TOL", "1e-30")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let tol = json(&out)["tolerance"].as_f64().unwrap();
    assert!((tol / 1e-30 - 1.0).abs() < 1e-12);
    let out = dbr(&[
        "verify",
        "--atoms",
        "1,0",
        "--weights",
        "1,1",
        "--tol",
        "1e-8",
    ]);
    assert_eq!(out.status.code(), Some(0));
}
