use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use isoclinic_core::io::write_cmat;
use isoclinic_core::linalg::{c64, identity, zeros, ComplexMatrix};
use isoclinic_core::pauli::PauliOperator;
use serde_json::Value;

fn run(args: &[&str]) -> (i32, Value, String) {
    let out: Output = Command::new(env!("CARGO_BIN_EXE_isoclinic"))
        .args(args)
        .output()
        .expect("binary runs");
    let stdout = String::from_utf8(out.stdout).unwrap();
    let stderr = String::from_utf8(out.stderr).unwrap();
    let report = if stdout.trim().is_empty() {
        Value::Null
    } else {
        serde_json::from_str(&stdout).expect("stdout is a JSON report")
    };
    (out.status.code().unwrap(), report, stderr)
}

fn put(dir: &Path, name: &str, m: &ComplexMatrix) -> String {
    let path = dir.join(name);
    write_cmat(&path, m).unwrap();
    path.to_str().unwrap().to_string()
}

fn basis_vector(n: usize, i: usize) -> ComplexMatrix {
    let mut v = zeros(n, 1);
    v[(i, 0)] = c64(1.0, 0.0);
    v
}

fn pauli(s: &str) -> ComplexMatrix {
    PauliOperator::parse(s).unwrap().to_matrix().unwrap()
}

fn repetition_code() -> ComplexMatrix {
    let mut p = zeros(8, 8);
    p[(0, 0)] = c64(1.0, 0.0);
    p[(7, 7)] = c64(1.0, 0.0);
    p
}

#[test]
fn angles_of_orthogonal_spans() {
    let dir = tempfile::tempdir().unwrap();
    let a = put(dir.path(), "v.cmat.json", &basis_vector(3, 0));
    let b = put(dir.path(), "w.cmat.json", &basis_vector(3, 2));
    let (code, report, stderr) = run(&["angles", "--a", &a, "--b", &b]);
    assert_eq!(code, 0);
    assert_eq!(report["command"], "angles");
    assert_eq!(report["verdict"], true);
    let angles = report["payload"]["angles"].as_array().unwrap();
    assert_eq!(angles.len(), 1);
    assert!((angles[0].as_f64().unwrap() - std::f64::consts::FRAC_PI_2).abs() < 1e-12);
    assert!(stderr.starts_with("angles: verdict true"));
}

#[test]
fn constructed_mum_rechecks() {
    let dir = tempfile::tempdir().unwrap();
    let bundle = dir.path().join("mum3");
    let bundle = bundle.to_str().unwrap();
    let (code, report, _) = run(&["construct", "mum", "--d", "3", "--n", "2", "--out", bundle]);
    assert_eq!(code, 0);
    let written = report["artifacts_written"].as_array().unwrap();
    assert_eq!(written.len(), 7);
    let effects = std::fs::read_dir(bundle)
        .unwrap()
        .filter(|e| e.as_ref().unwrap().file_name().to_str().unwrap().ends_with(".cmat.json"))
        .count();
    assert_eq!(effects, 6);
    assert!(Path::new(bundle).join("manifest.json").exists());

    let (code, report, _) = run(&["mum", "check", bundle]);
    assert_eq!(code, 0);
    assert_eq!(report["payload"]["pooled_isoclinic"], true);
    assert!(report["max_residual"].as_f64().unwrap() <= 1e-10);
}

#[test]
fn canonical_form_bundle() {
    let dir = tempfile::tempdir().unwrap();
    let bundle = dir.path().join("mum");
    let canon = dir.path().join("canon");
    let (code, _, _) = run(&["construct", "mum", "--d", "2", "--n", "3", "--out", bundle.to_str().unwrap()]);
    assert_eq!(code, 0);
    let (code, report, _) = run(&[
        "mum",
        "canonical",
        bundle.to_str().unwrap(),
        "--measurements",
        "1",
        "2",
        "--anchor",
        "1",
        "--out",
        canon.to_str().unwrap(),
    ]);
    assert_eq!(code, 0, "{report}");
    assert_eq!(report["payload"]["relations"].as_array().unwrap().len(), 4);
    assert!(report["payload"]["rebuild_residual"].as_f64().unwrap() < 1e-9);
    assert!(canon.join("canonical.json").exists());
    assert!(canon.join("blocks").join("b1_i0_j1.cmat.json").exists());
}

#[test]
fn failing_kl_pair_is_named() {
    let dir = tempfile::tempdir().unwrap();
    // the code span{|0⟩, |1⟩} and an error that maps |0⟩ into the code
    // while sending |1⟩ outside it
    let mut p_c = zeros(4, 4);
    p_c[(0, 0)] = c64(1.0, 0.0);
    p_c[(1, 1)] = c64(1.0, 0.0);
    let mut e = zeros(4, 4);
    e[(1, 0)] = c64(1.0, 0.0);
    e[(2, 1)] = c64(1.0, 0.0);
    e[(0, 2)] = c64(1.0, 0.0);
    e[(3, 3)] = c64(1.0, 0.0);
    let code = put(dir.path(), "p.cmat.json", &p_c);
    let e1 = put(dir.path(), "e1.cmat.json", &identity(4));
    let e2 = put(dir.path(), "e2.cmat.json", &e);
    let (status, report, _) = run(&["kl", "check", "--code", &code, "--ops", &e1, &e2]);
    assert_eq!(status, 1);
    assert_eq!(report["verdict"], false);
    let failure = &report["payload"]["failure"];
    assert_eq!(failure["kind"], "condition_failed");
    assert_eq!(failure["indices"], serde_json::json!([0, 1]));
    assert!(failure["residual"].as_f64().unwrap() > 0.1);
}

#[test]
fn classic_and_general_kl_on_phase_flip() {
    let dir = tempfile::tempdir().unwrap();
    let code = put(dir.path(), "p.cmat.json", &repetition_code());
    let ops: Vec<String> = ["III", "XII", "IXI", "IIX", "IIZ"]
        .iter()
        .enumerate()
        .map(|(i, s)| put(dir.path(), &format!("e{i}.cmat.json"), &pauli(s)))
        .collect();
    let mut args = vec!["kl", "check", "--code", code.as_str(), "--ops"];
    args.extend(ops.iter().map(String::as_str));

    let (status, report, _) = run(&args);
    assert_eq!(status, 0);
    let nontrivial = report["payload"]["unitary_nontriviality"][0][4].as_f64().unwrap();
    assert!(nontrivial > 0.5);

    args.push("--classic");
    let (status, report, _) = run(&args);
    assert_eq!(status, 1);
    assert_eq!(report["payload"]["failure"]["indices"], serde_json::json!([0, 4]));
}

#[test]
fn kl_witness_unitaries_are_written() {
    let dir = tempfile::tempdir().unwrap();
    let code = put(dir.path(), "p.cmat.json", &repetition_code());
    let e0 = put(dir.path(), "e0.cmat.json", &pauli("III"));
    let e1 = put(dir.path(), "e1.cmat.json", &pauli("IIZ"));
    let out = dir.path().join("witness");
    let (status, report, _) = run(&[
        "kl", "check", "--code", &code, "--ops", &e0, &e1, "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(status, 0);
    assert_eq!(report["artifacts_written"].as_array().unwrap().len(), 4);
    assert!(out.join("u_0_1.cmat.json").exists());
}

#[test]
fn graph_family_rechecks_as_isoclinic() {
    let dir = tempfile::tempdir().unwrap();
    let bundle = dir.path().join("graphs");
    let (status, report, _) = run(&["construct", "graphs", "--m", "4", "--out", bundle.to_str().unwrap()]);
    assert_eq!(status, 0);
    assert_eq!(report["payload"]["count"], 6);
    let members: Vec<PathBuf> = (0..6).map(|i| bundle.join(format!("member_{i}.cmat.json"))).collect();
    let mut args = vec!["isoclinic", "check"];
    args.extend(members.iter().map(|p| p.to_str().unwrap()));
    let (status, report, _) = run(&args);
    assert_eq!(status, 0);
    let lambdas = report["payload"]["lambda_matrix"].as_array().unwrap();
    assert!((lambdas[0][5].as_f64().unwrap() - 0.5).abs() < 1e-10);
}

#[test]
fn non_isoclinic_pair_fails_with_locus() {
    let dir = tempfile::tempdir().unwrap();
    // span{e0, e1} against span{e0, e2 + e1/2}: angles 0 and a nonzero angle
    let mut v = zeros(3, 2);
    v[(0, 0)] = c64(1.0, 0.0);
    v[(1, 1)] = c64(1.0, 0.0);
    let mut w = zeros(3, 2);
    w[(0, 0)] = c64(1.0, 0.0);
    w[(1, 1)] = c64(0.5, 0.0);
    w[(2, 1)] = c64(1.0, 0.0);
    let a = put(dir.path(), "v.cmat.json", &v);
    let b = put(dir.path(), "w.cmat.json", &w);
    let (status, report, _) = run(&["isoclinic", "check", "--as", "span", &a, &b]);
    assert_eq!(status, 1);
    let failing = report["payload"]["failing_pairs"].as_array().unwrap();
    assert_eq!(failing[0]["indices"], serde_json::json!([0, 1]));
    assert!(failing[0]["residual"].as_f64().unwrap() > 0.1);
}

#[test]
fn stabilizer_commands() {
    let (status, report, _) = run(&["stabilizer", "project", "--generators", "ZZI,IZZ"]);
    assert_eq!(status, 0);
    assert_eq!(report["payload"]["code_dimension"], 2);

    let (status, report, _) = run(&[
        "stabilizer", "classify", "--generators", "ZII,IZI", "--errors", "XII,IIX,-ZII,IIZ",
    ]);
    assert_eq!(status, 0);
    let classes: Vec<&str> = report["payload"]["classes"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| c["class"].as_str().unwrap())
        .collect();
    assert_eq!(classes, ["detectable", "logical", "stabilizer_coset", "logical"]);

    let (status, report, _) = run(&[
        "stabilizer", "verify", "--generators", "ZII,IZI", "--errors", "III,XII,IXI,IIX,IIY",
    ]);
    assert_eq!(status, 0);
    assert_eq!(report["payload"]["isoclinic"], true);
    assert_eq!(report["payload"]["consistent"], true);
    assert_eq!(report["payload"]["pair_classes"][0][3], "logical");
}

#[test]
fn reproducible_reports_are_byte_identical() {
    let args = ["--reproducible", "construct", "omega", "--d", "3", "--n", "3"];
    let first = Command::new(env!("CARGO_BIN_EXE_isoclinic")).args(args).output().unwrap();
    let second = Command::new(env!("CARGO_BIN_EXE_isoclinic")).args(args).output().unwrap();
    assert_eq!(first.stdout, second.stdout);
    let report: Value = serde_json::from_slice(&first.stdout).unwrap();
    assert!(report.get("timestamp").is_none());

    let (_, report, _) = run(&["construct", "omega", "--d", "3", "--n", "3"]);
    assert!(report["timestamp"].is_u64());
}

#[test]
fn input_errors_exit_two_with_one_line() {
    for args in [
        vec!["frobnicate"],
        vec!["construct", "anticommuting", "--m", "5"],
        vec!["stabilizer", "project", "--generators", "ZII,XII"],
        vec!["kl", "check", "--code", "/does/not/exist.cmat.json", "--ops", "x"],
        vec!["--abs-tol", "-1", "construct", "omega", "--d", "2", "--n", "2"],
    ] {
        let (status, report, stderr) = run(&args);
        assert_eq!(status, 2, "{args:?}");
        assert_eq!(report, Value::Null);
        assert_eq!(stderr.trim().lines().count(), 1, "{stderr}");
    }
}

#[test]
fn tolerance_is_reported() {
    let (_, report, _) = run(&["--abs-tol", "1e-8", "--rel-tol", "0", "construct", "anticommuting", "--m", "6"]);
    assert_eq!(report["tolerance_used"]["abs"], 1e-8);
    assert_eq!(report["tolerance_used"]["rel"], 0.0);
    assert_eq!(report["payload"]["count"], 3);
}
