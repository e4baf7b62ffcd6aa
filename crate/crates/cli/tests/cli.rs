use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use cgframe_cli::{run, EXIT_FAIL, EXIT_INPUT, EXIT_PASS};
use cgframe_core::{
    build_system, ComplexMatrix, ControllerPair, FrameInstanceFile, GFrameFamily, Metadata,
};

fn bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cgframe"))
        .args(args)
        .output()
        .unwrap()
}

fn gen(dir: &Path, kind: &str, seed: u64) -> PathBuf {
    let out = dir.join(format!("{kind}-{seed}.json"));
    let code = run([
        "cgframe",
        "generate",
        "--kind",
        kind,
        "--dim",
        "4",
        "--blocks",
        "3",
        "--seed",
        &seed.to_string(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, EXIT_PASS);
    out
}

#[test]
fn bounds_on_diagonal_controller_example() {
    // L_1 = L_2 = Id, C = diag(2, 1), C' = Id: S = diag(4, 2)
    let dir = tempfile::tempdir().unwrap();
    let fam = GFrameFamily::new(
        2,
        vec![ComplexMatrix::identity(2), ComplexMatrix::identity(2)],
    )
    .unwrap();
    let pair = ControllerPair::new(
        ComplexMatrix::from_diag(&[2.0, 1.0]),
        ComplexMatrix::identity(2),
    )
    .unwrap();
    let sys = build_system(fam, pair).unwrap();
    let meta = Metadata {
        seed: 0,
        generator_name: "manual".into(),
        kappa: None,
    };
    let path = dir.path().join("diag.json");
    FrameInstanceFile::from_system(&sys, None, meta)
        .unwrap()
        .save(&path)
        .unwrap();

    let out = bin(&["bounds", path.to_str().unwrap(), "--format", "markdown"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(String::from_utf8(out.stdout).unwrap(), "A = 2\nB = 4\n");

    let out = bin(&["bounds", path.to_str().unwrap()]);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["lower"], 2.0);
    assert_eq!(v["upper"], 4.0);
}

#[test]
fn verify_suites_and_formats() {
    let dir = tempfile::tempdir().unwrap();
    let p = gen(dir.path(), "parseval", 3);
    let p = p.to_str().unwrap();
    for suite in ["bessel", "frame", "dual", "identities", "all"] {
        assert_eq!(
            run(["cgframe", "verify", p, "--suite", suite]),
            EXIT_PASS,
            "{suite}"
        );
    }
    let report = dir.path().join("report.md");
    assert_eq!(
        run([
            "cgframe",
            "verify",
            p,
            "--format",
            "markdown",
            "--out",
            report.to_str().unwrap()
        ]),
        EXIT_PASS
    );
    let text = std::fs::read_to_string(report).unwrap();
    assert!(text.contains("| parseval_energy[J={0}] |"));
}

#[test]
fn parallel_output_matches_sequential() {
    let dir = tempfile::tempdir().unwrap();
    let files: Vec<String> = ["generic", "commuting", "dual-pair", "parseval"]
        .iter()
        .enumerate()
        .map(|(i, k)| gen(dir.path(), k, i as u64).to_string_lossy().into_owned())
        .collect();
    let mut seq = vec!["verify"];
    seq.extend(files.iter().map(String::as_str));
    let a = bin(&seq);
    seq.push("--parallel");
    let b = bin(&seq);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let v: serde_json::Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(v.as_array().unwrap().len(), 4);
}

#[test]
fn strict_tolerance_fails_checks() {
    let dir = tempfile::tempdir().unwrap();
    let p = gen(dir.path(), "generic", 5);
    assert_eq!(
        run(["cgframe", "verify", p.to_str().unwrap(), "--tol", "1e-30"]),
        EXIT_FAIL
    );
}

#[test]
fn input_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("missing.json");
    assert_eq!(
        run(["cgframe", "verify", missing.to_str().unwrap()]),
        EXIT_INPUT
    );
    assert_eq!(
        run(["cgframe", "generate", "--kind", "generic", "--dim", "65", "--blocks", "2"]),
        EXIT_INPUT
    );
    assert_eq!(run(["cgframe", "verify"]), EXIT_INPUT);
    assert_eq!(run(["cgframe", "frobnicate"]), EXIT_INPUT);

    // swap controllers make a block indefinite
    let bad = dir.path().join("bad.json");
    std::fs::write(
        &bad,
        r#"{"version":"1","ambient_dim":2,"blocks":[{"rows":2,"matrix":[[[1,0],[0,0]],[[0,0],[1,0]]]}],
           "control_c":[[[1,0],[0,0]],[[0,0],[1,0]]],"control_cprime":[[[0,0],[1,0]],[[1,0],[0,0]]],
           "metadata":{"seed":0,"generator_name":"manual"}}"#,
    )
    .unwrap();
    let out = bin(&["verify", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("not positive"));
}

#[test]
fn dual_and_recon_commands() {
    let dir = tempfile::tempdir().unwrap();
    let d = gen(dir.path(), "dual-pair", 1);
    let out = bin(&["dual", d.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(v["entries"][0]["proof_residual"].as_f64().unwrap() < 1e-10);

    let c = gen(dir.path(), "commuting", 1);
    let out = bin(&["recon", c.to_str().unwrap(), "--loosen", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let names: Vec<&str> = v["entries"]
        .as_array()
        .unwrap()
        .iter()
        .map(|e| e["name"].as_str().unwrap())
        .collect();
    assert_eq!(
        names,
        ["reconstruction", "frame_algorithm", "preconditioning"]
    );
}

#[test]
fn generate_to_stdout_is_deterministic() {
    let a = bin(&[
        "generate",
        "--kind",
        "ill-conditioned",
        "--dim",
        "5",
        "--blocks",
        "2",
        "--seed",
        "4",
        "--kappa",
        "100",
    ]);
    let b = bin(&[
        "generate",
        "--kind",
        "ill-conditioned",
        "--dim",
        "5",
        "--blocks",
        "2",
        "--seed",
        "4",
        "--kappa",
        "100",
    ]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let f = FrameInstanceFile::from_json(std::str::from_utf8(&a.stdout).unwrap()).unwrap();
    assert_eq!(f.metadata.kappa, Some(100.0));
}
