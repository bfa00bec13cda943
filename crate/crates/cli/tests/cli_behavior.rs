//! CLI behavior beyond the round trips: exit codes, flag handling,
//! tolerance overrides, text rendering.

use std::process::Command;

use locdil::sample;
use locdil::schema::{FunctionFile, OperatorRepr, PovmFile};
use locdil::{LocalOperator, Tower, C64};

fn locdil_bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_locdil"))
}

fn write(dir: &std::path::Path, name: &str, text: &str) -> std::path::PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path
}

#[test]
fn malformed_input_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.json", "{ not json");
    let out = locdil_bin()
        .args(["check-operator", bad.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("bad.json"), "diagnostic names the file: {stderr}");

    let missing = dir.path().join("nope.json");
    let out = locdil_bin()
        .args(["check-kernel", missing.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unknown_flags_are_rejected() {
    let out = locdil_bin()
        .args(["check-operator", "whatever.json", "--frobnicate"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn incompatible_level_system_exits_two_with_pair() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(
        dir.path(),
        "levels.json",
        r#"{
            "source": {"dims": [1, 2]},
            "target": {"dims": [1, 2]},
            "levels": [
                {"rows": 1, "cols": 1, "re": [[2.0]]},
                {"rows": 2, "cols": 2, "re": [[2.0, 1.0], [0.0, 3.0]]}
            ]
        }"#,
    );
    let out = locdil_bin()
        .args(["check-operator", path.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("levels 1 and 2"), "{stderr}");
}

#[test]
fn defect_atom_completes_a_short_measure() {
    let dir = tempfile::tempdir().unwrap();
    let t = Tower::new(vec![2]).unwrap();
    let half = LocalOperator::identity(&t).scale(C64::new(0.4, 0.0));
    let povm = locdil::LocalPovm::new(vec![half]).unwrap();
    let path = dir.path().join("short.json");
    std::fs::write(
        &path,
        serde_json::to_string(&PovmFile::of(&povm)).unwrap(),
    )
    .unwrap();

    // Without the flag the sum defect is a certified negative.
    let out = locdil_bin()
        .args(["naimark", path.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["certified_negative"], serde_json::Value::Bool(true));

    // With it the measure is completed and dilates.
    let out = locdil_bin()
        .args(["naimark", path.to_str().unwrap(), "--defect-atom"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["atoms"].as_array().unwrap().len(), 2);
}

#[test]
fn tolerance_overrides_are_recorded() {
    let dir = tempfile::tempdir().unwrap();
    let mut rng = sample::rng(5);
    let t = Tower::new(vec![1, 2]).unwrap();
    let phi = sample::lpdf_on_cyclic(&mut rng, 2, &t, 1);
    let path = dir.path().join("phi.json");
    std::fs::write(&path, serde_json::to_string(&FunctionFile::of(&phi)).unwrap()).unwrap();
    let out = locdil_bin()
        .args([
            "check-lpdf",
            path.to_str().unwrap(),
            "--tol-psd",
            "1e-6",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["psd_rel"], serde_json::json!(1e-6));
}

#[test]
fn text_format_renders_a_summary() {
    let dir = tempfile::tempdir().unwrap();
    let t = Tower::new(vec![1, 2]).unwrap();
    let id = LocalOperator::identity(&t);
    let path = dir.path().join("id.json");
    std::fs::write(&path, serde_json::to_string(&OperatorRepr::of(&id)).unwrap()).unwrap();
    let out = locdil_bin()
        .args(["check-operator", path.to_str().unwrap(), "--format", "text"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("unitary") && text.contains("projection"), "{text}");
    assert!(!text.trim_start().starts_with('{'));
}

#[test]
fn rho_check_exit_codes_follow_the_verdict() {
    let dir = tempfile::tempdir().unwrap();
    let t = Tower::new(vec![2]).unwrap();
    let nilpotent = LocalOperator::from_blocks(
        t.clone(),
        t.clone(),
        vec![locdil::CMatrix::from_row_slice(
            2,
            2,
            &[
                C64::new(0.0, 0.0),
                C64::new(2.0, 0.0),
                C64::new(0.0, 0.0),
                C64::new(0.0, 0.0),
            ],
        )],
    )
    .unwrap();
    let path = dir.path().join("t.json");
    std::fs::write(
        &path,
        serde_json::to_string(&OperatorRepr::of(&nilpotent)).unwrap(),
    )
    .unwrap();
    let no = locdil_bin()
        .args(["rho-check", path.to_str().unwrap(), "--rho", "1", "--horizon", "1"])
        .output()
        .unwrap();
    assert_eq!(no.status.code(), Some(1));
    let doc: serde_json::Value = serde_json::from_slice(&no.stdout).unwrap();
    assert_eq!(doc["verdict"], serde_json::json!("no_with_witness"));
    assert!(doc["witness"]["re"].is_array());

    let yes = locdil_bin()
        .args(["rho-check", path.to_str().unwrap(), "--rho", "2", "--horizon", "8"])
        .output()
        .unwrap();
    assert_eq!(yes.status.code(), Some(0));
    let doc: serde_json::Value = serde_json::from_slice(&yes.stdout).unwrap();
    assert_eq!(doc["verdict"], serde_json::json!("consistent_at_window"));
}

#[test]
fn build_rklhs_refuses_indefinite_kernels_with_certificate() {
    let dir = tempfile::tempdir().unwrap();
    let t = Tower::new(vec![1]).unwrap();
    let id = LocalOperator::identity(&t);
    let two = id.scale(C64::new(2.0, 0.0));
    let kernel = locdil::OperatorKernel::from_fn(&t, 2, |s, u| {
        if s == u {
            id.clone()
        } else {
            two.clone()
        }
    })
    .unwrap();
    let path = dir.path().join("k.json");
    std::fs::write(
        &path,
        serde_json::to_string(&locdil::schema::KernelFile::of(&kernel, None)).unwrap(),
    )
    .unwrap();
    let out = locdil_bin()
        .args(["build-rklhs", path.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(doc["witness"]["eigenvalue"].as_f64().unwrap() < -0.9);
}

#[test]
fn thread_cap_does_not_change_results() {
    let dir = tempfile::tempdir().unwrap();
    let mut rng = sample::rng(6);
    let t = Tower::new(vec![2, 4]).unwrap();
    let phi = sample::lpdf_on_powerset(&mut rng, 2, &t, 2);
    let path = dir.path().join("phi.json");
    std::fs::write(&path, serde_json::to_string(&FunctionFile::of(&phi)).unwrap()).unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for (out, threads) in [(&a, "1"), (&b, "4")] {
        let status = locdil_bin()
            .args(["dilate", path.to_str().unwrap(), "--output", out.to_str().unwrap()])
            .env("LOCDILATE_THREADS", threads)
            .status()
            .unwrap();
        assert_eq!(status.code(), Some(0));
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}
