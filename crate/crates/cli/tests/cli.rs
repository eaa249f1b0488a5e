//! Black-box tests of the binary: exit codes, report shape, determinism.

use serde_json::Value;
use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_relu-ident"))
}

fn parse_stdout(out: &Output) -> Value {
    assert!(
        !out.stdout.is_empty(),
        "no report on stdout; stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("report is JSON")
}

fn materialize(dir: &Path, family: &str) -> Vec<String> {
    let prefix = dir.join(family);
    let out = bin()
        .args(["examples", family, "--prefix"])
        .arg(&prefix)
        .output()
        .unwrap();
    assert!(out.status.success());
    let report = parse_stdout(&out);
    report["verdicts"]["files"]
        .as_array()
        .unwrap()
        .iter()
        .map(|f| f.as_str().unwrap().to_string())
        .collect()
}

#[test]
fn nonlocal_pair_compares_to_none_and_expect_gates_the_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    let files = materialize(dir.path(), "nonlocal");
    assert_eq!(files.len(), 2);

    let out = bin().args(["compare", &files[0], &files[1]]).output().unwrap();
    assert!(out.status.success());
    let report = parse_stdout(&out);
    assert_eq!(report["verdicts"]["relation"], "none");
    assert_eq!(report["command"], "compare");
    assert!(report["inputs"][&files[0]].as_str().unwrap().starts_with("sha256:"));
    assert!(report.get("timings").is_none());

    let out = bin()
        .args(["compare", &files[0], &files[1], "--expect", "PS"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));

    let out = bin()
        .args(["compare", &files[0], &files[0], "--expect", "S"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "a network is S-equivalent to itself");
}

#[test]
fn analyze_reports_the_twin_structure_of_abs() {
    let dir = tempfile::tempdir().unwrap();
    let files = materialize(dir.path(), "abs");
    let out = bin().args(["analyze", &files[0]]).output().unwrap();
    assert!(out.status.success());
    let report = parse_stdout(&out);
    let v = &report["verdicts"];
    assert_eq!(v["admissible"], true);
    assert_eq!(v["twin_classes"], 1);
    assert_eq!(v["actdim"], 2);
    assert!(v["irreducible"]["verdict"].get("Reducible").is_some());
    assert_eq!(v["shallow_class"]["kind"], "excluded-by-twins");
    assert_eq!(v["shallow_class"]["negative_pairs"], 1);
}

#[test]
fn actspace_certificate_verdict_flips_with_the_constraint() {
    let dir = tempfile::tempdir().unwrap();
    let files = materialize(dir.path(), "abs");

    let out = bin()
        .args(["actspace", &files[0], "--certificate", "none"])
        .output()
        .unwrap();
    let report = parse_stdout(&out);
    assert_eq!(report["verdicts"]["degeneracy"], "degenerate");

    let out = bin()
        .args([
            "actspace",
            &files[0],
            "--certificate",
            "zero-output-bias",
            "--expect",
            "non-degenerate",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));

    let out = bin()
        .args(["actspace", &files[0], "--certificate", "none", "--expect", "non-degenerate"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2), "mismatched --expect must exit 2");
}

#[test]
fn seeded_reports_are_byte_identical_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let files = materialize(dir.path(), "nonlocal");

    let run = |threads: &str| {
        let out = bin()
            .args(["recover", "--target", &files[0], "--seed", "9"])
            .env("RELU_IDENT_THREADS", threads)
            .output()
            .unwrap();
        assert!(out.status.success());
        out.stdout
    };
    assert_eq!(run("1"), run("4"));
}

#[test]
fn recover_target_reconstructs_the_nonlocal_base() {
    let dir = tempfile::tempdir().unwrap();
    let files = materialize(dir.path(), "nonlocal");
    let out = bin().args(["recover", "--target", &files[0]]).output().unwrap();
    assert!(out.status.success());
    let report = parse_stdout(&out);
    assert_eq!(report["verdicts"]["units"], 2);
    assert_eq!(report["witnesses"]["network"]["widths"], serde_json::json!([1, 2, 1]));
    // This target's orientation is intrinsically ambiguous, which the report
    // must flag, while the reassembled function still verifies.
    assert_eq!(report["verdicts"]["clean"], false);
    let max_err = report["witnesses"]["verification"]["max_abs_err"].as_f64().unwrap();
    assert!(max_err < 1e-8, "verification error {max_err}");
}

#[test]
fn recover_exec_handles_an_external_affine_oracle() {
    let out = bin()
        .args([
            "recover",
            "--exec",
            r#"awk '{printf "%.17g\n", 3*$1 - $2 + 2}'"#,
            "--input-dim",
            "2",
            "--output-dim",
            "1",
            "--budget",
            "900",
        ])
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let report = parse_stdout(&out);
    assert_eq!(report["verdicts"]["units"], 0);
    assert_eq!(report["verdicts"]["clean"], true);
    let linear = &report["witnesses"]["affine"]["linear"][0];
    assert!((linear[0].as_f64().unwrap() - 3.0).abs() < 1e-7);
    assert!((linear[1].as_f64().unwrap() + 1.0).abs() < 1e-7);
    assert!((report["witnesses"]["affine"]["constant"][0].as_f64().unwrap() - 2.0).abs() < 1e-7);
}

#[test]
fn identset_validation_summary_is_clean_on_the_nonlocal_base() {
    let dir = tempfile::tempdir().unwrap();
    let files = materialize(dir.path(), "nonlocal");
    let out = bin()
        .args(["identset", &files[0], "--trials", "30"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let report = parse_stdout(&out);
    assert_eq!(report["verdicts"]["falsifiers"], 0);
    assert_eq!(report["verdicts"]["scaling_failures"], 0);
    assert_eq!(report["verdicts"]["collapse_falsifier"], false);
}

#[test]
fn embed_writes_per_output_block_files_next_to_the_report() {
    let dir = tempfile::tempdir().unwrap();
    let files = materialize(dir.path(), "abs");
    let report_path = dir.path().join("emb.json");
    let out = bin()
        .args(["embed", &files[0], "--out"])
        .arg(&report_path)
        .output()
        .unwrap();
    assert!(out.status.success());
    let report: Value =
        serde_json::from_str(&std::fs::read_to_string(&report_path).unwrap()).unwrap();
    assert_eq!(report["verdicts"]["path_count"], 5);
    let block_path = dir.path().join("emb.eta0.json");
    let block: Value =
        serde_json::from_str(&std::fs::read_to_string(&block_path).unwrap()).unwrap();
    assert_eq!(block["input"].as_array().unwrap().len(), 2);
}

#[test]
fn malformed_input_exits_one_with_a_message() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{ not json").unwrap();
    let out = bin().args(["analyze"]).arg(&bad).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("error"));
}
