//! End-to-end tests of the binary: exit codes, verdict lines, diagnostics,
//! and schema stability of the JSON envelope against golden files.

use std::path::PathBuf;
use std::process::Command;

fn fixture(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(name)
        .display()
        .to_string()
}

fn run(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_ndepth"))
        .args(args)
        .output()
        .expect("binary runs");
    (
        out.status.code().expect("no signal"),
        String::from_utf8(out.stdout).expect("utf8 stdout"),
        String::from_utf8(out.stderr).expect("utf8 stderr"),
    )
}

#[test]
fn check_prints_both_verdicts_and_gates_on_the_declared_law() {
    let (code, stdout, _) = run(&["check", &fixture("three_assoc.json"), "--both"]);
    assert_eq!(code, 0, "{stdout}");
    assert!(stdout.contains("corestriction: PASS"), "{stdout}");
    assert!(stdout.contains("strict: FAIL"), "{stdout}");
    assert!(stdout.contains("proper: yes"), "{stdout}");
    assert!(stdout.contains("verdict (declared law): PASS"), "{stdout}");
}

#[test]
fn check_strict_gate_turns_the_same_run_into_a_failure() {
    let (code, stdout, _) = run(&["check", &fixture("three_assoc.json"), "--strict"]);
    assert_eq!(code, 1, "{stdout}");
    assert!(stdout.contains("verdict (strict): FAIL"), "{stdout}");
}

#[test]
fn chain_with_zero_product_separates_the_two_verdicts() {
    let (code, stdout, _) = run(&["check", &fixture("chain3_pair.json"), "--both"]);
    assert_eq!(code, 0, "{stdout}");
    assert!(stdout.contains("corestriction: PASS"), "{stdout}");
    assert!(stdout.contains("strict: FAIL"), "{stdout}");
    let (code, _, _) = run(&["check", &fixture("chain3_pair.json"), "--strict"]);
    assert_eq!(code, 1);
}

#[test]
fn unknown_subcommands_are_input_errors() {
    let (code, _, _) = run(&["frobnicate"]);
    assert_eq!(code, 2);
}

#[test]
fn conflicting_gates_are_input_errors() {
    let (code, _, _) = run(&[
        "check",
        &fixture("three_assoc.json"),
        "--strict",
        "--corestriction",
    ]);
    assert_eq!(code, 2);
}

#[test]
fn malformed_documents_name_the_offending_field() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(
        &path,
        r#"{"field": "rational",
            "space": [{"name": "a", "degree": 0}],
            "operations": {"m2": [{"inputs": ["a", "q"], "output": "a", "coefficient": "1"}]},
            "declared": {"kind": "nassociative", "N": 2}}"#,
    )
    .unwrap();
    let (code, _, stderr) = run(&["check", path.to_str().unwrap()]);
    assert_eq!(code, 2, "{stderr}");
    assert!(stderr.contains("operations.m2[0]"), "{stderr}");
    assert!(stderr.contains("\"q\""), "{stderr}");
}

#[test]
fn duplicate_basis_names_are_input_errors() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("dup.json");
    std::fs::write(
        &path,
        r#"{"field": "rational",
            "space": [{"name": "a", "degree": 0}, {"name": "a", "degree": 1}],
            "declared": {"kind": "ncomplex", "N": 2}}"#,
    )
    .unwrap();
    let (code, _, stderr) = run(&["check", path.to_str().unwrap()]);
    assert_eq!(code, 2, "{stderr}");
    assert!(stderr.contains("space"), "{stderr}");
}

#[test]
fn mc_prints_the_classical_coefficients_and_the_oracle_verdict() {
    let (code, stdout, _) = run(&["mc", "-N", "2", "-M", "2", "--oracle"]);
    assert_eq!(code, 0, "{stdout}");
    assert!(stdout.contains("c((1), 2) = 1"), "{stdout}");
    assert!(stdout.contains("c((0,0), 2) = 1"), "{stdout}");
    assert!(stdout.contains("EQUAL"), "{stdout}");
}

#[test]
fn mc_oracle_disagreement_is_a_negative_verdict() {
    let (code, stdout, _) = run(&["mc", "-N", "3", "-M", "4", "--oracle"]);
    assert_eq!(code, 1, "{stdout}");
    assert!(stdout.contains("DIFFERENT"), "{stdout}");
    assert!(stdout.contains("difference term"), "{stdout}");
}

#[test]
fn tree_enumerations_match_the_small_counts() {
    let (code, stdout, _) = run(&["trees", "--leaves", "2", "--unary", "2", "--binary", "1"]);
    assert_eq!(code, 0);
    assert!(stdout.contains("6 tree(s)"), "{stdout}");
    assert_eq!(stdout.lines().count(), 7, "{stdout}");

    let (code, stdout, _) = run(&["trees", "--leaves", "2", "--vertices", "2"]);
    assert_eq!(code, 0);
    assert!(stdout.contains("3 tree(s)"), "{stdout}");

    let (code, _, _) = run(&["trees", "--leaves", "2"]);
    assert_eq!(code, 2);
}

#[test]
fn cohomology_of_the_shipped_chain_is_acyclic() {
    let (code, stdout, _) = run(&["cohomology", &fixture("chain3.json"), "--complex"]);
    assert_eq!(code, 0, "{stdout}");
    assert!(stdout.contains("H_1 = 0"), "{stdout}");
    assert!(stdout.contains("H_2 = 0"), "{stdout}");
}

#[test]
fn deform_full_accepts_the_shipped_cocycle() {
    let (code, stdout, _) = run(&[
        "deform",
        &fixture("dual_numbers.json"),
        "-N",
        "2",
        "-M",
        "2",
        "--full",
        "2",
    ]);
    assert_eq!(code, 0, "{stdout}");
    assert!(stdout.contains("PASS"), "{stdout}");
    assert!(
        stdout.contains("linear term equals the ladder value: true"),
        "{stdout}"
    );
}

#[test]
fn deform_full_rejects_a_non_cocycle() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad_cochain.json");
    let doc = std::fs::read_to_string(fixture("dual_numbers.json")).unwrap();
    // f(x, e) = e is not a cocycle for the dual numbers.
    let doc = doc.replace(
        r#"{"inputs": ["x", "x"], "output": "e", "coefficient": "1"}"#,
        r#"{"inputs": ["x", "e"], "output": "e", "coefficient": "1"}"#,
    );
    std::fs::write(&path, doc).unwrap();
    let (code, stdout, _) = run(&[
        "deform",
        path.to_str().unwrap(),
        "-N",
        "2",
        "-M",
        "2",
        "--full",
        "2",
    ]);
    assert_eq!(code, 1, "{stdout}");
    assert!(
        stdout.contains("perturbed power vanishes: false"),
        "{stdout}"
    );
}

#[test]
fn deform_reports_ladder_cohomology_dimensions() {
    let (code, stdout, _) = run(&[
        "deform",
        &fixture("one_dim_unital.json"),
        "-N",
        "2",
        "-M",
        "3",
    ]);
    assert_eq!(code, 0, "{stdout}");
    assert!(stdout.contains("H^2 dimension:    0"), "{stdout}");
}

#[test]
fn endalg_collapses_at_the_depth_bound() {
    let (code, stdout, _) = run(&["endalg", &fixture("chain3.json"), "-N", "3"]);
    assert_eq!(code, 0, "{stdout}");
    assert!(stdout.contains("end dimension 9"), "{stdout}");
    assert!(stdout.contains("vanishes first at 5"), "{stdout}");
}

#[test]
fn series_mismatch_is_a_negative_verdict() {
    let (code, stdout, _) = run(&["series", "ndga-graded", "-N", "2", "--order", "4"]);
    assert_eq!(code, 1, "{stdout}");
    assert!(stdout.contains("differ"), "{stdout}");

    let (code, _, _) = run(&["series", "ndga-linear", "-N", "2", "--order", "4"]);
    assert_eq!(code, 0);
}

#[test]
fn operad_tables_print_exact_ranks() {
    let (code, stdout, _) = run(&["operad", "ass", "-N", "2", "--max", "3"]);
    assert_eq!(code, 0, "{stdout}");
    assert!(
        stdout.contains("n = 3: free dim 12, relation rank 6, dim 6"),
        "{stdout}"
    );
}

#[test]
fn json_envelopes_match_the_golden_files() {
    let golden_dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden");
    let cases: &[(&str, Vec<String>)] = &[
        (
            "check_three_assoc.json",
            vec![
                "check".into(),
                fixture("three_assoc.json"),
                "--both".into(),
                "--json".into(),
            ],
        ),
        (
            "mc_2_2_oracle.json",
            vec![
                "mc".into(),
                "-N".into(),
                "2".into(),
                "-M".into(),
                "2".into(),
                "--oracle".into(),
                "--json".into(),
            ],
        ),
        (
            "trees_2_2_1.json",
            vec![
                "trees".into(),
                "--leaves".into(),
                "2".into(),
                "--unary".into(),
                "2".into(),
                "--binary".into(),
                "1".into(),
                "--json".into(),
            ],
        ),
        (
            "cohomology_chain3.json",
            vec![
                "cohomology".into(),
                fixture("chain3.json"),
                "--complex".into(),
                "--json".into(),
            ],
        ),
        (
            "deform_full_dual_numbers.json",
            vec![
                "deform".into(),
                fixture("dual_numbers.json"),
                "-N".into(),
                "2".into(),
                "-M".into(),
                "2".into(),
                "--full".into(),
                "2".into(),
                "--json".into(),
            ],
        ),
    ];
    for (name, args) in cases {
        let args: Vec<&str> = args.iter().map(String::as_str).collect();
        let (_, stdout, _) = run(&args);
        let expected = std::fs::read_to_string(golden_dir.join(name))
            .unwrap_or_else(|e| panic!("golden {name}: {e}"));
        assert_eq!(stdout, expected, "golden mismatch for {name}");
        let value: serde_json::Value = serde_json::from_str(&stdout).unwrap();
        assert_eq!(value["schema_version"], 1, "{name}");
    }
}

#[test]
fn json_pass_field_tracks_the_exit_code() {
    let (code, stdout, _) = run(&[
        "check",
        &fixture("three_assoc.json"),
        "--strict",
        "--json",
    ]);
    assert_eq!(code, 1);
    let value: serde_json::Value = serde_json::from_str(&stdout).unwrap();
    assert_eq!(value["pass"], false);
    assert_eq!(value["report"]["validation"]["corestriction"], true);
    assert_eq!(value["report"]["validation"]["strict"], false);
}

#[test]
fn audit_writes_the_findings_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("findings.md");
    let (code, stdout, _) = run(&["audit", "--out", out.to_str().unwrap()]);
    assert_eq!(code, 0, "{stdout}");
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.starts_with("# Findings"), "{text}");
    assert!(text.matches("\n## ").count() >= 6, "{text}");
    assert!(text.contains("DIFFERENT"), "{text}");
}
