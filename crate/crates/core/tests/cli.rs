use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use inferfl::corpus::{golden_case, motivating_example, write_corpus, MOTIVATING_FIXED_SOURCE};
use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_inferfl"))
        .args(args)
        .output()
        .unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn write_golden(dir: &Path, source: &str) {
    let g = motivating_example();
    fs::write(dir.join("program.src"), source).unwrap();
    fs::write(
        dir.join("tests.json"),
        serde_json::to_string(&g.tests).unwrap(),
    )
    .unwrap();
}

fn trace_golden(dir: &Path) {
    write_golden(dir, &motivating_example().source);
    let out = run(&[
        "trace",
        "--program",
        p(&dir.join("program.src")),
        "--tests",
        p(&dir.join("tests.json")),
        "--out",
        p(&dir.join("t")),
        "--ddg",
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn trace_writes_spectra_pdg_and_verdicts() {
    let d = tempfile::tempdir().unwrap();
    trace_golden(d.path());
    for f in [
        "coverage.json",
        "slice.json",
        "pdg.json",
        "verdicts.json",
        "ddg.json",
    ] {
        assert!(d.path().join("t").join(f).exists(), "{f} missing");
    }
    let verdicts: Vec<Value> =
        serde_json::from_str(&fs::read_to_string(d.path().join("t/verdicts.json")).unwrap())
            .unwrap();
    let fails = verdicts.iter().filter(|v| v["verdict"] == "fail").count();
    assert_eq!((fails, verdicts.len() - fails), (6, 6));
}

#[test]
fn missing_tests_file_is_an_input_error_naming_the_path() {
    let d = tempfile::tempdir().unwrap();
    write_golden(d.path(), &motivating_example().source);
    let missing = d.path().join("absent.json");
    let out = run(&[
        "trace",
        "--program",
        p(&d.path().join("program.src")),
        "--tests",
        p(&missing),
        "--out",
        p(d.path()),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("absent.json"));
}

#[test]
fn program_without_output_is_an_input_error() {
    let d = tempfile::tempdir().unwrap();
    write_golden(d.path(), "read(a, b, c);\nx = a + b;\n");
    let out = run(&[
        "trace",
        "--program",
        p(&d.path().join("program.src")),
        "--tests",
        p(&d.path().join("tests.json")),
        "--out",
        p(d.path()),
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn syntax_errors_report_file_and_line() {
    let d = tempfile::tempdir().unwrap();
    write_golden(d.path(), "read(a, b, c);\nx = a +;\nprint(x);\n");
    let out = run(&[
        "trace",
        "--program",
        p(&d.path().join("program.src")),
        "--tests",
        p(&d.path().join("tests.json")),
        "--out",
        p(d.path()),
    ]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("program.src") && err.contains("2:"), "{err}");
}

#[test]
fn localize_golden_ranks_s9_and_s15_above_s6() {
    let d = tempfile::tempdir().unwrap();
    trace_golden(d.path());
    let t = d.path().join("t");
    let out = run(&[
        "localize",
        "--spectrum",
        p(&t.join("coverage.json")),
        "--effect-spectrum",
        p(&t.join("slice.json")),
        "--pdg",
        p(&t.join("pdg.json")),
    ]);
    assert!(out.status.success());
    let report: Value = serde_json::from_slice(&out.stdout).unwrap();
    let top: Vec<&str> = report["ranking"]["entries"].as_array().unwrap()[..3]
        .iter()
        .map(|e| e["statement"].as_str().unwrap())
        .collect();
    assert_eq!(top, ["S9", "S15", "S6"]);
    assert_eq!(report["config"]["delta_fraction"], 0.3);
    let chains = report["ranking"]["chains"].as_array().unwrap();
    assert_eq!(chains[0]["members"], serde_json::json!(["S9", "S15"]));
}

#[test]
fn ochiai_report_has_no_chains_or_selection() {
    let d = tempfile::tempdir().unwrap();
    trace_golden(d.path());
    let t = d.path().join("t");
    let out = run(&[
        "localize",
        "--spectrum",
        p(&t.join("coverage.json")),
        "--pdg",
        p(&t.join("pdg.json")),
        "--technique",
        "ochiai",
    ]);
    assert!(out.status.success());
    let report: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(report["ranking"]["chains"]
        .as_array()
        .is_none_or(Vec::is_empty));
    assert!(report.get("selection").is_none());
    assert_eq!(report["ranking"]["entries"][0]["statement"], "S6");
}

#[test]
fn full_delta_fraction_selects_every_candidate() {
    let d = tempfile::tempdir().unwrap();
    trace_golden(d.path());
    let t = d.path().join("t");
    let out = run(&[
        "localize",
        "--spectrum",
        p(&t.join("coverage.json")),
        "--pdg",
        p(&t.join("pdg.json")),
        "--delta-fraction",
        "1.0",
    ]);
    let report: Value = serde_json::from_slice(&out.stdout).unwrap();
    let selected = report["selection"]["selected"].as_array().unwrap();
    let candidates = report["selection"]["candidates"].as_array().unwrap();
    assert_eq!(selected.len(), candidates.len());
}

#[test]
fn out_of_range_parameters_are_rejected() {
    let d = tempfile::tempdir().unwrap();
    trace_golden(d.path());
    let t = d.path().join("t");
    for (flag, v) in [
        ("--delta-fraction", "0"),
        ("--ridge", "-1"),
        ("--chain-cap", "0"),
    ] {
        let out = run(&[
            "localize",
            "--spectrum",
            p(&t.join("coverage.json")),
            "--pdg",
            p(&t.join("pdg.json")),
            flag,
            v,
        ]);
        assert_eq!(out.status.code(), Some(2), "{flag} {v}");
    }
}

#[test]
fn no_failing_tests_exits_with_precondition_code() {
    let d = tempfile::tempdir().unwrap();
    write_golden(d.path(), MOTIVATING_FIXED_SOURCE);
    let out = run(&[
        "trace",
        "--program",
        p(&d.path().join("program.src")),
        "--tests",
        p(&d.path().join("tests.json")),
        "--out",
        p(&d.path().join("t")),
    ]);
    assert!(out.status.success());
    let t = d.path().join("t");
    let out = run(&[
        "localize",
        "--spectrum",
        p(&t.join("slice.json")),
        "--pdg",
        p(&t.join("pdg.json")),
    ]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn golden_only_corpus_matches_embedded_expectations() {
    let d = tempfile::tempdir().unwrap();
    write_corpus(d.path(), &[golden_case().unwrap()]).unwrap();
    let json = d.path().join("e.json");
    let out = run(&["evaluate", "--corpus", p(d.path()), "--json", p(&json)]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("calculator"));
    let e: Value = serde_json::from_str(&fs::read_to_string(&json).unwrap()).unwrap();
    let case = &e["cases"][0];
    assert_eq!(e["cases"].as_array().unwrap().len(), 1);
    assert_eq!(
        case["expectations"]["failures"].as_array().unwrap().len(),
        0
    );
    assert!(case["expectations"]["checked"].as_u64().unwrap() > 40);
    let inference = &case["techniques"][0];
    assert_eq!(inference["technique"], "inference");
    assert_eq!(inference["examined_best"], 1);
}

#[test]
fn malformed_cases_are_skipped_and_all_skipped_fails() {
    let d = tempfile::tempdir().unwrap();
    write_corpus(d.path(), &[golden_case().unwrap()]).unwrap();
    let bad = d.path().join("broken");
    fs::create_dir(&bad).unwrap();
    fs::write(bad.join("program.src"), "print(").unwrap();
    let out = run(&["evaluate", "--corpus", p(d.path())]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("broken"));

    fs::remove_dir_all(d.path().join("calculator")).unwrap();
    let out = run(&["evaluate", "--corpus", p(d.path())]);
    assert_eq!(out.status.code(), Some(2));
}
