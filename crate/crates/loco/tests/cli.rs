//! End-to-end runs of the `loco` binary on the corpus.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use loco::schema::{validate_report, validate_solution};

fn corpus(name: &str) -> String {
    let path: PathBuf = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../corpus").join(name);
    path.to_str().unwrap().to_string()
}

fn loco(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_loco")).args(args).env("LOCO_COLOR", "0").output().unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

#[test]
fn check_accepts_bin_packing_silently_on_stderr() {
    let out = loco(&["check", &corpus("bin_packing.loco")]);
    assert_eq!(code(&out), 0);
    assert_eq!(stderr(&out), "");
}

#[test]
fn check_reports_unleveled_kinds_with_positions() {
    let out = loco(&["check", &corpus("unleveled.loco")]);
    assert_eq!(code(&out), 1);
    let err = stderr(&out);
    let line = err.lines().find(|l| l.starts_with("ERROR UNLEVELED")).unwrap();
    assert!(line.contains("unleveled.loco:2:11"), "{line}");
}

#[test]
fn missing_file_is_a_usage_error() {
    assert_eq!(code(&loco(&["check", "no/such/file.loco"])), 5);
    assert_eq!(code(&loco(&["solve", "no/such/file.loco"])), 5);
}

#[test]
fn bad_arguments_are_usage_errors() {
    assert_eq!(code(&loco(&["frobnicate"])), 5);
    assert_eq!(code(&loco(&["solve", &corpus("bin_packing.loco"), "--count", "Bin"])), 5);
    assert_eq!(code(&loco(&["solve", &corpus("bin_packing.loco"), "--count", "Bin=3"])), 5);
    assert_eq!(code(&loco(&["solve", &corpus("bin_packing.loco"), "--count", "Crate=3"])), 5);
    assert_eq!(code(&loco(&["--help"])), 0);
}

#[test]
fn bounds_table_and_report() {
    let out = loco(&["bounds", &corpus("bin_packing.loco")]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).lines().any(|l| l == "Bin [10, 40] generated"));

    let out = loco(&["bounds", &corpus("bin_packing.loco"), "--format", "report"]);
    assert_eq!(code(&out), 0);
    let report = validate_report(&stdout(&out)).unwrap();
    let bin = report.bounds.iter().find(|e| e.kind == "Bin").unwrap();
    assert_eq!((bin.lb, bin.ub, bin.class.as_str()), (10, Some(40), "generated"));
}

#[test]
fn conflict_is_rejected_with_a_certificate() {
    let out = loco(&["bounds", &corpus("conflict.loco")]);
    assert_eq!(code(&out), 2);
    assert!(stdout(&out).starts_with("REJECT C2: lb 5 > ub 4"), "{}", stdout(&out));

    let out = loco(&["bounds", &corpus("conflict.loco"), "--format", "report"]);
    assert_eq!(code(&out), 2);
    let cert = validate_report(&stdout(&out)).unwrap().certificate.unwrap();
    assert_eq!((cert.kind.as_str(), cert.lb, cert.ub), ("C2", 5, 4));
    assert!(!cert.provenance.is_empty());
}

#[test]
fn input_only_bounds() {
    let out = loco(&["bounds", &corpus("input_only.loco")]);
    assert_eq!(code(&out), 0);
    assert_eq!(stdout(&out), "Shelf [2, 2] input\nBook [3, 3] input\n");
}

#[test]
fn solve_small_bin_packing() {
    let out = loco(&["solve", &corpus("bin_packing_4a2b.loco"), "--max", "1"]);
    assert_eq!(code(&out), 0);
    let doc = validate_solution(&stdout(&out)).unwrap();
    assert_eq!(doc.configurations.len(), 1);
    let config = &doc.configurations[0];
    assert_eq!(config.instances["Bin"].len(), 1);
    assert_eq!(config.edges["ThingA2Bin"].len(), 4);
    assert_eq!(config.edges["ThingB2Bin"].len(), 2);
}

#[test]
fn solve_exit_statuses() {
    assert_eq!(code(&loco(&["solve", &corpus("bin_packing_41_bins.loco")])), 3);
    assert_eq!(code(&loco(&["solve", &corpus("bin_packing_huge.loco"), "--fuel", "1000"])), 4);
    assert_eq!(code(&loco(&["solve", &corpus("conflict.loco")])), 2);
    assert_eq!(code(&loco(&["solve", &corpus("infinite.loco")])), 1);
}

#[test]
fn solve_writes_to_a_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("out.json");
    let out = loco(&["solve", &corpus("bin_packing.loco"), "--out", path.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    assert_eq!(stdout(&out), "");
    let doc = validate_solution(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(doc.configurations[0].instances["Bin"].len(), 10);

    let blocked = dir.path().join("missing").join("out.json");
    assert_eq!(code(&loco(&["solve", &corpus("bin_packing.loco"), "--out", blocked.to_str().unwrap()])), 5);
}

#[test]
fn solve_with_fixed_counts() {
    let out = loco(&["solve", &corpus("bin_packing.loco"), "--count", "Bin=12"]);
    assert_eq!(code(&out), 0);
    let doc = validate_solution(&stdout(&out)).unwrap();
    assert_eq!(doc.configurations[0].instances["Bin"].len(), 12);
}

#[test]
fn oracle_listings() {
    let out = loco(&["oracle", &corpus("bin_packing_2a.loco"), "--cap", "4"]);
    assert_eq!((code(&out), stdout(&out).as_str()), (0, "Bin: {1,2}\n"));

    let out = loco(&["oracle", &corpus("conflict.loco"), "--cap", "12"]);
    assert_eq!((code(&out), stdout(&out).as_str()), (0, "C2: {}\n"));

    let out = loco(&["oracle", &corpus("input_only.loco")]);
    assert_eq!((code(&out), stdout(&out).as_str()), (0, "(): {()}\n"));

    assert_eq!(code(&loco(&["oracle", &corpus("bin_packing_2a.loco"), "--cap", "13"])), 5);
}

#[test]
fn oracle_warns_when_bounds_exceed_the_cap() {
    let out = loco(&["oracle", &corpus("chain.loco"), "--cap", "3"]);
    assert_eq!(code(&out), 0);
    assert!(stderr(&out).contains("listing is partial"));
}

#[test]
fn colour_follows_the_environment() {
    let run = |value: &str| {
        let out = Command::new(env!("CARGO_BIN_EXE_loco"))
            .args(["check", &corpus("unleveled.loco")])
            .env("LOCO_COLOR", value)
            .output()
            .unwrap();
        stderr(&out)
    };
    assert!(run("1").contains("\x1b["));
    assert!(!run("0").contains("\x1b["));
}
