//! Black-box CLI tests: exit codes, schemas, determinism, file emission.

use std::process::{Command, Output};

fn lab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lps-lab"))
        .args(args)
        .output()
        .expect("spawn lps-lab")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

#[test]
fn approx_error_prints_golden_value() {
    let out = lab(&["approx", "--degree", "2", "--emit", "error"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let value: f64 = text
        .lines()
        .find(|l| !l.starts_with('#'))
        .unwrap()
        .split(',')
        .nth(1)
        .unwrap()
        .parse()
        .unwrap();
    assert!((value - 1.0 / 384f64.sqrt()).abs() < 1e-12);
}

#[test]
fn init_emits_one_row_per_parameter() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("params.csv");
    let out = lab(&[
        "init",
        "--widths",
        "1,2,2,1",
        "--scheme",
        "lps",
        "--reinit",
        "2",
        "--emit",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(&path).unwrap();
    // (1+1)*2 + (2+1)*2 + (2+1)*1 entries including biases.
    assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), 13);
}

#[test]
fn train_reports_one_run_row() {
    let out = lab(&["train", "--function", "f1", "--steps", "20", "--seed", "5"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.starts_with("# schema=seed,init,reinit,final_loss,collapsed"));
    let row = text.lines().nth(1).unwrap();
    assert!(row.starts_with("5,he,0,"));
}

#[test]
fn deadness_row_matches_request() {
    let out = lab(&[
        "deadness",
        "--widths",
        "1,2,2,1",
        "--scheme",
        "lps",
        "--reinit",
        "1",
        "--trials",
        "40",
    ]);
    assert!(out.status.success());
    let row = stdout(&out).lines().nth(1).unwrap().to_string();
    assert!(row.starts_with("1x2x2x1,lps,1,40,"));
}

#[test]
fn bounds_p_zero_matches_closed_form() {
    let out = lab(&[
        "bounds",
        "--mode",
        "one",
        "--widths",
        "1,2,2,2,2,2,2,2,2,2,1",
        "--p",
        "0",
    ]);
    assert!(out.status.success());
    let v: f64 = stdout(&out).trim().parse().unwrap();
    assert!((v - (1.0 - 0.75f64.powi(9))).abs() < 1e-12);
}

#[test]
fn homotopy_solves_a_system_file() {
    let dir = tempfile::tempdir().unwrap();
    let sys_path = dir.path().join("sys.txt");
    let out_path = dir.path().join("solutions.csv");
    std::fs::write(&sys_path, "# circle-line pair\nx1^2 + x2^2 - 2\nx1 - x2\n").unwrap();
    let out = lab(&[
        "homotopy",
        "--system",
        "file",
        "--system-file",
        sys_path.to_str().unwrap(),
        "--emit",
        out_path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(&out_path).unwrap();
    let rows: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows.len(), 2, "expected the two real intersection points");
    for row in rows {
        let fields: Vec<&str> = row.split(',').collect();
        assert_eq!(fields[1], "1", "solutions of this system are real");
        let re1: f64 = fields[3].parse().unwrap();
        assert!((re1.abs() - 1.0).abs() < 1e-8);
    }
}

#[test]
fn fig1_is_deterministic_without_timestamp() {
    let args = [
        "fig1",
        "--depths",
        "2:3",
        "--trials",
        "30",
        "--no-timestamp",
    ];
    let a = lab(&args);
    let b = lab(&args);
    assert!(a.status.success());
    assert_eq!(stdout(&a), stdout(&b));
    assert_eq!(stdout(&a).lines().filter(|l| !l.starts_with('#')).count(), 4);
}

#[test]
fn table1_summary_line_present() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("table1.csv");
    let out = lab(&[
        "table1",
        "--function",
        "f1",
        "--runs",
        "2",
        "--no-timestamp",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.contains("# summary runs=2 "));
}

#[test]
fn validation_errors_exit_2() {
    for args in [
        vec!["init", "--widths", "1,0,1"],
        vec!["deadness", "--widths", "1,2,1", "--scheme", "nope"],
        vec!["bounds", "--mode", "weird", "--widths", "1,2,1"],
        vec!["deadness", "--widths", "1,2,1", "--scheme", "he", "--reinit", "3"],
        vec!["homotopy", "--system", "unknown"],
    ] {
        let out = lab(&args);
        assert_eq!(out.status.code(), Some(2), "args {args:?}");
    }
}
