//! End-to-end runs of the `loanopt` binary: exit codes, printed text and
//! written files.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use loanopt::report::{EXIT_CONFIG, EXIT_INFEASIBLE, EXIT_OK};
use tempfile::TempDir;

fn table3() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data/table3.json")
}

fn run(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_loanopt"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write_config(dir: &Path, json: &str) -> PathBuf {
    let p = dir.join("config.json");
    std::fs::write(&p, json).unwrap();
    p
}

#[test]
fn solve_writes_text_and_json() {
    let dir = TempDir::new().unwrap();
    let cfg = table3();
    let o = run(
        &["solve", cfg.to_str().unwrap(), "--model", "P4"],
        dir.path(),
    );
    assert_eq!(code(&o), EXIT_OK, "{}", stderr(&o));
    let text = stdout(&o);
    assert!(
        text.contains("allocation (%): 12.75, 0.00, 87.25"),
        "{text}"
    );
    assert!(text.contains("status: CONVERGED"));
    let saved = std::fs::read_to_string(dir.path().join("solve_P4.txt")).unwrap();
    assert_eq!(saved, text);
    assert!(dir.path().join("solve_P4.json").is_file());
}

#[test]
fn missing_model_flag_is_a_usage_error() {
    let dir = TempDir::new().unwrap();
    let cfg = table3();
    let o = run(&["solve", cfg.to_str().unwrap()], dir.path());
    assert_eq!(code(&o), EXIT_CONFIG);
    assert!(stderr(&o).contains("--model"));
}

#[test]
fn unknown_model_is_a_usage_error() {
    let dir = TempDir::new().unwrap();
    let cfg = table3();
    let o = run(
        &["solve", cfg.to_str().unwrap(), "--model", "P5"],
        dir.path(),
    );
    assert_eq!(code(&o), EXIT_CONFIG);
}

#[test]
fn missing_config_file_exits_2() {
    let dir = TempDir::new().unwrap();
    let o = run(
        &["compare", dir.path().join("nope.json").to_str().unwrap()],
        dir.path(),
    );
    assert_eq!(code(&o), EXIT_CONFIG);
    assert!(stderr(&o).starts_with("error:"));
}

#[test]
fn invalid_field_is_named() {
    let dir = TempDir::new().unwrap();
    let json = loanopt::report::TABLE3_JSON.replace(
        "\"pd\": 0.061, \"lgd\": 0.10",
        "\"pd\": 0.061, \"lgd\": 1.7",
    );
    assert_ne!(json, loanopt::report::TABLE3_JSON, "fixture must change");
    let cfg = write_config(dir.path(), &json);
    let o = run(
        &["solve", cfg.to_str().unwrap(), "--model", "P2"],
        dir.path(),
    );
    assert_eq!(code(&o), EXIT_CONFIG);
    let err = stderr(&o);
    assert!(err.contains("less_risky") && err.contains("lgd"), "{err}");
}

#[test]
fn zero_risk_cap_on_risky_loans_is_infeasible() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{
          "universe": [
            {"id": "a", "rate": 0.09, "pd": 0.061, "lgd": 0.10},
            {"id": "b", "rate": 0.132, "pd": 0.122, "lgd": 0.09}
          ],
          "params": {"delta": 1.04, "k_lev": 0.04, "rho_asset": 0.15, "confidence": 0.999,
                     "theta": 0.0, "risk_measure": "EL"}
        }"#,
    );
    let o = run(
        &["solve", cfg.to_str().unwrap(), "--model", "P3"],
        dir.path(),
    );
    assert_eq!(code(&o), EXIT_INFEASIBLE, "{}", stdout(&o));
    assert!(stdout(&o).contains("INFEASIBLE_DETECTED"));
}

#[test]
fn compare_needs_a_bound() {
    let dir = TempDir::new().unwrap();
    let json = loanopt::report::TABLE3_JSON
        .replace("\"mu\": 0.098,", "")
        .replace("\"theta\": 0.012,", "");
    let cfg = write_config(dir.path(), &json);
    let o = run(&["compare", cfg.to_str().unwrap()], dir.path());
    assert_eq!(code(&o), EXIT_CONFIG, "{}", stdout(&o));
}

#[test]
fn compare_prints_decreases() {
    let dir = TempDir::new().unwrap();
    let cfg = table3();
    let o = run(&["compare", cfg.to_str().unwrap()], dir.path());
    assert_eq!(code(&o), EXIT_OK);
    let lines: Vec<String> = stdout(&o)
        .lines()
        .filter(|l| l.starts_with("EL decrease"))
        .map(String::from)
        .collect();
    assert_eq!(lines, ["EL decrease: 4.21%", "EL decrease: 0.00%"]);
    assert!(dir.path().join("compare.json").is_file());
}

#[test]
fn single_loan_compare_reports_no_decrease() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{
          "universe": [{"id": "only", "rate": 0.09, "pd": 0.061, "lgd": 0.10}],
          "params": {"delta": 1.04, "k_lev": 0.04, "rho_asset": 0.15, "confidence": 0.999,
                     "mu": 0.0, "theta": 0.5, "risk_measure": "EL"}
        }"#,
    );
    let o = run(&["compare", cfg.to_str().unwrap()], dir.path());
    assert_eq!(code(&o), EXIT_OK, "{}", stderr(&o));
    let text = stdout(&o);
    assert_eq!(text.matches("EL decrease: 0.00%").count(), 2, "{text}");
}

#[test]
fn surface_rejects_bad_step() {
    let dir = TempDir::new().unwrap();
    let cfg = table3();
    let o = run(
        &["surface", cfg.to_str().unwrap(), "--step", "1.5"],
        dir.path(),
    );
    assert_eq!(code(&o), EXIT_CONFIG);
    let o = run(
        &[
            "surface",
            cfg.to_str().unwrap(),
            "--step",
            "0.25",
            "--measure",
            "UL",
        ],
        dir.path(),
    );
    assert_eq!(code(&o), EXIT_OK);
    let csv = std::fs::read_to_string(dir.path().join("surface_UL.csv")).unwrap();
    // 5 + 4 + 3 + 2 + 1 lattice points plus the header
    assert_eq!(csv.lines().count(), 16);
    assert_eq!(csv.lines().next(), Some("x,y,value"));
}

#[test]
fn profiles_write_one_file_per_slice() {
    let dir = TempDir::new().unwrap();
    let cfg = table3();
    let o = run(
        &[
            "profiles",
            cfg.to_str().unwrap(),
            "--k",
            "0.07",
            "--slice",
            "x=0.05",
            "--slice",
            "y=0",
            "--step",
            "0.1",
        ],
        dir.path(),
    );
    assert_eq!(code(&o), EXIT_OK, "{}", stderr(&o));
    assert!(dir.path().join("profile_x_0.05.csv").is_file());
    assert!(dir.path().join("profile_y_0.csv").is_file());
    let o = run(
        &["profiles", cfg.to_str().unwrap(), "--slice", "z=0.1"],
        dir.path(),
    );
    assert_eq!(code(&o), EXIT_CONFIG);
}

#[test]
fn survival_default_levels() {
    let dir = TempDir::new().unwrap();
    let cfg = table3();
    let o = run(
        &["survival", cfg.to_str().unwrap(), "--step", "0.05"],
        dir.path(),
    );
    assert_eq!(code(&o), EXIT_OK, "{}", stderr(&o));
    let csv = std::fs::read_to_string(dir.path().join("survival.csv")).unwrap();
    let survives: Vec<&str> = csv
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(1).unwrap())
        .collect();
    assert_eq!(survives, ["false", "false", "true"]);
    let o = run(
        &["survival", cfg.to_str().unwrap(), "--k-values", "0.1,abc"],
        dir.path(),
    );
    assert_eq!(code(&o), EXIT_CONFIG);
}
