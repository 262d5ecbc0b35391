//! Builds a run configuration from JSON and solves it.
//!
//! Run with `cargo run --release --example custom_config`.

use loanopt::problems::ModelKind;
use loanopt::report::{render_solve, solve_model, RunConfig};

const CONFIG: &str = r#"{
  "universe": [
    {"id": "gov", "rate": 0.025, "pd": 0.0, "lgd": 0.0},
    {"id": "sme", "rate": 0.080, "pd": 0.030, "lgd": 0.45},
    {"id": "retail", "rate": 0.110, "pd": 0.060, "lgd": 0.35},
    {"id": "corp", "rate": 0.060, "pd": 0.010, "lgd": 0.40}
  ],
  "params": {
    "delta": 1.05, "k_lev": 0.03, "rho_asset": 0.12, "confidence": 0.999,
    "mu": 0.07, "risk_measure": "UL"
  },
  "solver": {"n_starts": 16, "seed": 7}
}"#;

fn main() -> loanopt::Result<()> {
    let cfg = RunConfig::from_json(CONFIG)?;
    for kind in [ModelKind::P2MinRisk, ModelKind::P4MinRiskLl] {
        print!("{}", render_solve(&solve_model(&cfg, kind)?));
        println!();
    }
    // unknown keys are rejected
    let err = RunConfig::from_json(&CONFIG.replace("\"seed\"", "\"sead\"")).unwrap_err();
    println!("typo -> {err}");
    Ok(())
}
