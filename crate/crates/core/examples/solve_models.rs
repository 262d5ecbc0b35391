//! Solves all four models on the bundled three-loan example.
//!
//! Run with `cargo run --release --example solve_models`.

use loanopt::problems::ModelKind;
use loanopt::report::{solve_model, RunConfig};

fn main() -> loanopt::Result<()> {
    let cfg = RunConfig::table3();
    for kind in [
        ModelKind::P1MaxReturn,
        ModelKind::P2MinRisk,
        ModelKind::P3MaxReturnLl,
        ModelKind::P4MinRiskLl,
    ] {
        let r = solve_model(&cfg, kind)?;
        let o = &r.outcome;
        let w: Vec<String> = o
            .weights
            .iter()
            .map(|v| format!("{:6.2}%", 100.0 * v))
            .collect();
        println!(
            "{} {:<48} x = [{}] k = {:.4} EL = {:.6} obj = {:.6} {:?}",
            kind.label(),
            kind.description(),
            w.join(", "),
            o.capital,
            o.expected_loss,
            o.objective,
            o.status
        );
    }
    Ok(())
}
