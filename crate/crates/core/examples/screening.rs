//! Single-loan profitability scores and pairwise preference.
//!
//! Run with `cargo run --example screening`.

use loanopt::portfolio::screen_loans;
use loanopt::report::RunConfig;

fn main() -> loanopt::Result<()> {
    let cfg = RunConfig::table3();
    let universe = cfg.universe()?;
    let report = screen_loans(&universe, cfg.params.delta, cfg.params.k_lev);
    for s in &report.scores {
        println!(
            "{:<12} capital {:.4} score {:+.6}",
            s.id, s.capital, s.score
        );
    }
    for d in &report.dominance {
        let verdict = if d.riskier_preferred {
            "preferred over"
        } else {
            "not preferred over"
        };
        println!("{} {verdict} {}", d.riskier, d.safer);
    }
    if !report.pd_violations.is_empty() {
        println!("inadmissible PD: {:?}", report.pd_violations);
    }
    Ok(())
}
