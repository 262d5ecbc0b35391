//! Which capital levels let every portfolio meet its liabilities.
//!
//! Run with `cargo run --example survival`.

use loanopt::report::{survival_table, RunConfig, DEFAULT_SURVIVAL_K};

fn main() -> loanopt::Result<()> {
    let cfg = RunConfig::table3();
    let universe = cfg.universe()?;
    let ids: Vec<&str> = universe.loans().iter().map(|l| l.id.as_str()).collect();
    for row in survival_table(&universe, &DEFAULT_SURVIVAL_K, 0.05)? {
        let singles: Vec<String> = ids
            .iter()
            .zip(&row.single_loan_net_values)
            .map(|(id, v)| format!("{id} {v:+.4}"))
            .collect();
        println!(
            "k = {:.2}: {}  worst {:+.4}  [{}]",
            row.k,
            if row.survives { "survives" } else { "fails   " },
            row.worst_net_value,
            singles.join(", ")
        );
    }
    Ok(())
}
