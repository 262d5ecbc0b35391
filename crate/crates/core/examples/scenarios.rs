//! Default scenarios, per-scenario realizations and the two expected returns.
//!
//! Run with `cargo run --example scenarios`.

use loanopt::portfolio::{
    expected_return_limited_liability, expected_return_plain, realizations, worst_case_net_value,
    Allocation, LoanUniverse,
};

fn main() -> loanopt::Result<()> {
    let universe = LoanUniverse::reference_example();
    let delta = 1.04;
    let alloc = Allocation::new(vec![0.2, 0.3, 0.5], 0.04)?;

    let table = universe.scenarios();
    let values = realizations(&universe, alloc.weights(), alloc.capital());
    println!(
        "{} risky loans, {} scenarios",
        table.risky_count(),
        table.len()
    );
    for (s, (p, r)) in table.probabilities().iter().zip(&values).enumerate() {
        println!("  defaults {:?}  P = {p:.6}  R = {r:+.6}", table.pattern(s));
    }

    let plain = expected_return_plain(&universe, &alloc, delta)?;
    let ll = expected_return_limited_liability(&universe, &alloc, delta)?;
    println!("plain return            {plain:.6}");
    println!("limited-liability return {ll:.6} (gap {:.6})", ll - plain);
    println!(
        "worst-case net value    {:.6}",
        worst_case_net_value(&universe, &alloc)?
    );
    Ok(())
}
