//! IRB capital requirement per loan, plus the normal quantile it rests on.
//!
//! Run with `cargo run --example irb_capital`.

use loanopt::numerics::{irb_capital, std_normal_cdf, std_normal_quantile, IrbParams};
use loanopt::report::RunConfig;

fn main() -> loanopt::Result<()> {
    let irb = IrbParams::new(0.15, 0.999)?;
    let z = std_normal_quantile(irb.confidence_level)?;
    println!(
        "quantile({}) = {z:.10}, cdf back = {:.12}",
        irb.confidence_level,
        std_normal_cdf(z)
    );

    let cfg = RunConfig::table3();
    println!("{:<12} {:>7} {:>7} {:>10}", "loan", "pd", "lgd", "capital");
    for loan in cfg.universe()?.loans() {
        let k = irb_capital(loan.pd, loan.lgd, &irb)?;
        println!(
            "{:<12} {:>7.4} {:>7.4} {:>10.6}",
            loan.id, loan.pd, loan.lgd, k
        );
    }

    // capital grows with PD until the correlation term takes over
    for pd in [0.001, 0.01, 0.05, 0.1, 0.19] {
        println!(
            "pd {pd:<6} lgd 0.45 -> K = {:.6}",
            irb_capital(pd, 0.45, &irb)?
        );
    }
    Ok(())
}
