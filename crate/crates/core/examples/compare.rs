//! Risk with and without limited liability for both model pairs.
//!
//! Run with `cargo run --release --example compare`.

use std::sync::Arc;

use loanopt::report::{render_compare, RunConfig};
use loanopt::solver::compare_models;

fn main() -> loanopt::Result<()> {
    let cfg = RunConfig::table3();
    let universe = Arc::new(cfg.universe()?);
    let report = compare_models(universe, &cfg.model_params(), &cfg.solver)?;
    print!("{}", render_compare(&report));

    // sweep of return floors for the min-risk pair
    for mu in [0.09, 0.095, 0.098, 0.10, 0.102] {
        let mut params = cfg.model_params();
        params.mu = Some(mu);
        params.theta = None;
        let pair = compare_models(Arc::new(cfg.universe()?), &params, &cfg.solver)?
            .min_risk
            .expect("mu is set");
        println!(
            "mu = {mu:.3}: risk {:.6} -> {:.6} ({:.2}%)",
            pair.without_limited_liability.risk,
            pair.with_limited_liability.risk,
            pair.risk_decrease_pct
        );
    }
    Ok(())
}
