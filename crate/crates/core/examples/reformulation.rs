//! Direct nonsmooth limited-liability maximization against its smooth
//! complementarity rewrite.
//!
//! Run with `cargo run --release --example reformulation`.

use std::sync::Arc;

use loanopt::portfolio::{limited_liability_return, realizations};
use loanopt::problems::{build_problem, reformulate_ll, ModelKind, ProblemSpec};
use loanopt::report::RunConfig;
use loanopt::solver::{solve, SolverOptions};

fn main() -> loanopt::Result<()> {
    let cfg = RunConfig::table3();
    let universe = Arc::new(cfg.universe()?);
    let params = cfg.model_params();
    let base = build_problem(ProblemSpec::new(
        ModelKind::P3MaxReturnLl,
        universe.clone(),
        &params,
    ))?;
    let smooth = reformulate_ll(&base)?;
    println!(
        "{} variables, {} auxiliary, {} equality rows",
        smooth.smooth.n_vars(),
        smooth.aux_count(),
        smooth.smooth.eq_constraints.len()
    );

    let opts = SolverOptions::default();
    let direct = solve(&base, &opts)?;
    let rewritten = solve(&smooth, &opts)?;
    println!(
        "direct     x = {:.4?} k = {:.4} obj = {:.8}",
        direct.x_star, direct.k_star, direct.objective
    );
    println!(
        "reformed   x = {:.4?} k = {:.4} obj = {:.8}",
        rewritten.x_star, rewritten.k_star, rewritten.objective
    );

    // the aux block is max(R_s, 0) at the optimum
    let r = realizations(&universe, &rewritten.x_star, rewritten.k_star);
    let worst = rewritten
        .aux
        .iter()
        .zip(&r)
        .map(|(a, r)| (a - r.max(0.0)).abs())
        .fold(0.0, f64::max);
    println!("max |a_s - max(R_s, 0)| = {worst:.2e}");
    let ll = limited_liability_return(&universe, &rewritten.x_star, rewritten.k_star, params.delta);
    println!("objective check: {:.2e}", (ll - rewritten.objective).abs());
    Ok(())
}
