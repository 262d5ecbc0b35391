//! Exhaustive simplex grid against the multistart solver.
//!
//! Run with `cargo run --release --example grid_oracle`.

use std::sync::Arc;
use std::time::Instant;

use loanopt::problems::{build_problem, reformulate_ll, ModelKind, ProblemSpec};
use loanopt::report::RunConfig;
use loanopt::solver::{grid_oracle, solve, SolverOptions};

fn main() -> loanopt::Result<()> {
    let cfg = RunConfig::table3();
    let universe = Arc::new(cfg.universe()?);
    let params = cfg.model_params();
    let opts = SolverOptions::default();
    for kind in [
        ModelKind::P1MaxReturn,
        ModelKind::P2MinRisk,
        ModelKind::P3MaxReturnLl,
        ModelKind::P4MinRiskLl,
    ] {
        let p = build_problem(ProblemSpec::new(kind, universe.clone(), &params))?;
        let t = Instant::now();
        let grid = grid_oracle(&p, 0.0025)?;
        let grid_time = t.elapsed();
        let t = Instant::now();
        let local = if kind == ModelKind::P3MaxReturnLl {
            solve(&reformulate_ll(&p)?, &opts)?
        } else {
            solve(&p, &opts)?
        };
        println!(
            "{}: grid {:+.8} ({} points, {:.0?})  solve {:+.8} ({:.0?})  gap {:+.2e}",
            kind.label(),
            p.natural_objective(grid.objective),
            grid.starts_used,
            grid_time,
            p.natural_objective(local.objective),
            t.elapsed(),
            local.objective - grid.objective
        );
    }
    Ok(())
}
