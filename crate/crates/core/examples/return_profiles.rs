//! Plain and limited-liability returns along slices of the simplex.
//!
//! Run with `cargo run --example return_profiles`.

use loanopt::report::{profile_rows, RunConfig, Slice};

fn main() -> loanopt::Result<()> {
    let cfg = RunConfig::table3();
    let universe = cfg.universe()?;
    let delta = cfg.params.delta;
    for k in [0.04, 0.10] {
        for slice in Slice::defaults() {
            let rows = profile_rows(&universe, delta, k, slice, 0.05)?;
            let widest = rows
                .iter()
                .max_by(|a, b| a.gap.total_cmp(&b.gap))
                .expect("non-empty slice");
            println!(
                "k = {k:.2} slice {:<7} {} rows, largest gap {:.6} at free weight {:.2}",
                slice.label(),
                rows.len(),
                widest.gap,
                widest.free_weight
            );
        }
    }
    Ok(())
}
