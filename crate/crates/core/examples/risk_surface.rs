//! Expected and unexpected loss over the 3-loan simplex, written as CSV.
//!
//! Run with `cargo run --example risk_surface [out_dir]`.

use std::path::PathBuf;

use loanopt::problems::RiskMeasure;
use loanopt::report::{cmd_surface, surface_points, RunConfig};

fn main() -> loanopt::Result<()> {
    let cfg = RunConfig::table3();
    let universe = cfg.universe()?;

    for measure in [RiskMeasure::ExpectedLoss, RiskMeasure::UnexpectedLoss] {
        let pts = surface_points(&universe, measure, 0.01)?;
        let corner = |x: f64, y: f64| {
            pts.iter()
                .find(|p| (p.x - x).abs() < 1e-12 && (p.y - y).abs() < 1e-12)
                .map_or(f64::NAN, |p| p.value)
        };
        println!(
            "{}: {} points, corners safe {:.4}, less risky {:.4}, more risky {:.4}",
            measure.label(),
            pts.len(),
            corner(0.0, 0.0),
            corner(1.0, 0.0),
            corner(0.0, 1.0)
        );
    }

    let out = std::env::args().nth(1).map_or_else(
        || std::env::temp_dir().join("loanopt-surface"),
        PathBuf::from,
    );
    let written = cmd_surface(&cfg, RiskMeasure::ExpectedLoss, 0.05, &out)?;
    for f in &written.files {
        println!("wrote {}", f.display());
    }
    Ok(())
}
