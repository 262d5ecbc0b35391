use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::config::RunConfig;
use super::format::{format_pct, format_sig, render_csv, write_file};
use crate::error::{Error, Result};
use crate::portfolio::{
    expected_loss_of, limited_liability_return, plain_return, unexpected_loss_of, worst_case_of,
    CorrelationMatrix, LoanUniverse,
};
use crate::problems::{build_problem, reformulate_ll, ModelKind, ProblemSpec, RiskMeasure};
use crate::solver::oracle::for_each_composition;
use crate::solver::{compare_models, solve, ComparisonReport, ModelOutcome, SolveStatus};

/// Exit code for a successful run.
pub const EXIT_OK: i32 = 0;
/// Exit code for invalid configuration or usage.
pub const EXIT_CONFIG: i32 = 2;
/// Exit code when a requested model has no feasible point.
pub const EXIT_INFEASIBLE: i32 = 3;
/// Exit code for NaN or other internal numeric failure.
pub const EXIT_NUMERIC: i32 = 4;

pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Numeric(_) => EXIT_NUMERIC,
        _ => EXIT_CONFIG,
    }
}

/// What a command printed and wrote.
#[derive(Debug, Clone, PartialEq)]
pub struct CommandOutput {
    pub text: String,
    pub files: Vec<PathBuf>,
    pub infeasible: bool,
}

impl CommandOutput {
    pub fn exit_code(&self) -> i32 {
        if self.infeasible {
            EXIT_INFEASIBLE
        } else {
            EXIT_OK
        }
    }
}

// ---------------------------------------------------------------- solve

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub loan_ids: Vec<String>,
    pub risk_measure: RiskMeasure,
    pub delta: f64,
    pub seed: u64,
    pub starts_used: usize,
    pub best_start_index: usize,
    #[serde(flatten)]
    pub outcome: ModelOutcome,
}

pub fn solve_model(cfg: &RunConfig, kind: ModelKind) -> Result<SolveReport> {
    let universe = Arc::new(cfg.universe()?);
    let spec = ProblemSpec::new(kind, universe.clone(), &cfg.model_params());
    let problem = build_problem(spec)?;
    let result = if kind == ModelKind::P3MaxReturnLl {
        solve(&reformulate_ll(&problem)?, &cfg.solver)?
    } else {
        solve(&problem, &cfg.solver)?
    };
    Ok(SolveReport {
        loan_ids: universe.loans().iter().map(|l| l.id.clone()).collect(),
        risk_measure: cfg.params.risk_measure,
        delta: cfg.params.delta,
        seed: cfg.solver.seed,
        starts_used: result.starts_used,
        best_start_index: result.best_start_index,
        outcome: ModelOutcome::from_solution(&problem.spec, &result),
    })
}

fn allocation_row(weights: &[f64]) -> String {
    weights
        .iter()
        .map(|&w| format_pct(w))
        .collect::<Vec<_>>()
        .join(", ")
}

fn status_label(status: SolveStatus) -> &'static str {
    match status {
        SolveStatus::Converged => "CONVERGED",
        SolveStatus::MaxIter => "MAX_ITER",
        SolveStatus::InfeasibleDetected => "INFEASIBLE_DETECTED",
    }
}

pub fn render_solve(report: &SolveReport) -> String {
    let o = &report.outcome;
    let mut s = String::new();
    let _ = writeln!(s, "model: {} ({})", o.model, o.model.description());
    let _ = writeln!(s, "loans: {}", report.loan_ids.join(", "));
    let _ = writeln!(s, "allocation (%): {}", allocation_row(&o.weights));
    let _ = writeln!(s, "k: {:.6}", o.capital);
    let _ = writeln!(s, "objective: {}", format_sig(o.objective));
    let _ = writeln!(s, "EL: {}", format_sig(o.expected_loss));
    let _ = writeln!(s, "UL: {}", format_sig(o.unexpected_loss));
    let _ = writeln!(s, "return (plain): {}", format_sig(o.return_plain));
    let _ = writeln!(
        s,
        "return (limited liability): {}",
        format_sig(o.return_limited_liability)
    );
    let _ = writeln!(s, "feasibility residual: {:.3e}", o.feasibility_residual);
    let _ = writeln!(s, "status: {}", status_label(o.status));
    s
}

/// Solves one model and writes `solve_<model>.txt` and `solve_<model>.json`.
pub fn cmd_solve(cfg: &RunConfig, kind: ModelKind, out_dir: &Path) -> Result<CommandOutput> {
    let report = solve_model(cfg, kind)?;
    let text = render_solve(&report);
    let json = serde_json::to_string_pretty(&report).map_err(|e| Error::Io(e.to_string()))? + "\n";
    let txt_path = out_dir.join(format!("solve_{kind}.txt"));
    let json_path = out_dir.join(format!("solve_{kind}.json"));
    write_file(&txt_path, &text)?;
    write_file(&json_path, &json)?;
    Ok(CommandOutput {
        text,
        files: vec![txt_path, json_path],
        infeasible: report.outcome.status == SolveStatus::InfeasibleDetected,
    })
}

// ---------------------------------------------------------------- compare

pub fn render_compare(report: &ComparisonReport) -> String {
    let measure = report.risk_measure.label();
    let mut s = String::new();
    let pairs = [
        ("min-risk pair", &report.min_risk),
        ("max-return pair", &report.max_return),
    ];
    for (title, pair) in pairs {
        let Some(pair) = pair else { continue };
        let a = &pair.without_limited_liability;
        let b = &pair.with_limited_liability;
        let _ = writeln!(s, "{title}: {} vs {}", a.model, b.model);
        for o in [a, b] {
            let _ = writeln!(
                s,
                "  {} allocation (%): {}  k: {:.6}  {measure}: {}  status: {}",
                o.model,
                allocation_row(&o.weights),
                o.capital,
                format_sig(o.risk),
                status_label(o.status)
            );
        }
        let _ = writeln!(s, "{measure} decrease: {:.2}%", pair.risk_decrease_pct);
    }
    s
}

/// Runs whichever model pairs the configured bounds enable and writes
/// `compare.txt` and `compare.json`.
pub fn cmd_compare(cfg: &RunConfig, out_dir: &Path) -> Result<CommandOutput> {
    let universe = Arc::new(cfg.universe()?);
    let report = compare_models(universe, &cfg.model_params(), &cfg.solver)?;
    let text = render_compare(&report);
    let json = serde_json::to_string_pretty(&report).map_err(|e| Error::Io(e.to_string()))? + "\n";
    let txt_path = out_dir.join("compare.txt");
    let json_path = out_dir.join("compare.json");
    write_file(&txt_path, &text)?;
    write_file(&json_path, &json)?;
    Ok(CommandOutput {
        text,
        files: vec![txt_path, json_path],
        infeasible: report.any_infeasible(),
    })
}

// ---------------------------------------------------------------- surface

fn check_step(step: f64) -> Result<usize> {
    if !(step > 0.0 && step < 1.0) {
        return Err(Error::Config(format!(
            "step must lie in (0, 1), got {step}"
        )));
    }
    Ok((1.0 / step + 1e-9).floor() as usize)
}

fn require_three(universe: &LoanUniverse, what: &str) -> Result<()> {
    if universe.len() != 3 {
        return Err(Error::Config(format!(
            "{what} needs exactly three loans, got {}",
            universe.len()
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfacePoint {
    /// Weight in the second loan.
    pub x: f64,
    /// Weight in the third loan.
    pub y: f64,
    pub value: f64,
}

/// Risk over the triangle x + y ≤ 1; the first loan takes the remainder.
pub fn surface_points(
    universe: &LoanUniverse,
    measure: RiskMeasure,
    step: f64,
) -> Result<Vec<SurfacePoint>> {
    require_three(universe, "the risk surface")?;
    let n = check_step(step)?;
    let corr = CorrelationMatrix::identity(3);
    let mut out = Vec::with_capacity((n + 1) * (n + 2) / 2);
    for i in 0..=n {
        let x = i as f64 * step;
        for j in 0..=n {
            let y = j as f64 * step;
            if x + y > 1.0 + 1e-12 {
                break;
            }
            let w = [(1.0 - x - y).max(0.0), x, y];
            let value = match measure {
                RiskMeasure::ExpectedLoss => expected_loss_of(universe, &w),
                RiskMeasure::UnexpectedLoss => unexpected_loss_of(universe, &w, &corr)?,
            };
            out.push(SurfacePoint { x, y, value });
        }
    }
    Ok(out)
}

pub fn surface_csv(points: &[SurfacePoint]) -> Result<String> {
    let header = ["x", "y", "value"].map(String::from);
    let rows: Vec<_> = points
        .iter()
        .map(|p| vec![format_sig(p.x), format_sig(p.y), format_sig(p.value)])
        .collect();
    render_csv(&header, &rows)
}

/// Writes `surface_<measure>.csv`.
pub fn cmd_surface(
    cfg: &RunConfig,
    measure: RiskMeasure,
    step: f64,
    out_dir: &Path,
) -> Result<CommandOutput> {
    let points = surface_points(&cfg.universe()?, measure, step)?;
    let path = out_dir.join(format!("surface_{}.csv", measure.label()));
    write_file(&path, &surface_csv(&points)?)?;
    Ok(CommandOutput {
        text: format!("{} rows -> {}\n", points.len(), path.display()),
        files: vec![path],
        infeasible: false,
    })
}

// ---------------------------------------------------------------- profiles

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SliceAxis {
    /// Fixes the weight in the second loan; the third varies.
    X,
    /// Fixes the weight in the third loan; the second varies.
    Y,
}

/// A line through the weight triangle with one risky weight held fixed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Slice {
    pub axis: SliceAxis,
    pub value: f64,
}

impl Slice {
    pub fn new(axis: SliceAxis, value: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&value) {
            return Err(Error::Config(format!(
                "slice weight {value} lies outside the simplex"
            )));
        }
        Ok(Self { axis, value })
    }

    /// x = 0, x = 0.05, y = 0 and y = 0.1.
    pub fn defaults() -> Vec<Self> {
        vec![
            Self {
                axis: SliceAxis::X,
                value: 0.0,
            },
            Self {
                axis: SliceAxis::X,
                value: 0.05,
            },
            Self {
                axis: SliceAxis::Y,
                value: 0.0,
            },
            Self {
                axis: SliceAxis::Y,
                value: 0.1,
            },
        ]
    }

    pub fn label(&self) -> String {
        let axis = match self.axis {
            SliceAxis::X => "x",
            SliceAxis::Y => "y",
        };
        format!("{axis}_{}", format_sig(self.value))
    }

    fn weights(&self, free: f64) -> [f64; 3] {
        let (x, y) = match self.axis {
            SliceAxis::X => (self.value, free),
            SliceAxis::Y => (free, self.value),
        };
        [(1.0 - x - y).max(0.0), x, y]
    }
}

impl FromStr for Slice {
    type Err = Error;

    /// Parses `x=0.05` or `y=0.1`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Config(format!("slice '{s}' is not of the form x=<w> or y=<w>"));
        let (axis, value) = s.split_once('=').ok_or_else(bad)?;
        let axis = match axis.trim() {
            "x" | "X" => SliceAxis::X,
            "y" | "Y" => SliceAxis::Y,
            _ => return Err(bad()),
        };
        let value: f64 = value.trim().parse().map_err(|_| bad())?;
        Self::new(axis, value)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileRow {
    pub free_weight: f64,
    pub return_plain: f64,
    pub return_ll: f64,
    pub gap: f64,
}

/// Both return functionals along a slice at capital `k`.
pub fn profile_rows(
    universe: &LoanUniverse,
    delta: f64,
    k: f64,
    slice: Slice,
    step: f64,
) -> Result<Vec<ProfileRow>> {
    require_three(universe, "return profiles")?;
    let n = check_step(step)?;
    if !(0.0..=1.0).contains(&k) {
        return Err(Error::Config(format!("k must lie in [0, 1], got {k}")));
    }
    let mut rows = Vec::new();
    for i in 0..=n {
        let free = i as f64 * step;
        if free + slice.value > 1.0 + 1e-12 {
            break;
        }
        let w = slice.weights(free);
        let return_plain = plain_return(universe, &w, k, delta);
        let return_ll = limited_liability_return(universe, &w, k, delta);
        rows.push(ProfileRow {
            free_weight: free,
            return_plain,
            return_ll,
            gap: return_ll - return_plain,
        });
    }
    Ok(rows)
}

pub fn profile_csv(rows: &[ProfileRow]) -> Result<String> {
    let header = ["free_weight", "return_plain", "return_ll", "gap"].map(String::from);
    let rows: Vec<_> = rows
        .iter()
        .map(|r| {
            vec![
                format_sig(r.free_weight),
                format_sig(r.return_plain),
                format_sig(r.return_ll),
                format_sig(r.gap),
            ]
        })
        .collect();
    render_csv(&header, &rows)
}

/// Writes one `profile_<axis>_<w>.csv` per slice.
pub fn cmd_profiles(
    cfg: &RunConfig,
    k: f64,
    slices: &[Slice],
    step: f64,
    out_dir: &Path,
) -> Result<CommandOutput> {
    let universe = cfg.universe()?;
    let slices = if slices.is_empty() {
        Slice::defaults()
    } else {
        slices.to_vec()
    };
    let mut text = String::new();
    let mut files = Vec::new();
    for slice in slices {
        let rows = profile_rows(&universe, cfg.params.delta, k, slice, step)?;
        let path = out_dir.join(format!("profile_{}.csv", slice.label()));
        write_file(&path, &profile_csv(&rows)?)?;
        let max_gap = rows.iter().map(|r| r.gap).fold(0.0, f64::max);
        let _ = writeln!(
            text,
            "{}: {} rows, max gap {} -> {}",
            slice.label(),
            rows.len(),
            format_sig(max_gap),
            path.display()
        );
        files.push(path);
    }
    Ok(CommandOutput {
        text,
        files,
        infeasible: false,
    })
}

// ---------------------------------------------------------------- survival

/// Largest universe for which survival also scans interior grid portfolios.
const SURVIVAL_GRID_MAX_LOANS: usize = 4;

/// Rounding slack when deciding survival; a net value of exactly zero meets
/// the liabilities.
pub const SURVIVAL_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurvivalRow {
    pub k: f64,
    pub survives: bool,
    /// Lowest net value over every scenario and scanned portfolio.
    pub worst_net_value: f64,
    pub worst_weights: Vec<f64>,
    /// Worst-case net value of each single-loan portfolio, in universe order.
    pub single_loan_net_values: Vec<f64>,
}

/// For each `k`, the worst-case net value over all single-loan portfolios
/// and, for up to four loans, a weight grid at `step`.
pub fn survival_table(
    universe: &LoanUniverse,
    k_values: &[f64],
    step: f64,
) -> Result<Vec<SurvivalRow>> {
    if k_values.is_empty() {
        return Err(Error::Config("k-values must not be empty".into()));
    }
    let n = universe.len();
    let grid = check_step(step)?;
    let mut portfolios: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let mut w = vec![0.0; n];
            w[i] = 1.0;
            w
        })
        .collect();
    if n <= SURVIVAL_GRID_MAX_LOANS {
        for_each_composition(n, grid, &mut |c| {
            portfolios.push(c.iter().map(|&c| c as f64 / grid as f64).collect());
        });
    }
    k_values
        .iter()
        .map(|&k| {
            if !(0.0..=1.0).contains(&k) {
                return Err(Error::Config(format!("k must lie in [0, 1], got {k}")));
            }
            let values: Vec<f64> = portfolios
                .iter()
                .map(|w| worst_case_of(universe, w, k))
                .collect();
            let (at, worst) =
                values
                    .iter()
                    .copied()
                    .enumerate()
                    .fold(
                        (0, f64::INFINITY),
                        |acc, (i, v)| if v < acc.1 { (i, v) } else { acc },
                    );
            Ok(SurvivalRow {
                k,
                survives: worst >= -SURVIVAL_TOL,
                worst_net_value: worst,
                worst_weights: portfolios[at].clone(),
                single_loan_net_values: values[..n].to_vec(),
            })
        })
        .collect()
}

pub fn survival_csv(universe: &LoanUniverse, rows: &[SurvivalRow]) -> Result<String> {
    let mut header: Vec<String> = ["k", "survives", "worst_net_value"]
        .map(String::from)
        .into();
    header.extend(universe.loans().iter().map(|l| format!("w_{}", l.id)));
    header.extend(universe.loans().iter().map(|l| format!("net_{}", l.id)));
    let rows: Vec<_> = rows
        .iter()
        .map(|r| {
            let mut row = vec![
                format_sig(r.k),
                r.survives.to_string(),
                format_sig(r.worst_net_value),
            ];
            row.extend(r.worst_weights.iter().map(|&w| format_sig(w)));
            row.extend(r.single_loan_net_values.iter().map(|&v| format_sig(v)));
            row
        })
        .collect();
    render_csv(&header, &rows)
}

/// Default leverage levels for the survival sweep.
pub const DEFAULT_SURVIVAL_K: [f64; 3] = [0.04, 0.07, 0.10];

/// Writes `survival.csv`.
pub fn cmd_survival(
    cfg: &RunConfig,
    k_values: &[f64],
    step: f64,
    out_dir: &Path,
) -> Result<CommandOutput> {
    let universe = cfg.universe()?;
    let rows = survival_table(&universe, k_values, step)?;
    let mut text = String::new();
    for r in &rows {
        for (loan, &v) in universe.loans().iter().zip(&r.single_loan_net_values) {
            if v < -SURVIVAL_TOL {
                let _ = writeln!(
                    text,
                    "k = {}: all-{} portfolio fails with net value {}",
                    format_sig(r.k),
                    loan.id,
                    format_sig(v)
                );
            }
        }
        if r.survives {
            let _ = writeln!(text, "k = {}: all portfolios survive", format_sig(r.k));
        } else {
            let _ = writeln!(
                text,
                "k = {}: fails, worst net value {} at allocation (%) {}",
                format_sig(r.k),
                format_sig(r.worst_net_value),
                allocation_row(&r.worst_weights)
            );
        }
    }
    let path = out_dir.join("survival.csv");
    write_file(&path, &survival_csv(&universe, &rows)?)?;
    Ok(CommandOutput {
        text,
        files: vec![path],
        infeasible: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table3() -> LoanUniverse {
        LoanUniverse::reference_example()
    }

    #[test]
    fn surface_corners() {
        let u = table3();
        let el = surface_points(&u, RiskMeasure::ExpectedLoss, 0.01).unwrap();
        assert_eq!(el.len(), 101 * 102 / 2);
        let at = |pts: &[SurfacePoint], x: f64, y: f64| {
            pts.iter()
                .find(|p| (p.x - x).abs() < 1e-12 && (p.y - y).abs() < 1e-12)
                .unwrap()
                .value
        };
        assert!((at(&el, 1.0, 0.0) - 0.0061).abs() < 1e-15);
        assert!((at(&el, 0.0, 1.0) - 0.122 * 0.09).abs() < 1e-15);
        assert_eq!(at(&el, 0.0, 0.0), 0.0);
        let ul = surface_points(&u, RiskMeasure::UnexpectedLoss, 0.01).unwrap();
        assert_eq!(at(&ul, 0.0, 0.0), 0.0);
        let oracle = 0.09 * (0.122f64 * 0.878).sqrt();
        assert!((at(&ul, 0.0, 1.0) - oracle).abs() < 1e-15);
    }

    #[test]
    fn step_outside_unit_interval_is_rejected() {
        let u = table3();
        for step in [0.0, 1.0, -0.1, f64::NAN] {
            assert!(matches!(
                surface_points(&u, RiskMeasure::ExpectedLoss, step),
                Err(Error::Config(_))
            ));
        }
    }

    #[test]
    fn slice_parsing() {
        assert_eq!(
            "x=0.05".parse::<Slice>().unwrap(),
            Slice {
                axis: SliceAxis::X,
                value: 0.05
            }
        );
        assert_eq!(" Y = 0.1".parse::<Slice>().unwrap().axis, SliceAxis::Y);
        assert!("z=0.1".parse::<Slice>().is_err());
        assert!("x=1.5".parse::<Slice>().is_err());
        assert!("x".parse::<Slice>().is_err());
    }

    #[test]
    fn profile_gap_vanishes_at_high_capital() {
        let u = table3();
        for slice in Slice::defaults() {
            for r in profile_rows(&u, 1.04, 0.10, slice, 0.01).unwrap() {
                assert!(r.gap.abs() <= 1e-12, "{slice:?} {r:?}");
            }
        }
    }

    #[test]
    fn profile_gap_on_full_more_risky_loan() {
        let u = table3();
        let rows = profile_rows(
            &u,
            1.04,
            0.04,
            Slice {
                axis: SliceAxis::X,
                value: 0.0,
            },
            0.01,
        )
        .unwrap();
        let last = rows.last().unwrap();
        assert_eq!(last.free_weight, 1.0);
        assert!((last.gap - 0.122 * 0.05).abs() < 1e-12);
        assert!(rows[0].gap.abs() < 1e-15);
    }

    #[test]
    fn survival_matches_hand_values() {
        let u = table3();
        let rows = survival_table(&u, &DEFAULT_SURVIVAL_K, 0.05).unwrap();
        // value on default is (1 - lgd) - (1 - k)
        assert!(!rows[0].survives);
        assert!((rows[0].single_loan_net_values[2] + 0.05).abs() < 1e-12);
        assert!((rows[0].single_loan_net_values[1] + 0.06).abs() < 1e-12);
        assert!((rows[0].worst_net_value + 0.06).abs() < 1e-12);
        assert_eq!(rows[0].worst_weights, vec![0.0, 1.0, 0.0]);
        assert!(!rows[1].survives);
        assert!((rows[1].single_loan_net_values[2] + 0.02).abs() < 1e-12);
        assert!(rows[2].survives);
        assert!(rows[2]
            .single_loan_net_values
            .iter()
            .all(|&v| v >= -SURVIVAL_TOL));
        assert!(matches!(
            survival_table(&u, &[], 0.05),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn exit_codes() {
        assert_eq!(exit_code(&Error::Numeric("nan".into())), EXIT_NUMERIC);
        assert_eq!(exit_code(&Error::Config("x".into())), EXIT_CONFIG);
    }
}
