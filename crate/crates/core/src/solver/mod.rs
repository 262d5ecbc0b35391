//! Multistart augmented-Lagrangian solver, a grid-search oracle and the
//! with/without limited-liability model comparison.

mod alm;
mod compare;
pub(crate) mod oracle;
mod projection;

pub use compare::{compare_models, ComparisonReport, ModelOutcome, PairReport};
pub use oracle::grid_oracle;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::problems::EvaluatedProblem;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverOptions {
    pub tol_feas: f64,
    pub tol_opt: f64,
    pub max_outer: usize,
    pub max_inner: usize,
    pub penalty_init: f64,
    pub penalty_growth: f64,
    pub penalty_max: f64,
    pub n_starts: usize,
    pub seed: u64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tol_feas: 1e-8,
            tol_opt: 1e-8,
            max_outer: 50,
            max_inner: 500,
            penalty_init: 10.0,
            penalty_growth: 10.0,
            penalty_max: 1e8,
            n_starts: 32,
            seed: 0,
        }
    }
}

impl SolverOptions {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("tol_feas", self.tol_feas),
            ("tol_opt", self.tol_opt),
            ("penalty_init", self.penalty_init),
            ("penalty_max", self.penalty_max),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!(
                    "solver.{name} must be positive, got {v}"
                )));
            }
        }
        if self.penalty_growth.is_nan() || self.penalty_growth <= 1.0 {
            return Err(Error::Config("solver.penalty_growth must exceed 1".into()));
        }
        if self.n_starts == 0 || self.max_outer == 0 || self.max_inner == 0 {
            return Err(Error::Config(
                "solver.n_starts, max_outer and max_inner must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum SolveStatus {
    Converged,
    MaxIter,
    InfeasibleDetected,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolveResult {
    pub x_star: Vec<f64>,
    pub k_star: f64,
    /// Auxiliary scenario variables (reformulated problems only).
    pub aux: Vec<f64>,
    /// Objective in the maximization convention of the problem.
    pub objective: f64,
    pub feasibility_residual: f64,
    pub status: SolveStatus,
    pub starts_used: usize,
    pub best_start_index: usize,
}

impl SolveResult {
    pub fn point(&self) -> Vec<f64> {
        let mut z = self.x_star.clone();
        z.push(self.k_star);
        z.extend_from_slice(&self.aux);
        z
    }
}

/// Residual above which a start's endpoint counts as infeasible rather than
/// merely unconverged.
const NEAR_FEASIBLE: f64 = 1e-6;

struct StartOutcome {
    z: Vec<f64>,
    objective: f64,
    violation: f64,
    converged: bool,
}

fn multistart_points(problem: &EvaluatedProblem, opts: &SolverOptions) -> Vec<Vec<f64>> {
    let n = problem.n_weights();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut weights: Vec<Vec<f64>> = (0..n.min(opts.n_starts))
        .map(|i| {
            let mut v = vec![0.0; n];
            v[i] = 1.0;
            v
        })
        .collect();
    while weights.len() < opts.n_starts {
        // Dirichlet(1, ..., 1) via normalized exponentials.
        let e: Vec<f64> = (0..n).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
        let total: f64 = e.iter().sum();
        weights.push(e.into_iter().map(|v| v / total).collect());
    }
    weights
        .into_iter()
        .map(|x| {
            let k = problem.spec.capital_floor(&x);
            problem.point(&x, k)
        })
        .collect()
}

/// Lowers (or raises) `k` onto max(k_lev, K(x)) when that does not hurt.
///
/// Both return functionals strictly decrease in `k` when δ > 1, so moving
/// down to the floor keeps return floors satisfied and improves return
/// objectives; moving up only happens to repair a violated capital bound.
fn polish(problem: &EvaluatedProblem, z: &mut Vec<f64>) {
    problem.close_aux(z);
    let n = problem.n_weights();
    let (lo, hi) = problem.bounds[n];
    let floor = problem.spec.capital_floor(&z[..n]).clamp(lo, hi);
    if floor == z[n] {
        return;
    }
    let mut candidate = z.clone();
    candidate[n] = floor;
    problem.close_aux(&mut candidate);
    let (v0, v1) = (problem.max_violation(z), problem.max_violation(&candidate));
    let (f0, f1) = (
        problem.objective.eval(z),
        problem.objective.eval(&candidate),
    );
    let accept = if floor < z[n] {
        v1 <= v0.max(0.0) && f1 >= f0 - 1e-15 * (1.0 + f0.abs())
    } else {
        v1 < v0
    };
    if accept {
        *z = candidate;
    }
}

fn run_start(problem: &EvaluatedProblem, start: Vec<f64>, opts: &SolverOptions) -> StartOutcome {
    let local = alm::solve_local(problem, start, opts);
    let mut z = local.z;
    polish(problem, &mut z);
    StartOutcome {
        objective: problem.objective.eval(&z),
        violation: problem.max_violation(&z),
        converged: local.converged,
        z,
    }
}

/// Picks the best start: feasible points by objective (ties within 1e-12 go
/// to the lower index), otherwise the least infeasible.
fn select(outcomes: &[StartOutcome], tol_feas: f64) -> usize {
    let feasible: Vec<usize> = (0..outcomes.len())
        .filter(|&i| outcomes[i].violation <= tol_feas)
        .collect();
    if feasible.is_empty() {
        return (0..outcomes.len())
            .min_by(|&a, &b| {
                outcomes[a]
                    .violation
                    .total_cmp(&outcomes[b].violation)
                    .then(a.cmp(&b))
            })
            .expect("at least one start");
    }
    let mut best = feasible[0];
    for &i in &feasible[1..] {
        if outcomes[i].objective > outcomes[best].objective + 1e-12 {
            best = i;
        }
    }
    best
}

/// Solves a problem (base or reformulated) from `opts.n_starts` starting
/// points: the simplex vertices first, then Dirichlet-sampled weights.
/// Deterministic for a given `opts.seed`, whatever the thread count.
pub fn solve<P: AsRef<EvaluatedProblem>>(problem: &P, opts: &SolverOptions) -> Result<SolveResult> {
    let problem = problem.as_ref();
    opts.validate()?;
    let starts = multistart_points(problem, opts);
    let outcomes: Vec<StartOutcome> = starts
        .into_par_iter()
        .map(|z| run_start(problem, z, opts))
        .collect();
    if outcomes
        .iter()
        .any(|o| o.objective.is_nan() || o.z.iter().any(|v| v.is_nan()))
    {
        return Err(Error::Numeric(format!(
            "objective or iterate became NaN while solving {}",
            problem.kind()
        )));
    }
    let best = select(&outcomes, opts.tol_feas);
    let o = &outcomes[best];
    let status = if o.violation <= opts.tol_feas {
        if o.converged {
            SolveStatus::Converged
        } else {
            SolveStatus::MaxIter
        }
    } else if o.violation <= NEAR_FEASIBLE {
        SolveStatus::MaxIter
    } else {
        SolveStatus::InfeasibleDetected
    };
    let n = problem.n_weights();
    Ok(SolveResult {
        x_star: o.z[..n].to_vec(),
        k_star: o.z[n],
        aux: o.z[n + 1..].to_vec(),
        objective: o.objective,
        feasibility_residual: o.violation,
        status,
        starts_used: outcomes.len(),
        best_start_index: best,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::IrbParams;
    use crate::portfolio::{Loan, LoanUniverse};
    use crate::problems::{build_problem, ModelKind, ModelParams, ProblemSpec};
    use std::sync::Arc;

    #[test]
    fn options_validation() {
        assert!(SolverOptions::default().validate().is_ok());
        let bad = SolverOptions {
            n_starts: 0,
            ..SolverOptions::default()
        };
        assert!(bad.validate().is_err());
        let bad = SolverOptions {
            tol_feas: -1.0,
            ..SolverOptions::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn single_safe_loan_min_risk() {
        let irb = IrbParams::default();
        let u = Arc::new(
            LoanUniverse::new(vec![Loan::new("s", 0.03, 0.0, 0.0, &irb).unwrap()]).unwrap(),
        );
        let params = ModelParams {
            mu: Some(0.0),
            ..ModelParams::default()
        };
        let p = build_problem(ProblemSpec::new(ModelKind::P2MinRisk, u, &params)).unwrap();
        let r = solve(&p, &SolverOptions::default()).unwrap();
        assert_eq!(r.x_star, vec![1.0]);
        assert_eq!(r.objective, 0.0);
        assert_eq!(r.k_star, 0.04);
        assert_eq!(r.status, SolveStatus::Converged);
    }

    #[test]
    fn start_points_begin_with_vertices() {
        let u = Arc::new(LoanUniverse::reference_example());
        let p = build_problem(ProblemSpec::new(
            ModelKind::P4MinRiskLl,
            u,
            &ModelParams::default(),
        ))
        .unwrap();
        let pts = multistart_points(&p, &SolverOptions::default());
        assert_eq!(pts.len(), 32);
        assert_eq!(&pts[1][..3], &[0.0, 1.0, 0.0]);
        for z in &pts {
            assert!((z[..3].iter().sum::<f64>() - 1.0).abs() < 1e-12);
            assert_eq!(z[3], p.spec.capital_floor(&z[..3]));
        }
    }

    #[test]
    fn selection_prefers_feasible_then_lowest_index() {
        let mk = |objective, violation| StartOutcome {
            z: vec![],
            objective,
            violation,
            converged: true,
        };
        let outs = vec![
            mk(5.0, 1.0),
            mk(1.0, 0.0),
            mk(1.0 + 1e-13, 0.0),
            mk(0.5, 0.0),
        ];
        assert_eq!(select(&outs, 1e-8), 1);
        let outs = vec![mk(5.0, 1.0), mk(1.0, 0.5)];
        assert_eq!(select(&outs, 1e-8), 1);
    }
}
