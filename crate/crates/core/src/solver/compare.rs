use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{solve, SolveResult, SolveStatus, SolverOptions};
use crate::error::{Error, Result};
use crate::portfolio::{
    expected_loss_of, limited_liability_return, plain_return, realizations, unexpected_loss_of,
    LoanUniverse,
};
use crate::problems::{
    build_problem, reformulate_ll, ModelKind, ModelParams, ProblemSpec, RiskMeasure,
};

/// A solved model re-evaluated through the portfolio operations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelOutcome {
    pub model: ModelKind,
    pub weights: Vec<f64>,
    pub capital: f64,
    pub objective: f64,
    pub risk: f64,
    pub expected_loss: f64,
    pub unexpected_loss: f64,
    pub return_plain: f64,
    pub return_limited_liability: f64,
    /// Scenarios in which the bank's net value is negative.
    pub truncated_scenarios: usize,
    pub feasibility_residual: f64,
    pub status: SolveStatus,
}

impl ModelOutcome {
    pub fn from_solution(spec: &ProblemSpec, result: &SolveResult) -> Self {
        let u = &spec.universe;
        let x = &result.x_star;
        let k = result.k_star;
        let risk = spec.risk(x);
        let objective = if spec.kind.is_min_risk() {
            risk
        } else {
            spec.model_return(x, k)
        };
        Self {
            model: spec.kind,
            weights: x.clone(),
            capital: k,
            objective,
            risk,
            expected_loss: expected_loss_of(u, x),
            unexpected_loss: unexpected_loss_of(u, x, &spec.correlation).unwrap_or(f64::NAN),
            return_plain: plain_return(u, x, k, spec.delta),
            return_limited_liability: limited_liability_return(u, x, k, spec.delta),
            truncated_scenarios: realizations(u, x, k).iter().filter(|&&v| v < 0.0).count(),
            feasibility_residual: result.feasibility_residual,
            status: result.status,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairReport {
    pub without_limited_liability: ModelOutcome,
    pub with_limited_liability: ModelOutcome,
    /// 100·(ρ(x_without) − ρ(x_with)) / ρ(x_without); 0 when ρ(x_without) = 0.
    pub risk_decrease_pct: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub risk_measure: RiskMeasure,
    /// P2 against P4 under the return floor μ.
    pub min_risk: Option<PairReport>,
    /// P1 against P3 under the risk cap θ.
    pub max_return: Option<PairReport>,
}

impl ComparisonReport {
    pub fn any_infeasible(&self) -> bool {
        [&self.min_risk, &self.max_return]
            .into_iter()
            .flatten()
            .any(|p| {
                p.with_limited_liability.status == SolveStatus::InfeasibleDetected
                    || p.without_limited_liability.status == SolveStatus::InfeasibleDetected
            })
    }
}

pub fn risk_decrease_pct(without: f64, with: f64) -> f64 {
    if without == 0.0 {
        0.0
    } else {
        100.0 * (without - with) / without
    }
}

fn solve_kind(
    universe: &Arc<LoanUniverse>,
    kind: ModelKind,
    params: &ModelParams,
    opts: &SolverOptions,
) -> Result<ModelOutcome> {
    let spec = ProblemSpec::new(kind, universe.clone(), params);
    let problem = build_problem(spec)?;
    let result = if kind == ModelKind::P3MaxReturnLl {
        solve(&reformulate_ll(&problem)?, opts)?
    } else {
        solve(&problem, opts)?
    };
    Ok(ModelOutcome::from_solution(&problem.spec, &result))
}

fn pair(
    universe: &Arc<LoanUniverse>,
    without: ModelKind,
    with: ModelKind,
    params: &ModelParams,
    opts: &SolverOptions,
) -> Result<PairReport> {
    let a = solve_kind(universe, without, params, opts)?;
    let b = solve_kind(universe, with, params, opts)?;
    Ok(PairReport {
        risk_decrease_pct: risk_decrease_pct(a.risk, b.risk),
        without_limited_liability: a,
        with_limited_liability: b,
    })
}

/// Solves the (P2, P4) pair when μ is set and the (P1, P3) pair when θ is
/// set. The limited-liability maximization goes through the reformulation.
pub fn compare_models(
    universe: Arc<LoanUniverse>,
    params: &ModelParams,
    opts: &SolverOptions,
) -> Result<ComparisonReport> {
    if params.mu.is_none() && params.theta.is_none() {
        return Err(Error::Config("comparison needs mu, theta or both".into()));
    }
    let min_risk = params
        .mu
        .map(|_| {
            pair(
                &universe,
                ModelKind::P2MinRisk,
                ModelKind::P4MinRiskLl,
                params,
                opts,
            )
        })
        .transpose()?;
    let max_return = params
        .theta
        .map(|_| {
            pair(
                &universe,
                ModelKind::P1MaxReturn,
                ModelKind::P3MaxReturnLl,
                params,
                opts,
            )
        })
        .transpose()?;
    Ok(ComparisonReport {
        risk_measure: params.risk_measure,
        min_risk,
        max_return,
    })
}
