//! The four decision models as objective/constraint bundles over `(x, k)`,
//! plus the smooth complementarity reformulation of the limited-liability
//! return maximization.
//!
//! Variable layout is `[x_0 .. x_{n-1}, k, aux_0 .. aux_{S-1}]`; auxiliary
//! variables exist only in the reformulated problem. Every problem is posed as
//! a maximization; the risk-minimizing models maximize `-ρ(x)`.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::portfolio::{
    expected_loss_gradient, expected_loss_of, limited_liability_return,
    limited_liability_return_gradient, plain_return, plain_return_gradient, realizations,
    unexpected_loss_gradient, unexpected_loss_of, CorrelationMatrix, LoanUniverse,
    MAX_ADMISSIBLE_PD,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ModelKind {
    /// Maximize expected return without limited liability.
    #[serde(rename = "P1")]
    P1MaxReturn,
    /// Minimize risk without limited liability.
    #[serde(rename = "P2")]
    P2MinRisk,
    /// Maximize expected profit with limited liability.
    #[serde(rename = "P3")]
    P3MaxReturnLl,
    /// Minimize risk with limited liability.
    #[serde(rename = "P4")]
    P4MinRiskLl,
}

impl ModelKind {
    pub const ALL: [ModelKind; 4] = [
        ModelKind::P1MaxReturn,
        ModelKind::P2MinRisk,
        ModelKind::P3MaxReturnLl,
        ModelKind::P4MinRiskLl,
    ];

    pub fn is_min_risk(self) -> bool {
        matches!(self, ModelKind::P2MinRisk | ModelKind::P4MinRiskLl)
    }

    pub fn has_limited_liability(self) -> bool {
        matches!(self, ModelKind::P3MaxReturnLl | ModelKind::P4MinRiskLl)
    }

    pub fn label(self) -> &'static str {
        match self {
            ModelKind::P1MaxReturn => "P1",
            ModelKind::P2MinRisk => "P2",
            ModelKind::P3MaxReturnLl => "P3",
            ModelKind::P4MinRiskLl => "P4",
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            ModelKind::P1MaxReturn => "max return s.t. risk cap",
            ModelKind::P2MinRisk => "min risk s.t. return floor",
            ModelKind::P3MaxReturnLl => "max limited-liability return s.t. risk cap",
            ModelKind::P4MinRiskLl => "min risk s.t. limited-liability return floor",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "P1" => Ok(ModelKind::P1MaxReturn),
            "P2" => Ok(ModelKind::P2MinRisk),
            "P3" => Ok(ModelKind::P3MaxReturnLl),
            "P4" => Ok(ModelKind::P4MinRiskLl),
            other => Err(Error::Config(format!(
                "unknown model `{other}`, expected P1..P4"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum RiskMeasure {
    #[default]
    #[serde(rename = "EL")]
    ExpectedLoss,
    #[serde(rename = "UL")]
    UnexpectedLoss,
}

impl RiskMeasure {
    pub fn label(self) -> &'static str {
        match self {
            RiskMeasure::ExpectedLoss => "EL",
            RiskMeasure::UnexpectedLoss => "UL",
        }
    }
}

impl FromStr for RiskMeasure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "EL" => Ok(RiskMeasure::ExpectedLoss),
            "UL" => Ok(RiskMeasure::UnexpectedLoss),
            other => Err(Error::Config(format!(
                "unknown risk measure `{other}`, expected EL or UL"
            ))),
        }
    }
}

/// Run parameters shared by all four models.
#[derive(Debug, Clone)]
pub struct ModelParams {
    /// Opportunity cost of equity δ.
    pub delta: f64,
    /// Leverage-ratio floor on capital.
    pub k_lev: f64,
    pub risk_measure: RiskMeasure,
    /// Return floor μ for the risk-minimizing models.
    pub mu: Option<f64>,
    /// Risk cap θ for the return-maximizing models.
    pub theta: Option<f64>,
    /// Default correlation for UL; identity when absent.
    pub correlation: Option<CorrelationMatrix>,
}

impl Default for ModelParams {
    fn default() -> Self {
        Self {
            delta: 1.04,
            k_lev: 0.04,
            risk_measure: RiskMeasure::ExpectedLoss,
            mu: Some(0.098),
            theta: Some(0.012),
            correlation: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ProblemSpec {
    pub kind: ModelKind,
    pub universe: Arc<LoanUniverse>,
    pub delta: f64,
    pub k_lev: f64,
    pub risk_measure: RiskMeasure,
    pub theta: Option<f64>,
    pub mu: Option<f64>,
    pub correlation: CorrelationMatrix,
}

impl ProblemSpec {
    /// Picks the bound matching `kind` out of `params`.
    pub fn new(kind: ModelKind, universe: Arc<LoanUniverse>, params: &ModelParams) -> Self {
        let correlation = params
            .correlation
            .clone()
            .unwrap_or_else(|| CorrelationMatrix::identity(universe.len()));
        let (mu, theta) = if kind.is_min_risk() {
            (params.mu, None)
        } else {
            (None, params.theta)
        };
        Self {
            kind,
            universe,
            delta: params.delta,
            k_lev: params.k_lev,
            risk_measure: params.risk_measure,
            theta,
            mu,
            correlation,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.delta > 1.0 && self.delta.is_finite()) {
            return Err(Error::Config(format!(
                "delta = {} must exceed 1 (equity costs more than debt)",
                self.delta
            )));
        }
        if !(self.k_lev > 0.0 && self.k_lev < 1.0) {
            return Err(Error::Config(format!(
                "k_lev = {} must lie in (0, 1)",
                self.k_lev
            )));
        }
        match (self.kind.is_min_risk(), self.mu, self.theta) {
            (true, Some(mu), None) if mu.is_finite() => {}
            (false, None, Some(theta)) if theta.is_finite() => {}
            (true, _, _) => {
                return Err(Error::Config(format!(
                    "{} needs a return floor mu and no risk cap theta",
                    self.kind
                )))
            }
            (false, _, _) => {
                return Err(Error::Config(format!(
                    "{} needs a risk cap theta and no return floor mu",
                    self.kind
                )))
            }
        }
        if let Some(l) = self
            .universe
            .loans()
            .iter()
            .find(|l| l.pd >= MAX_ADMISSIBLE_PD)
        {
            return Err(Error::Config(format!(
                "loan `{}` has pd = {} >= {MAX_ADMISSIBLE_PD}; not admissible to a model",
                l.id, l.pd
            )));
        }
        if self.correlation.dim() != self.universe.len() {
            return Err(Error::Dimension {
                what: "correlation matrix",
                expected: self.universe.len(),
                got: self.correlation.dim(),
            });
        }
        Ok(())
    }

    pub fn risk(&self, weights: &[f64]) -> f64 {
        match self.risk_measure {
            RiskMeasure::ExpectedLoss => expected_loss_of(&self.universe, weights),
            RiskMeasure::UnexpectedLoss => {
                unexpected_loss_of(&self.universe, weights, &self.correlation).unwrap_or(f64::NAN)
            }
        }
    }

    fn risk_gradient(&self, weights: &[f64], out: &mut [f64]) {
        let g = match self.risk_measure {
            RiskMeasure::ExpectedLoss => expected_loss_gradient(&self.universe),
            RiskMeasure::UnexpectedLoss => {
                unexpected_loss_gradient(&self.universe, weights, &self.correlation)
                    .unwrap_or_else(|_| vec![f64::NAN; weights.len()])
            }
        };
        out[..g.len()].copy_from_slice(&g);
    }

    /// The return functional this model uses (plain or truncated).
    pub fn model_return(&self, weights: &[f64], capital: f64) -> f64 {
        if self.kind.has_limited_liability() {
            limited_liability_return(&self.universe, weights, capital, self.delta)
        } else {
            plain_return(&self.universe, weights, capital, self.delta)
        }
    }

    /// max(k_lev, K(x)): the least capital the constraints allow.
    pub fn capital_floor(&self, weights: &[f64]) -> f64 {
        self.k_lev.max(self.universe.portfolio_capital(weights))
    }
}

pub type ValueFn = dyn Fn(&[f64]) -> f64 + Send + Sync;
pub type GradientFn = dyn Fn(&[f64], &mut [f64]) + Send + Sync;

/// A named scalar function of the full variable vector, with an optional
/// analytic (sub)gradient.
#[derive(Clone)]
pub struct Functional {
    name: String,
    value: Arc<ValueFn>,
    gradient: Option<Arc<GradientFn>>,
}

impl Functional {
    pub fn new(
        name: impl Into<String>,
        value: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            name: name.into(),
            value: Arc::new(value),
            gradient: None,
        }
    }

    pub fn with_gradient(
        mut self,
        gradient: impl Fn(&[f64], &mut [f64]) + Send + Sync + 'static,
    ) -> Self {
        self.gradient = Some(Arc::new(gradient));
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn eval(&self, z: &[f64]) -> f64 {
        (self.value)(z)
    }

    /// Writes the analytic gradient into `out` (fully overwritten) and
    /// returns `true`, or returns `false` when none is supplied.
    pub fn gradient(&self, z: &[f64], out: &mut [f64]) -> bool {
        match &self.gradient {
            Some(g) => {
                out.iter_mut().for_each(|v| *v = 0.0);
                g(z, out);
                true
            }
            None => false,
        }
    }

    pub fn has_gradient(&self) -> bool {
        self.gradient.is_some()
    }
}

impl fmt::Debug for Functional {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Functional")
            .field("name", &self.name)
            .field("analytic_gradient", &self.gradient.is_some())
            .finish()
    }
}

/// Objective (maximized), inequalities `g(z) >= 0`, equalities `h(z) = 0` and
/// box bounds. The first `n_weights` variables always live on the simplex.
#[derive(Debug, Clone)]
pub struct EvaluatedProblem {
    pub spec: Arc<ProblemSpec>,
    pub objective: Functional,
    pub ineq_constraints: Vec<Functional>,
    pub eq_constraints: Vec<Functional>,
    pub bounds: Vec<(f64, f64)>,
    n_aux: usize,
}

impl EvaluatedProblem {
    pub fn kind(&self) -> ModelKind {
        self.spec.kind
    }

    pub fn n_weights(&self) -> usize {
        self.spec.universe.len()
    }

    pub fn n_vars(&self) -> usize {
        self.bounds.len()
    }

    pub fn n_aux(&self) -> usize {
        self.n_aux
    }

    pub fn capital_index(&self) -> usize {
        self.n_weights()
    }

    pub fn is_reformulated(&self) -> bool {
        self.n_aux > 0
    }

    /// Maximal constraint violation at `z`, bounds excluded.
    pub fn max_violation(&self, z: &[f64]) -> f64 {
        let ineq = self.ineq_constraints.iter().map(|g| (-g.eval(z)).max(0.0));
        let eq = self.eq_constraints.iter().map(|h| h.eval(z).abs());
        ineq.chain(eq).fold(0.0, f64::max)
    }

    /// Sets every auxiliary variable to max(R_s(x, k), 0).
    pub fn close_aux(&self, z: &mut [f64]) {
        if self.n_aux == 0 {
            return;
        }
        let n = self.n_weights();
        let r = realizations(&self.spec.universe, &z[..n], z[n]);
        for (a, v) in z[n + 1..].iter_mut().zip(r) {
            *a = v.max(0.0);
        }
    }

    /// Builds the full variable vector for `(x, k)`, closing aux variables.
    pub fn point(&self, weights: &[f64], capital: f64) -> Vec<f64> {
        let mut z = Vec::with_capacity(self.n_vars());
        z.extend_from_slice(weights);
        z.push(capital);
        z.resize(self.n_vars(), 0.0);
        self.close_aux(&mut z);
        z
    }

    /// Objective in its natural sign: risk for min-risk models, return otherwise.
    pub fn natural_objective(&self, objective: f64) -> f64 {
        if self.kind().is_min_risk() {
            -objective
        } else {
            objective
        }
    }
}

impl AsRef<EvaluatedProblem> for EvaluatedProblem {
    fn as_ref(&self) -> &EvaluatedProblem {
        self
    }
}

fn weights_block(z: &[f64], n: usize) -> &[f64] {
    &z[..n]
}

/// Builds the objective and constraint bundle for one of the four models.
pub fn build_problem(spec: ProblemSpec) -> Result<EvaluatedProblem> {
    spec.validate()?;
    let spec = Arc::new(spec);
    let n = spec.universe.len();
    let kidx = n;

    let objective = match spec.kind {
        ModelKind::P1MaxReturn => {
            let s = spec.clone();
            let sg = spec.clone();
            Functional::new("expected_return", move |z| {
                plain_return(&s.universe, weights_block(z, n), z[kidx], s.delta)
            })
            .with_gradient(move |_, out| plain_return_gradient(&sg.universe, sg.delta, out))
        }
        ModelKind::P3MaxReturnLl => {
            let s = spec.clone();
            let sg = spec.clone();
            Functional::new("expected_profit_ll", move |z| {
                limited_liability_return(&s.universe, weights_block(z, n), z[kidx], s.delta)
            })
            .with_gradient(move |z, out| {
                limited_liability_return_gradient(&sg.universe, &z[..n], z[kidx], sg.delta, out)
            })
        }
        ModelKind::P2MinRisk | ModelKind::P4MinRiskLl => {
            let s = spec.clone();
            let sg = spec.clone();
            Functional::new(format!("neg_{}", spec.risk_measure.label()), move |z| {
                -s.risk(weights_block(z, n))
            })
            .with_gradient(move |z, out| {
                sg.risk_gradient(&z[..n], out);
                out[..n].iter_mut().for_each(|v| *v = -*v);
            })
        }
    };

    let mut ineq = Vec::new();
    let k_lev = spec.k_lev;
    ineq.push(
        Functional::new("leverage_floor", move |z| z[kidx] - k_lev)
            .with_gradient(move |_, out| out[kidx] = 1.0),
    );
    let caps = spec.universe.capital_requirements();
    let caps_g = caps.clone();
    ineq.push(
        Functional::new("irb_capital", move |z| {
            z[kidx] - caps.iter().zip(&z[..n]).map(|(c, x)| c * x).sum::<f64>()
        })
        .with_gradient(move |_, out| {
            for (o, c) in out.iter_mut().zip(&caps_g) {
                *o = -c;
            }
            out[kidx] = 1.0;
        }),
    );
    if spec.kind.is_min_risk() {
        let mu = spec.mu.expect("validated");
        let s = spec.clone();
        let sg = spec.clone();
        let limited = spec.kind.has_limited_liability();
        ineq.push(
            Functional::new("return_floor", move |z| {
                s.model_return(&z[..n], z[kidx]) - mu
            })
            .with_gradient(move |z, out| {
                if limited {
                    limited_liability_return_gradient(&sg.universe, &z[..n], z[kidx], sg.delta, out)
                } else {
                    plain_return_gradient(&sg.universe, sg.delta, out)
                }
            }),
        );
    } else {
        let theta = spec.theta.expect("validated");
        let s = spec.clone();
        let sg = spec.clone();
        ineq.push(
            Functional::new("risk_cap", move |z| theta - s.risk(&z[..n])).with_gradient(
                move |z, out| {
                    sg.risk_gradient(&z[..n], out);
                    out[..n].iter_mut().for_each(|v| *v = -*v);
                },
            ),
        );
    }

    let eq = vec![simplex_equality(n)];
    let bounds = vec![(0.0, 1.0); n + 1];
    Ok(EvaluatedProblem {
        spec,
        objective,
        ineq_constraints: ineq,
        eq_constraints: eq,
        bounds,
        n_aux: 0,
    })
}

fn simplex_equality(n: usize) -> Functional {
    Functional::new("simplex", move |z| z[..n].iter().sum::<f64>() - 1.0).with_gradient(
        move |_, out| {
            out[..n].iter_mut().for_each(|v| *v = 1.0);
        },
    )
}

/// The limited-liability maximization rewritten with one auxiliary variable
/// per scenario: maximize Σ P(s)·a_s − δk subject to a_s(a_s − R_s) = 0,
/// a_s >= 0, and the original constraints.
#[derive(Debug, Clone)]
pub struct ReformulatedProblem {
    pub base: EvaluatedProblem,
    pub smooth: EvaluatedProblem,
}

impl ReformulatedProblem {
    pub fn aux_count(&self) -> usize {
        self.smooth.n_aux()
    }
}

impl AsRef<EvaluatedProblem> for ReformulatedProblem {
    fn as_ref(&self) -> &EvaluatedProblem {
        &self.smooth
    }
}

pub fn reformulate_ll(problem: &EvaluatedProblem) -> Result<ReformulatedProblem> {
    if problem.kind() != ModelKind::P3MaxReturnLl || problem.is_reformulated() {
        return Err(Error::Config(format!(
            "reformulation applies to the base P3 problem, got {}",
            problem.kind()
        )));
    }
    let spec = problem.spec.clone();
    let universe = &spec.universe;
    let n = universe.len();
    let kidx = n;
    let probs: Arc<Vec<f64>> = Arc::new(universe.scenarios().probabilities().to_vec());
    let n_aux = probs.len();
    let delta = spec.delta;

    let p = probs.clone();
    let p_g = probs.clone();
    let objective = Functional::new("aux_expected_profit", move |z| {
        p.iter().zip(&z[n + 1..]).map(|(p, a)| p * a).sum::<f64>() - delta * z[kidx]
    })
    .with_gradient(move |_, out| {
        out[kidx] = -delta;
        out[n + 1..].copy_from_slice(&p_g);
    });

    let mut eq = problem.eq_constraints.clone();
    for s in 0..n_aux {
        let sv = spec.clone();
        let sg = spec.clone();
        eq.push(
            Functional::new(format!("complementarity[{s}]"), move |z| {
                let r = realizations(&sv.universe, &z[..n], z[kidx])[s];
                let a = z[n + 1 + s];
                a * (a - r)
            })
            .with_gradient(move |z, out| {
                let u = &sg.universe;
                let r = realizations(u, &z[..n], z[kidx])[s];
                let a = z[n + 1 + s];
                // d/dv [a(a - R)] = -a dR/dv for v in (x, k); d/da = 2a - R
                let pattern = u.scenarios().pattern(s);
                let mut defaulted = vec![false; n];
                for (&i, &d) in u.risky_indices().iter().zip(&pattern) {
                    defaulted[i] = d;
                }
                for i in 0..n {
                    let dr = if defaulted[i] {
                        1.0 - u.loans()[i].lgd
                    } else {
                        u.performing_payoff(i)
                    };
                    out[i] = -a * dr;
                }
                out[kidx] = -a;
                out[n + 1 + s] = 2.0 * a - r;
            }),
        );
    }

    // R_s <= max_i(1 + r_i) on the simplex with k <= 1.
    let aux_upper = universe
        .loans()
        .iter()
        .map(|l| 1.0 + l.rate.max(0.0))
        .fold(1.0, f64::max);
    let mut bounds = problem.bounds.clone();
    bounds.extend(std::iter::repeat_n((0.0, aux_upper), n_aux));

    let mut ineq = Vec::with_capacity(problem.ineq_constraints.len());
    for g in &problem.ineq_constraints {
        ineq.push(g.clone());
    }
    Ok(ReformulatedProblem {
        base: problem.clone(),
        smooth: EvaluatedProblem {
            spec,
            objective,
            ineq_constraints: ineq,
            eq_constraints: eq,
            bounds,
            n_aux,
        },
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Residual {
    pub name: String,
    /// Amount by which the constraint is violated; 0 when satisfied.
    pub violation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FeasibilityReport {
    pub feasible: bool,
    pub max_violation: f64,
    pub residuals: Vec<Residual>,
}

/// Checks `(x, k)` against every constraint and bound of `problem`.
/// Auxiliary variables of a reformulated problem are set to their closure.
pub fn is_feasible(
    problem: &EvaluatedProblem,
    weights: &[f64],
    capital: f64,
    tol: f64,
) -> Result<FeasibilityReport> {
    if weights.len() != problem.n_weights() {
        return Err(Error::Dimension {
            what: "weights",
            expected: problem.n_weights(),
            got: weights.len(),
        });
    }
    let z = problem.point(weights, capital);
    let mut residuals = Vec::new();
    for (i, &w) in weights.iter().enumerate() {
        residuals.push(Residual {
            name: format!("no_short[{i}]"),
            violation: (-w).max(0.0).max(w - 1.0),
        });
    }
    let (klo, khi) = problem.bounds[problem.capital_index()];
    residuals.push(Residual {
        name: "capital_bounds".into(),
        violation: (klo - capital).max(capital - khi).max(0.0),
    });
    for g in &problem.ineq_constraints {
        residuals.push(Residual {
            name: g.name().to_string(),
            violation: (-g.eval(&z)).max(0.0),
        });
    }
    for h in &problem.eq_constraints {
        residuals.push(Residual {
            name: h.name().to_string(),
            violation: h.eval(&z).abs(),
        });
    }
    let max_violation = residuals.iter().map(|r| r.violation).fold(0.0, f64::max);
    Ok(FeasibilityReport {
        feasible: max_violation <= tol && !max_violation.is_nan(),
        max_violation,
        residuals,
    })
}
