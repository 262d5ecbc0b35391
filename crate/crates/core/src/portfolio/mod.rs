//! Loan universe, allocations, risk measures and scenario payoffs.

mod risk;
mod scenario;
mod screening;

pub use risk::{
    expected_loss, expected_loss_gradient, expected_loss_of, unexpected_loss,
    unexpected_loss_gradient, unexpected_loss_of, CorrelationMatrix,
};
pub use scenario::{
    enumerate_scenarios, expected_return_limited_liability, expected_return_plain,
    limited_liability_return, limited_liability_return_gradient, plain_return,
    plain_return_gradient, realization_value, realizations, worst_case_net_value, worst_case_of,
    ScenarioTable,
};
pub use screening::{screen_loans, Dominance, LoanScore, ScreeningReport};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{irb_capital, IrbParams};

/// Risky loans admitted to a universe; 2^20 scenarios is the enumeration limit.
pub const SCENARIO_CAP: usize = 20;

/// Loans with default probability at or above this are screened out.
pub const MAX_ADMISSIBLE_PD: f64 = 0.2;

/// Tolerance on Σx = 1 for a valid [`Allocation`].
pub const SIMPLEX_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Loan {
    pub id: String,
    /// Contractual per-period return.
    pub rate: f64,
    pub pd: f64,
    pub lgd: f64,
    /// Per-loan IRB capital requirement K_i.
    pub capital_req: f64,
}

impl Loan {
    /// Builds a loan whose capital requirement comes from the IRB formula.
    pub fn new(
        id: impl Into<String>,
        rate: f64,
        pd: f64,
        lgd: f64,
        irb: &IrbParams,
    ) -> Result<Self> {
        let capital_req = irb_capital(pd, lgd, irb)?;
        Self::with_capital(id, rate, pd, lgd, capital_req)
    }

    /// Builds a loan with an explicitly supplied capital requirement.
    pub fn with_capital(
        id: impl Into<String>,
        rate: f64,
        pd: f64,
        lgd: f64,
        capital_req: f64,
    ) -> Result<Self> {
        let loan = Self {
            id: id.into(),
            rate,
            pd,
            lgd,
            capital_req,
        };
        loan.validate()?;
        Ok(loan)
    }

    fn validate(&self) -> Result<()> {
        if !(self.rate > -1.0 && self.rate.is_finite()) {
            return Err(Error::Domain {
                what: "rate",
                value: self.rate,
                reason: "must be finite and > -1",
            });
        }
        if !(0.0..1.0).contains(&self.pd) {
            return Err(Error::Domain {
                what: "pd",
                value: self.pd,
                reason: "must lie in [0, 1)",
            });
        }
        if !(0.0..=1.0).contains(&self.lgd) {
            return Err(Error::Domain {
                what: "lgd",
                value: self.lgd,
                reason: "must lie in [0, 1]",
            });
        }
        if !(0.0..=1.0).contains(&self.capital_req) {
            return Err(Error::Domain {
                what: "capital_req",
                value: self.capital_req,
                reason: "must lie in [0, 1]",
            });
        }
        if self.pd == 0.0 && self.capital_req != 0.0 {
            return Err(Error::Domain {
                what: "capital_req",
                value: self.capital_req,
                reason: "a loan with pd = 0 carries no capital requirement",
            });
        }
        Ok(())
    }

    pub fn is_risky(&self) -> bool {
        self.pd > 0.0
    }

    /// Standalone unexpected loss λ√(p(1−p)).
    pub fn unexpected_loss(&self) -> f64 {
        self.lgd * (self.pd * (1.0 - self.pd)).sqrt()
    }
}

/// How a loan with `pd = 0` enters the scenario realizations.
///
/// `Gross` pays principal plus interest, like a surviving risky loan.
/// `InterestOnly` pays `r·x` only, which is how the safe leg is written
/// in the three-loan realization formulas taken literally.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum SafeLeg {
    #[default]
    Gross,
    InterestOnly,
}

#[derive(Debug, Clone)]
pub struct LoanUniverse {
    loans: Vec<Loan>,
    risky: Vec<usize>,
    safe_leg: SafeLeg,
    scenarios: ScenarioTable,
}

impl LoanUniverse {
    pub fn new(loans: Vec<Loan>) -> Result<Self> {
        Self::with_safe_leg(loans, SafeLeg::default())
    }

    pub fn with_safe_leg(loans: Vec<Loan>, safe_leg: SafeLeg) -> Result<Self> {
        if loans.is_empty() {
            return Err(Error::Config("loan universe is empty".into()));
        }
        for (i, loan) in loans.iter().enumerate() {
            loan.validate()?;
            if loans[..i].iter().any(|l| l.id == loan.id) {
                return Err(Error::Config(format!("duplicate loan id `{}`", loan.id)));
            }
        }
        let risky: Vec<usize> = loans
            .iter()
            .enumerate()
            .filter(|(_, l)| l.is_risky())
            .map(|(i, _)| i)
            .collect();
        let probabilities: Vec<f64> = risky.iter().map(|&i| loans[i].pd).collect();
        let scenarios = ScenarioTable::from_default_probabilities(&probabilities)?;
        Ok(Self {
            loans,
            risky,
            safe_leg,
            scenarios,
        })
    }

    /// The three-loan universe of the worked example: a riskless loan at 3%,
    /// a less risky loan (9%, PD 6.1%, LGD 10%) and a riskier one
    /// (13.2%, PD 12.2%, LGD 9%), with IRB capital at ρ = 0.15.
    pub fn reference_example() -> Self {
        let irb = IrbParams::default();
        let loans = vec![
            Loan::new("safe", 0.03, 0.0, 0.0, &irb).unwrap(),
            Loan::new("less_risky", 0.09, 0.061, 0.10, &irb).unwrap(),
            Loan::new("more_risky", 0.132, 0.122, 0.09, &irb).unwrap(),
        ];
        Self::new(loans).unwrap()
    }

    pub fn len(&self) -> usize {
        self.loans.len()
    }

    pub fn is_empty(&self) -> bool {
        self.loans.is_empty()
    }

    pub fn loans(&self) -> &[Loan] {
        &self.loans
    }

    pub fn risky_indices(&self) -> &[usize] {
        &self.risky
    }

    pub fn safe_leg(&self) -> SafeLeg {
        self.safe_leg
    }

    pub fn scenarios(&self) -> &ScenarioTable {
        &self.scenarios
    }

    pub fn capital_requirements(&self) -> Vec<f64> {
        self.loans.iter().map(|l| l.capital_req).collect()
    }

    /// K(x) = Σ x_i K_i.
    pub fn portfolio_capital(&self, weights: &[f64]) -> f64 {
        self.loans
            .iter()
            .zip(weights)
            .map(|(l, x)| l.capital_req * x)
            .sum()
    }

    /// Payoff of loan `i` per unit weight when it does not default.
    pub(crate) fn performing_payoff(&self, i: usize) -> f64 {
        let loan = &self.loans[i];
        if loan.is_risky() {
            1.0 + loan.rate
        } else {
            match self.safe_leg {
                SafeLeg::Gross => 1.0 + loan.rate,
                SafeLeg::InterestOnly => loan.rate,
            }
        }
    }

    pub(crate) fn check_len(&self, what: &'static str, got: usize) -> Result<()> {
        if got != self.len() {
            return Err(Error::Dimension {
                what,
                expected: self.len(),
                got,
            });
        }
        Ok(())
    }
}

/// Portfolio weights plus the capital level `k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Allocation {
    weights: Vec<f64>,
    capital: f64,
}

impl Allocation {
    pub fn new(weights: Vec<f64>, capital: f64) -> Result<Self> {
        if let Some(&w) = weights.iter().find(|w| w.is_nan() || **w < 0.0) {
            return Err(Error::Domain {
                what: "weight",
                value: w,
                reason: "weights must be nonnegative (no short selling)",
            });
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > SIMPLEX_TOL {
            return Err(Error::Domain {
                what: "sum of weights",
                value: total,
                reason: "weights must sum to 1",
            });
        }
        if !(0.0..=1.0).contains(&capital) {
            return Err(Error::Domain {
                what: "capital",
                value: capital,
                reason: "must lie in [0, 1]",
            });
        }
        Ok(Self { weights, capital })
    }

    /// All weight on loan `index` of an `n`-loan universe.
    pub fn single(n: usize, index: usize, capital: f64) -> Result<Self> {
        let mut weights = vec![0.0; n];
        weights[index] = 1.0;
        Self::new(weights, capital)
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn capital(&self) -> f64 {
        self.capital
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_universe_shape() {
        let u = LoanUniverse::reference_example();
        assert_eq!(u.len(), 3);
        assert_eq!(u.risky_indices(), &[1, 2]);
        assert_eq!(u.loans()[0].capital_req, 0.0);
        assert_eq!(u.scenarios().len(), 4);
    }

    #[test]
    fn duplicate_ids_rejected() {
        let irb = IrbParams::default();
        let a = Loan::new("a", 0.05, 0.01, 0.4, &irb).unwrap();
        assert!(matches!(
            LoanUniverse::new(vec![a.clone(), a]),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn riskless_loan_cannot_carry_capital() {
        assert!(Loan::with_capital("s", 0.03, 0.0, 0.0, 0.01).is_err());
    }

    #[test]
    fn allocation_validation() {
        assert!(Allocation::new(vec![0.5, 0.5], 0.04).is_ok());
        assert!(Allocation::new(vec![0.5, 0.6], 0.04).is_err());
        assert!(Allocation::new(vec![1.1, -0.1], 0.04).is_err());
        assert!(Allocation::new(vec![1.0], 1.5).is_err());
    }

    #[test]
    fn capacity_cap_enforced() {
        let irb = IrbParams::default();
        let loans: Vec<Loan> = (0..=SCENARIO_CAP)
            .map(|i| Loan::new(format!("l{i}"), 0.05, 0.01, 0.4, &irb).unwrap())
            .collect();
        assert!(matches!(
            LoanUniverse::new(loans),
            Err(Error::Capacity { cap: SCENARIO_CAP, requested }) if requested == SCENARIO_CAP + 1
        ));
    }

    #[test]
    fn portfolio_capital_is_linear() {
        let u = LoanUniverse::reference_example();
        let x = [0.2, 0.3, 0.5];
        let y = [0.6, 0.1, 0.3];
        let a = 0.37;
        let mix: Vec<f64> = x
            .iter()
            .zip(&y)
            .map(|(p, q)| a * p + (1.0 - a) * q)
            .collect();
        let lhs = u.portfolio_capital(&mix);
        let rhs = a * u.portfolio_capital(&x) + (1.0 - a) * u.portfolio_capital(&y);
        assert!((lhs - rhs).abs() < 1e-15);
    }
}
