use serde::Serialize;

use super::{plain_return, LoanUniverse, MAX_ADMISSIBLE_PD};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LoanScore {
    pub id: String,
    /// Capital held when the whole book is this loan: max(K_i, k_lev).
    pub capital: f64,
    /// R_i − (1 − k_i') − δ k_i'.
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Dominance {
    pub riskier: String,
    pub safer: String,
    pub riskier_preferred: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScreeningReport {
    /// Loans whose default probability is at or above the admissible limit.
    pub pd_violations: Vec<String>,
    pub scores: Vec<LoanScore>,
    /// One entry per ordered pair with strictly different default probability.
    pub dominance: Vec<Dominance>,
}

/// Single-loan profitability screen.
pub fn screen_loans(universe: &LoanUniverse, delta: f64, k_lev: f64) -> ScreeningReport {
    let n = universe.len();
    let loans = universe.loans();
    let pd_violations = loans
        .iter()
        .filter(|l| l.pd >= MAX_ADMISSIBLE_PD)
        .map(|l| l.id.clone())
        .collect();
    let scores: Vec<LoanScore> = (0..n)
        .map(|i| {
            let capital = loans[i].capital_req.max(k_lev);
            let mut x = vec![0.0; n];
            x[i] = 1.0;
            LoanScore {
                id: loans[i].id.clone(),
                capital,
                score: plain_return(universe, &x, capital, delta),
            }
        })
        .collect();
    let mut dominance = Vec::new();
    for h in 0..n {
        for l in 0..n {
            if loans[h].pd > loans[l].pd {
                dominance.push(Dominance {
                    riskier: loans[h].id.clone(),
                    safer: loans[l].id.clone(),
                    riskier_preferred: scores[h].score > scores[l].score,
                });
            }
        }
    }
    ScreeningReport {
        pd_violations,
        scores,
        dominance,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::IrbParams;
    use crate::portfolio::Loan;

    #[test]
    fn flags_high_default_probability() {
        let irb = IrbParams::default();
        let u = LoanUniverse::new(vec![
            Loan::new("ok", 0.05, 0.01, 0.4, &irb).unwrap(),
            Loan::new("junk", 0.30, 0.25, 0.6, &irb).unwrap(),
        ])
        .unwrap();
        let rep = screen_loans(&u, 1.04, 0.04);
        assert_eq!(rep.pd_violations, vec!["junk".to_string()]);
    }

    #[test]
    fn single_safe_loan_is_clean() {
        let irb = IrbParams::default();
        let u = LoanUniverse::new(vec![Loan::new("s", 0.03, 0.0, 0.0, &irb).unwrap()]).unwrap();
        let rep = screen_loans(&u, 1.04, 0.04);
        assert!(rep.pd_violations.is_empty());
        assert!(rep.dominance.is_empty());
    }

    #[test]
    fn reference_pair_scores() {
        let u = LoanUniverse::reference_example();
        let rep = screen_loans(&u, 1.04, 0.04);
        // Both risky K_i are below the 4% floor, so k' = 0.04 for every loan.
        assert!(rep.scores.iter().all(|s| s.capital == 0.04));
        let es = 0.939 * 1.09 + 0.061 * 0.90;
        let er = 0.878 * 1.132 + 0.122 * 0.91;
        let tail = -(1.0 - 0.04) - 1.04 * 0.04;
        assert!((rep.scores[1].score - (es + tail)).abs() < 1e-14);
        assert!((rep.scores[2].score - (er + tail)).abs() < 1e-14);
        let pair = rep
            .dominance
            .iter()
            .find(|d| d.riskier == "more_risky" && d.safer == "less_risky")
            .unwrap();
        assert!(pair.riskier_preferred);
    }
}
