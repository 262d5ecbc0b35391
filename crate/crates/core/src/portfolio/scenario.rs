use super::{Allocation, LoanUniverse, SCENARIO_CAP};
use crate::error::{Error, Result};
use crate::numerics::CompensatedSum;

/// All 2^m default patterns over the risky loans with their probabilities
/// under independent defaults.
///
/// Scenario `s` is a bitmask in binary-counting order where the lowest-index
/// risky loan is the most significant bit, so for two risky loans the order is
/// (none, second defaults, first defaults, both).
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioTable {
    m: usize,
    probabilities: Vec<f64>,
}

impl ScenarioTable {
    pub(crate) fn from_default_probabilities(pds: &[f64]) -> Result<Self> {
        let m = pds.len();
        if m > SCENARIO_CAP {
            return Err(Error::Capacity {
                cap: SCENARIO_CAP,
                requested: m,
            });
        }
        let probabilities = (0..1usize << m)
            .map(|mask| {
                (0..m)
                    .map(|j| {
                        if mask_defaults(mask, m, j) {
                            pds[j]
                        } else {
                            1.0 - pds[j]
                        }
                    })
                    .product()
            })
            .collect();
        Ok(Self { m, probabilities })
    }

    pub fn len(&self) -> usize {
        self.probabilities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probabilities.is_empty()
    }

    /// Number of risky loans.
    pub fn risky_count(&self) -> usize {
        self.m
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    /// Default indicators of scenario `s`, one per risky loan in index order.
    pub fn pattern(&self, s: usize) -> Vec<bool> {
        (0..self.m).map(|j| mask_defaults(s, self.m, j)).collect()
    }

    /// Inverse of [`pattern`](Self::pattern).
    pub fn index_of(&self, pattern: &[bool]) -> usize {
        pattern
            .iter()
            .enumerate()
            .filter(|(_, &d)| d)
            .fold(0, |acc, (j, _)| acc | (1 << (self.m - 1 - j)))
    }
}

#[inline]
fn mask_defaults(mask: usize, m: usize, j: usize) -> bool {
    (mask >> (m - 1 - j)) & 1 == 1
}

/// Enumerates the default scenarios of a universe.
pub fn enumerate_scenarios(universe: &LoanUniverse) -> Result<ScenarioTable> {
    let pds: Vec<f64> = universe
        .risky_indices()
        .iter()
        .map(|&i| universe.loans()[i].pd)
        .collect();
    ScenarioTable::from_default_probabilities(&pds)
}

/// Net bank value R_s(x, k) for every scenario, in table order.
pub fn realizations(universe: &LoanUniverse, weights: &[f64], capital: f64) -> Vec<f64> {
    let performing: f64 = (0..universe.len())
        .map(|i| universe.performing_payoff(i) * weights[i])
        .sum::<f64>()
        - (1.0 - capital);
    let drops: Vec<f64> = universe
        .risky_indices()
        .iter()
        .map(|&i| {
            let l = &universe.loans()[i];
            (l.rate + l.lgd) * weights[i]
        })
        .collect();
    let m = drops.len();
    (0..universe.scenarios().len())
        .map(|s| {
            let lost: f64 = (0..m)
                .filter(|&j| mask_defaults(s, m, j))
                .map(|j| drops[j])
                .sum();
            performing - lost
        })
        .collect()
}

/// Net value in one default pattern: safe legs, surviving risky legs at
/// (1 + r)·x, defaulted legs at (1 − λ)·x, less liabilities (1 − k).
pub fn realization_value(
    universe: &LoanUniverse,
    alloc: &Allocation,
    pattern: &[bool],
) -> Result<f64> {
    universe.check_len("allocation weights", alloc.weights().len())?;
    let m = universe.risky_indices().len();
    if pattern.len() != m {
        return Err(Error::Dimension {
            what: "default pattern",
            expected: m,
            got: pattern.len(),
        });
    }
    let x = alloc.weights();
    let mut defaulted = vec![false; universe.len()];
    for (&i, &d) in universe.risky_indices().iter().zip(pattern) {
        defaulted[i] = d;
    }
    let gross: f64 = universe
        .loans()
        .iter()
        .enumerate()
        .map(|(i, l)| {
            let payoff = if defaulted[i] {
                1.0 - l.lgd
            } else {
                universe.performing_payoff(i)
            };
            payoff * x[i]
        })
        .sum();
    Ok(gross - (1.0 - alloc.capital()))
}

/// E[X_x] − (1 − k) − δk as a probability-weighted sum over scenarios.
pub fn expected_return_plain(
    universe: &LoanUniverse,
    alloc: &Allocation,
    delta: f64,
) -> Result<f64> {
    universe.check_len("allocation weights", alloc.weights().len())?;
    let r = realizations(universe, alloc.weights(), alloc.capital());
    let acc: CompensatedSum = universe
        .scenarios()
        .probabilities()
        .iter()
        .zip(&r)
        .map(|(p, v)| p * v)
        .collect();
    Ok(acc.total() - delta * alloc.capital())
}

/// E[max(X_x − (1 − k), 0)] − δk.
pub fn expected_return_limited_liability(
    universe: &LoanUniverse,
    alloc: &Allocation,
    delta: f64,
) -> Result<f64> {
    universe.check_len("allocation weights", alloc.weights().len())?;
    Ok(limited_liability_return(
        universe,
        alloc.weights(),
        alloc.capital(),
        delta,
    ))
}

/// Closed form of the plain return: each loan contributes its expected payoff.
pub fn plain_return(universe: &LoanUniverse, weights: &[f64], capital: f64, delta: f64) -> f64 {
    let mut g = vec![0.0; universe.len() + 1];
    plain_return_gradient(universe, delta, &mut g);
    let linear: f64 = g[..universe.len()]
        .iter()
        .zip(weights)
        .map(|(a, b)| a * b)
        .sum();
    linear - 1.0 + capital - delta * capital
}

/// Gradient of [`plain_return`] over (x, k); constant since the return is affine.
pub fn plain_return_gradient(universe: &LoanUniverse, delta: f64, grad: &mut [f64]) {
    let n = universe.len();
    for (i, l) in universe.loans().iter().enumerate() {
        grad[i] = if l.is_risky() {
            (1.0 - l.pd) * (1.0 + l.rate) + l.pd * (1.0 - l.lgd)
        } else {
            universe.performing_payoff(i)
        };
    }
    grad[n] = 1.0 - delta;
}

pub fn limited_liability_return(
    universe: &LoanUniverse,
    weights: &[f64],
    capital: f64,
    delta: f64,
) -> f64 {
    let r = realizations(universe, weights, capital);
    let acc: CompensatedSum = universe
        .scenarios()
        .probabilities()
        .iter()
        .zip(&r)
        .map(|(p, v)| p * v.max(0.0))
        .collect();
    acc.total() - delta * capital
}

/// A (sub)gradient of the limited-liability return over (x, k): scenarios
/// with R_s > 0 contribute P(s)·∇R_s.
pub fn limited_liability_return_gradient(
    universe: &LoanUniverse,
    weights: &[f64],
    capital: f64,
    delta: f64,
    grad: &mut [f64],
) {
    let n = universe.len();
    let r = realizations(universe, weights, capital);
    let table = universe.scenarios();
    let m = table.risky_count();
    let risky = universe.risky_indices();
    grad[..=n].iter_mut().for_each(|g| *g = 0.0);
    let mut mass = 0.0;
    for (s, (&p, &v)) in table.probabilities().iter().zip(&r).enumerate() {
        if v <= 0.0 {
            continue;
        }
        mass += p;
        for i in 0..n {
            grad[i] += p * universe.performing_payoff(i);
        }
        for (j, &i) in risky.iter().enumerate() {
            if mask_defaults(s, m, j) {
                let l = &universe.loans()[i];
                grad[i] -= p * (l.rate + l.lgd);
            }
        }
    }
    grad[n] = mass - delta;
}

/// Minimum net value over all default scenarios.
pub fn worst_case_net_value(universe: &LoanUniverse, alloc: &Allocation) -> Result<f64> {
    universe.check_len("allocation weights", alloc.weights().len())?;
    Ok(worst_case_of(universe, alloc.weights(), alloc.capital()))
}

pub fn worst_case_of(universe: &LoanUniverse, weights: &[f64], capital: f64) -> f64 {
    realizations(universe, weights, capital)
        .into_iter()
        .fold(f64::INFINITY, f64::min)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::IrbParams;
    use crate::portfolio::{Loan, SafeLeg};
    use proptest::prelude::*;

    const PS: f64 = 0.061;
    const PR: f64 = 0.122;

    fn table() -> LoanUniverse {
        LoanUniverse::reference_example()
    }

    fn alloc(x: [f64; 3], k: f64) -> Allocation {
        Allocation::new(x.to_vec(), k).unwrap()
    }

    #[test]
    fn single_scenario_for_riskless_universe() {
        let irb = IrbParams::default();
        let u = LoanUniverse::new(vec![Loan::new("s", 0.03, 0.0, 0.0, &irb).unwrap()]).unwrap();
        let t = enumerate_scenarios(&u).unwrap();
        assert_eq!(t.len(), 1);
        assert_eq!(t.probabilities(), &[1.0]);
    }

    #[test]
    fn reference_scenarios_follow_realization_order() {
        let t = enumerate_scenarios(&table()).unwrap();
        let expect = [
            (1.0 - PS) * (1.0 - PR),
            (1.0 - PS) * PR,
            PS * (1.0 - PR),
            PS * PR,
        ];
        for (a, b) in t.probabilities().iter().zip(expect) {
            assert!((a - b).abs() < 1e-15);
        }
        assert_eq!(t.pattern(1), vec![false, true]);
        assert_eq!(t.pattern(2), vec![true, false]);
        for s in 0..4 {
            assert_eq!(t.index_of(&t.pattern(s)), s);
        }
        assert_eq!(&t, table().scenarios());
    }

    #[test]
    fn symmetric_defaults_give_equal_probabilities() {
        let t = ScenarioTable::from_default_probabilities(&[0.5, 0.5]).unwrap();
        assert!(t.probabilities().iter().all(|&p| p == 0.25));
    }

    #[test]
    fn capacity_error_names_cap() {
        let pds = vec![0.01; SCENARIO_CAP + 1];
        let err = ScenarioTable::from_default_probabilities(&pds).unwrap_err();
        assert!(err.to_string().contains("20"));
    }

    #[test]
    fn realizations_match_written_formulas() {
        let u = table();
        let (x0, x1, x2, k) = (0.2, 0.3, 0.5, 0.05);
        let a = alloc([x0, x1, x2], k);
        let liab = 1.0 - k;
        let safe = 1.03 * x0;
        let expect = [
            safe + 1.09 * x1 + 1.132 * x2 - liab,
            safe + 1.09 * x1 + 0.91 * x2 - liab,
            safe + 0.90 * x1 + 1.132 * x2 - liab,
            safe + 0.90 * x1 + 0.91 * x2 - liab,
        ];
        let r = realizations(&u, a.weights(), k);
        let t = u.scenarios();
        for s in 0..4 {
            assert!((r[s] - expect[s]).abs() < 1e-14);
            let v = realization_value(&u, &a, &t.pattern(s)).unwrap();
            assert!((v - expect[s]).abs() < 1e-14);
        }
        // no-default pattern is the best scenario here
        assert!(r.iter().all(|&v| v <= r[0]));
    }

    #[test]
    fn interest_only_safe_leg() {
        let u =
            LoanUniverse::with_safe_leg(table().loans().to_vec(), SafeLeg::InterestOnly).unwrap();
        let v = realization_value(&u, &alloc([1.0, 0.0, 0.0], 1.0), &[false, false]).unwrap();
        assert!((v - 0.03).abs() < 1e-15);
        let r = realizations(&u, &[0.2, 0.3, 0.5], 0.05);
        assert!((r[0] - (0.03 * 0.2 + 1.09 * 0.3 + 1.132 * 0.5 - 0.95)).abs() < 1e-14);
    }

    #[test]
    fn defaulted_risky_loan_at_low_leverage_is_negative() {
        let u = table();
        let v = realization_value(&u, &alloc([0.0, 0.0, 1.0], 0.04), &[false, true]).unwrap();
        assert!((v - (-0.05)).abs() < 1e-12);
    }

    #[test]
    fn pattern_length_checked() {
        let u = table();
        assert!(matches!(
            realization_value(&u, &alloc([1.0, 0.0, 0.0], 0.04), &[true]),
            Err(Error::Dimension { .. })
        ));
    }

    #[test]
    fn plain_return_safe_only() {
        let u = table();
        let (k, d) = (0.04, 1.04);
        let v = expected_return_plain(&u, &alloc([1.0, 0.0, 0.0], k), d).unwrap();
        assert!((v - (1.03 - (1.0 - k) - d * k)).abs() < 1e-15);
    }

    #[test]
    fn plain_return_at_reported_min_risk_point_meets_floor() {
        let u = table();
        let v = expected_return_plain(&u, &alloc([0.0243, 0.1318, 0.8439], 0.04), 1.04).unwrap();
        assert!(v >= 0.098, "{v}");
    }

    #[test]
    fn riskless_risky_loan_is_deterministic() {
        let irb = IrbParams::default();
        let u = LoanUniverse::new(vec![Loan::new("a", 0.07, 0.0, 0.5, &irb).unwrap()]).unwrap();
        let v = expected_return_plain(&u, &alloc1(0.05), 1.04).unwrap();
        assert_eq!(v, 1.07 - 0.95 - 1.04 * 0.05);
    }

    fn alloc1(k: f64) -> Allocation {
        Allocation::new(vec![1.0], k).unwrap()
    }

    #[test]
    fn limited_liability_full_risky_gap() {
        // Default branch is truncated from -0.05 to 0, adding p_r * 0.05.
        let u = table();
        let a = alloc([0.0, 0.0, 1.0], 0.04);
        let plain = expected_return_plain(&u, &a, 1.04).unwrap();
        let ll = expected_return_limited_liability(&u, &a, 1.04).unwrap();
        let hand_plain = (1.0 - PR) * 0.172 + PR * (-0.05) - 1.04 * 0.04;
        let hand_ll = (1.0 - PR) * 0.172 - 1.04 * 0.04;
        assert!((plain - hand_plain).abs() < 1e-14);
        assert!((ll - hand_ll).abs() < 1e-14);
        assert!((ll - plain - PR * 0.05).abs() < 1e-14);
    }

    #[test]
    fn limited_liability_equals_plain_when_no_scenario_is_negative() {
        let u = table();
        let a = alloc([0.0, 0.0, 1.0], 0.10);
        let plain = expected_return_plain(&u, &a, 1.04).unwrap();
        let ll = expected_return_limited_liability(&u, &a, 1.04).unwrap();
        assert!((plain - ll).abs() < 1e-15);
    }

    #[test]
    fn limited_liability_at_reported_point_meets_floor() {
        let u = table();
        let v = expected_return_limited_liability(&u, &alloc([0.0572, 0.1337, 0.8091], 0.04), 1.04)
            .unwrap();
        assert!(v >= 0.098, "{v}");
    }

    #[test]
    fn worst_case_examples() {
        let u = table();
        let w = |x, k| worst_case_net_value(&u, &alloc(x, k)).unwrap();
        assert!((w([0.0, 0.0, 1.0], 0.10) - 0.01).abs() < 1e-12);
        assert!((w([0.0, 0.0, 1.0], 0.07) + 0.02).abs() < 1e-12);
        for k in [0.0, 0.04, 0.5] {
            assert!((w([1.0, 0.0, 0.0], k) - (0.03 + k)).abs() < 1e-12);
        }
    }

    #[test]
    fn ll_gradient_matches_finite_differences_away_from_kinks() {
        let u = table();
        let (x, k, d) = ([0.2, 0.3, 0.5], 0.04, 1.04);
        let mut g = [0.0; 4];
        limited_liability_return_gradient(&u, &x, k, d, &mut g);
        let h = 1e-7;
        let f = |z: [f64; 4]| limited_liability_return(&u, &z[..3], z[3], d);
        let z0 = [x[0], x[1], x[2], k];
        for i in 0..4 {
            let mut zp = z0;
            let mut zm = z0;
            zp[i] += h;
            zm[i] -= h;
            assert!(((f(zp) - f(zm)) / (2.0 * h) - g[i]).abs() < 1e-7);
        }
    }

    fn simplex_point() -> impl Strategy<Value = (Vec<f64>, f64)> {
        (prop::collection::vec(0.0..1.0f64, 3), 0.0..1.0f64).prop_filter_map(
            "nonzero",
            |(raw, k)| {
                let s: f64 = raw.iter().sum();
                (s > 1e-9).then(|| (raw.iter().map(|v| v / s).collect(), k))
            },
        )
    }

    proptest! {
        #[test]
        fn truncation_dominates((x, k) in simplex_point()) {
            let u = table();
            let ll = limited_liability_return(&u, &x, k, 1.04);
            let plain = plain_return(&u, &x, k, 1.04);
            prop_assert!(ll >= plain - 1e-12);
        }

        #[test]
        fn scenario_and_closed_form_returns_agree((x, k) in simplex_point()) {
            let u = table();
            let a = Allocation::new(x.clone(), k).unwrap();
            let by_scenarios = expected_return_plain(&u, &a, 1.04).unwrap();
            prop_assert!((by_scenarios - plain_return(&u, &x, k, 1.04)).abs() < 1e-12);
        }

        #[test]
        fn plain_return_is_affine_in_weights(
            (x, k) in simplex_point(),
            (y, _) in simplex_point(),
            t in 0.0..1.0f64,
        ) {
            let u = table();
            let z: Vec<f64> = x.iter().zip(&y).map(|(a, b)| t * a + (1.0 - t) * b).collect();
            let lhs = plain_return(&u, &z, k, 1.04);
            let rhs = t * plain_return(&u, &x, k, 1.04) + (1.0 - t) * plain_return(&u, &y, k, 1.04);
            prop_assert!((lhs - rhs).abs() < 1e-12);
        }

        #[test]
        fn probabilities_sum_to_one(pds in prop::collection::vec(0.0..0.2f64, 0..12)) {
            let t = ScenarioTable::from_default_probabilities(&pds).unwrap();
            let total: CompensatedSum = t.probabilities().iter().copied().collect();
            prop_assert!((total.total() - 1.0).abs() < 1e-12);
        }
    }
}
