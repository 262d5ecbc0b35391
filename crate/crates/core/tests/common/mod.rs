#![allow(dead_code)]

use std::sync::Arc;

use loanopt::numerics::IrbParams;
use loanopt::portfolio::{expected_loss_of, plain_return, Loan, LoanUniverse};
use loanopt::problems::{ModelParams, RiskMeasure};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// A random universe of `n` loans (rates in [0.02, 0.20], PDs in [0, 0.19],
/// LGDs in [0.05, 0.6]) with μ and θ between the best and worst single-loan
/// portfolios, so every model is feasible.
pub struct Instance {
    pub universe: Arc<LoanUniverse>,
    pub params: ModelParams,
}

pub fn random_instance(rng: &mut ChaCha8Rng, n: usize) -> Instance {
    let irb = IrbParams::default();
    let loans = (0..n)
        .map(|i| {
            Loan::new(
                format!("loan{i}"),
                rng.random_range(0.02..0.20),
                rng.random_range(0.0..0.19),
                rng.random_range(0.05..0.6),
                &irb,
            )
            .unwrap()
        })
        .collect();
    let universe = LoanUniverse::new(loans).unwrap();
    let delta: f64 = rng.random_range(1.01..1.1);
    let k_lev: f64 = rng.random_range(0.02..0.08);

    let mut ret = (f64::INFINITY, f64::NEG_INFINITY);
    let mut el = (f64::INFINITY, f64::NEG_INFINITY);
    for i in 0..n {
        let mut w = vec![0.0; n];
        w[i] = 1.0;
        let k = k_lev.max(universe.portfolio_capital(&w));
        let r = plain_return(&universe, &w, k, delta);
        let e = expected_loss_of(&universe, &w);
        ret = (ret.0.min(r), ret.1.max(r));
        el = (el.0.min(e), el.1.max(e));
    }
    let mu = ret.0 + rng.random_range(0.0..0.9) * (ret.1 - ret.0);
    let theta = el.0 + rng.random_range(0.1..1.0) * (el.1 - el.0);
    Instance {
        universe: Arc::new(universe),
        params: ModelParams {
            delta,
            k_lev,
            risk_measure: RiskMeasure::ExpectedLoss,
            mu: Some(mu),
            theta: Some(theta),
            correlation: None,
        },
    }
}
