use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::IrbParams;
use crate::portfolio::{Loan, LoanUniverse, SafeLeg};
use crate::problems::{ModelParams, RiskMeasure};
use crate::solver::SolverOptions;

/// The three-loan reference configuration bundled with the crate.
pub const TABLE3_JSON: &str = include_str!("../../data/table3.json");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LoanRecord {
    pub id: String,
    pub rate: f64,
    pub pd: f64,
    pub lgd: f64,
    /// Filled from the IRB formula when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub capital_req: Option<f64>,
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsConfig {
    pub delta: f64,
    pub k_lev: f64,
    pub rho_asset: f64,
    pub confidence: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<f64>,
    pub risk_measure: RiskMeasure,
    /// Safe loans pay back principal plus interest when true, interest only
    /// when false.
    #[serde(default = "yes")]
    pub gross_safe_leg: bool,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub universe: Vec<LoanRecord>,
    pub params: ParamsConfig,
    #[serde(default)]
    pub solver: SolverOptions,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn table3() -> Self {
        Self::from_json(TABLE3_JSON).expect("bundled config is valid")
    }

    /// Checks everything that can be checked without a model kind.
    pub fn validate(&self) -> Result<()> {
        self.universe()?;
        self.solver.validate()?;
        let p = &self.params;
        if !(p.delta > 1.0 && p.delta.is_finite()) {
            return Err(Error::Config(format!(
                "params.delta must exceed 1, got {}",
                p.delta
            )));
        }
        if !(p.k_lev > 0.0 && p.k_lev < 1.0) {
            return Err(Error::Config(format!(
                "params.k_lev must lie in (0, 1), got {}",
                p.k_lev
            )));
        }
        for (name, v) in [("mu", p.mu), ("theta", p.theta)] {
            if let Some(v) = v {
                if !v.is_finite() {
                    return Err(Error::Config(format!("params.{name} must be finite")));
                }
            }
        }
        Ok(())
    }

    pub fn irb_params(&self) -> Result<IrbParams> {
        IrbParams::new(self.params.rho_asset, self.params.confidence)
            .map_err(|e| Error::Config(format!("params: {e}")))
    }

    pub fn safe_leg(&self) -> SafeLeg {
        if self.params.gross_safe_leg {
            SafeLeg::Gross
        } else {
            SafeLeg::InterestOnly
        }
    }

    pub fn universe(&self) -> Result<LoanUniverse> {
        let irb = self.irb_params()?;
        let loans = self
            .universe
            .iter()
            .enumerate()
            .map(|(i, rec)| {
                let loan = match rec.capital_req {
                    Some(c) => Loan::with_capital(rec.id.clone(), rec.rate, rec.pd, rec.lgd, c),
                    None => Loan::new(rec.id.clone(), rec.rate, rec.pd, rec.lgd, &irb),
                };
                loan.map_err(|e| Error::Config(format!("universe[{i}] ({}): {e}", rec.id)))
            })
            .collect::<Result<Vec<_>>>()?;
        LoanUniverse::with_safe_leg(loans, self.safe_leg()).map_err(|e| match e {
            Error::Capacity { .. } => e,
            other => Error::Config(format!("universe: {other}")),
        })
    }

    pub fn model_params(&self) -> ModelParams {
        ModelParams {
            delta: self.params.delta,
            k_lev: self.params.k_lev,
            risk_measure: self.params.risk_measure,
            mu: self.params.mu,
            theta: self.params.theta,
            correlation: None,
        }
    }
}
