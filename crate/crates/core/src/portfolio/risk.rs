use nalgebra::{DMatrix, SymmetricEigen};

use super::{Allocation, LoanUniverse};
use crate::error::{Error, Result};

/// Default-correlation matrix used by the unexpected-loss quadratic form.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationMatrix {
    n: usize,
    data: Vec<f64>,
}

impl CorrelationMatrix {
    /// Uncorrelated defaults.
    pub fn identity(n: usize) -> Self {
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            data[i * n + i] = 1.0;
        }
        Self { n, data }
    }

    /// Row-major `n × n` matrix; must be symmetric, unit-diagonal and PSD.
    pub fn new(n: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != n * n {
            return Err(Error::Dimension {
                what: "correlation matrix entries",
                expected: n * n,
                got: data.len(),
            });
        }
        for i in 0..n {
            if (data[i * n + i] - 1.0).abs() > 1e-12 {
                return Err(Error::Domain {
                    what: "correlation diagonal",
                    value: data[i * n + i],
                    reason: "diagonal entries must equal 1",
                });
            }
            for j in 0..i {
                if (data[i * n + j] - data[j * n + i]).abs() > 1e-12 {
                    return Err(Error::Domain {
                        what: "correlation asymmetry",
                        value: data[i * n + j] - data[j * n + i],
                        reason: "matrix must be symmetric",
                    });
                }
            }
        }
        let eig = SymmetricEigen::new(DMatrix::from_row_slice(n, n, &data));
        let min = eig
            .eigenvalues
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min);
        if min < -1e-10 {
            return Err(Error::Domain {
                what: "correlation min eigenvalue",
                value: min,
                reason: "matrix must be positive semidefinite",
            });
        }
        Ok(Self { n, data })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }
}

/// EL = Σ x_i p_i λ_i.
pub fn expected_loss(universe: &LoanUniverse, alloc: &Allocation) -> Result<f64> {
    universe.check_len("allocation weights", alloc.weights().len())?;
    Ok(expected_loss_of(universe, alloc.weights()))
}

pub fn expected_loss_of(universe: &LoanUniverse, weights: &[f64]) -> f64 {
    universe
        .loans()
        .iter()
        .zip(weights)
        .map(|(l, x)| x * l.pd * l.lgd)
        .sum()
}

pub fn expected_loss_gradient(universe: &LoanUniverse) -> Vec<f64> {
    universe.loans().iter().map(|l| l.pd * l.lgd).collect()
}

/// UL = √(Σ_i Σ_j x_i x_j ρ_ij UL_i UL_j).
pub fn unexpected_loss(
    universe: &LoanUniverse,
    alloc: &Allocation,
    corr: &CorrelationMatrix,
) -> Result<f64> {
    universe.check_len("allocation weights", alloc.weights().len())?;
    unexpected_loss_of(universe, alloc.weights(), corr)
}

fn quadratic_form(
    universe: &LoanUniverse,
    weights: &[f64],
    corr: &CorrelationMatrix,
) -> Result<f64> {
    universe.check_len("correlation matrix", corr.dim())?;
    let scaled: Vec<f64> = universe
        .loans()
        .iter()
        .zip(weights)
        .map(|(l, x)| x * l.unexpected_loss())
        .collect();
    let mut q = 0.0;
    for i in 0..scaled.len() {
        for j in 0..scaled.len() {
            q += scaled[i] * scaled[j] * corr.get(i, j);
        }
    }
    if q < -1e-15 {
        return Err(Error::Domain {
            what: "UL quadratic form",
            value: q,
            reason: "negative quadratic form; correlation matrix is not PSD",
        });
    }
    Ok(q.max(0.0))
}

pub fn unexpected_loss_of(
    universe: &LoanUniverse,
    weights: &[f64],
    corr: &CorrelationMatrix,
) -> Result<f64> {
    Ok(quadratic_form(universe, weights, corr)?.sqrt())
}

/// Gradient of UL in the weights; zero where UL vanishes.
pub fn unexpected_loss_gradient(
    universe: &LoanUniverse,
    weights: &[f64],
    corr: &CorrelationMatrix,
) -> Result<Vec<f64>> {
    let ul = unexpected_loss_of(universe, weights, corr)?;
    let uls: Vec<f64> = universe
        .loans()
        .iter()
        .map(|l| l.unexpected_loss())
        .collect();
    let n = uls.len();
    if ul <= 1e-300 {
        return Ok(vec![0.0; n]);
    }
    Ok((0..n)
        .map(|i| {
            let s: f64 = (0..n).map(|j| corr.get(i, j) * uls[j] * weights[j]).sum();
            uls[i] * s / ul
        })
        .collect())
}
