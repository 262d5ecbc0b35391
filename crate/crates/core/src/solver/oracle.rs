use super::{SolveResult, SolveStatus};
use crate::error::{Error, Result};
use crate::problems::EvaluatedProblem;

/// Largest universe the exhaustive scan accepts.
pub const ORACLE_MAX_LOANS: usize = 4;

/// Acceptance slack on grid points; linear constraints hold exactly there.
const GRID_FEAS_TOL: f64 = 1e-12;

pub(crate) fn for_each_composition(parts: usize, total: usize, f: &mut impl FnMut(&[usize])) {
    fn rec(buf: &mut Vec<usize>, parts: usize, left: usize, f: &mut impl FnMut(&[usize])) {
        if buf.len() + 1 == parts {
            buf.push(left);
            f(buf);
            buf.pop();
            return;
        }
        for c in (0..=left).rev() {
            buf.push(c);
            rec(buf, parts, left - c, f);
            buf.pop();
        }
    }
    let mut buf = Vec::with_capacity(parts);
    rec(&mut buf, parts, total, f);
}

/// Exhaustive scan of the weight simplex at `resolution`.
///
/// Capital starts at max(k_lev, K(x)). Return-maximizing models stop there;
/// risk-minimizing models also try larger `k` in steps of `resolution` while
/// the constraint violation keeps shrinking. Auxiliary variables of a
/// reformulated problem are set to max(R_s, 0).
pub fn grid_oracle<P: AsRef<EvaluatedProblem>>(
    problem: &P,
    resolution: f64,
) -> Result<SolveResult> {
    let problem = problem.as_ref();
    let n = problem.n_weights();
    if n > ORACLE_MAX_LOANS {
        return Err(Error::Config(format!(
            "grid oracle supports at most {ORACLE_MAX_LOANS} loans, got {n}"
        )));
    }
    if !(resolution > 0.0 && resolution < 1.0) {
        return Err(Error::Config(format!(
            "resolution {resolution} must lie in (0, 1)"
        )));
    }
    let steps = (1.0 / resolution).round();
    if (steps * resolution - 1.0).abs() > 1e-9 {
        return Err(Error::Config(format!(
            "resolution {resolution} does not divide 1"
        )));
    }
    let steps = steps as usize;
    let (_, k_hi) = problem.bounds[n];
    let scan_capital = problem.kind().is_min_risk();

    let mut best: Option<(f64, Vec<f64>, usize)> = None;
    let mut least_bad: Option<(f64, Vec<f64>, usize)> = None;
    let mut index = 0usize;
    let mut weights = vec![0.0; n];
    for_each_composition(n, steps, &mut |counts| {
        for (w, &c) in weights.iter_mut().zip(counts) {
            *w = c as f64 / steps as f64;
        }
        let k0 = problem.spec.capital_floor(&weights);
        let mut j = 0usize;
        let mut prev_violation = f64::INFINITY;
        loop {
            let k = k0 + j as f64 * resolution;
            if k > k_hi + 1e-12 {
                break;
            }
            let z = problem.point(&weights, k.min(k_hi));
            let violation = problem.max_violation(&z);
            if violation <= GRID_FEAS_TOL {
                let obj = problem.objective.eval(&z);
                if best.as_ref().is_none_or(|(b, _, _)| obj > *b) {
                    best = Some((obj, z, index));
                }
                break;
            }
            if least_bad.as_ref().is_none_or(|(v, _, _)| violation < *v) {
                least_bad = Some((violation, z, index));
            }
            if !scan_capital || violation >= prev_violation {
                break;
            }
            prev_violation = violation;
            j += 1;
        }
        index += 1;
    });

    let (status, z, at) = match (best, least_bad) {
        (Some((_, z, i)), _) => (SolveStatus::Converged, z, i),
        (None, Some((_, z, i))) => (SolveStatus::InfeasibleDetected, z, i),
        (None, None) => unreachable!("grid has at least one point"),
    };
    Ok(SolveResult {
        x_star: z[..n].to_vec(),
        k_star: z[n],
        aux: z[n + 1..].to_vec(),
        objective: problem.objective.eval(&z),
        feasibility_residual: problem.max_violation(&z),
        status,
        starts_used: index,
        best_start_index: at,
    })
}
