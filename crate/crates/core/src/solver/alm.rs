//! Augmented-Lagrangian local solver with projected-gradient inner steps.

use super::projection::project;
use super::SolverOptions;
use crate::problems::{EvaluatedProblem, Functional};

const ARMIJO: f64 = 1e-4;
/// Window of the nonmonotone Armijo reference value.
const NONMONOTONE_WINDOW: usize = 10;
const MIN_STEP: f64 = 1e-20;
const FD_STEP: f64 = 1e-7;

pub(crate) struct LocalOutcome {
    pub z: Vec<f64>,
    pub converged: bool,
}

/// Central finite differences with the perturbation clamped into the bounds.
fn fd_gradient(f: &Functional, z: &[f64], bounds: &[(f64, f64)], out: &mut [f64]) {
    let mut work = z.to_vec();
    for i in 0..z.len() {
        let h = FD_STEP * z[i].abs().max(1.0);
        let (lo, hi) = bounds[i];
        let up = (z[i] + h).min(hi);
        let down = (z[i] - h).max(lo);
        if up <= down {
            out[i] = 0.0;
            continue;
        }
        work[i] = up;
        let fu = f.eval(&work);
        work[i] = down;
        let fd = f.eval(&work);
        work[i] = z[i];
        out[i] = (fu - fd) / (up - down);
    }
}

pub(crate) fn gradient_of(f: &Functional, z: &[f64], bounds: &[(f64, f64)], out: &mut [f64]) {
    if !f.gradient(z, out) {
        fd_gradient(f, z, bounds, out);
    }
}

/// Inequality scale bounds: each inequality is divided by its start-point
/// gradient norm, clamped into this range. Equalities stay unscaled since the
/// complementarity rows have vanishing gradients where a scenario sits at zero.
const MIN_GRAD_NORM: f64 = 1e-3;
const MAX_GRAD_NORM: f64 = 1.0;

fn constraint_scales(fs: &[Functional], z: &[f64], bounds: &[(f64, f64)]) -> Vec<f64> {
    let mut g = vec![0.0; z.len()];
    fs.iter()
        .map(|f| {
            gradient_of(f, z, bounds, &mut g);
            let norm = g.iter().map(|v| v * v).sum::<f64>().sqrt();
            1.0 / norm.clamp(MIN_GRAD_NORM, MAX_GRAD_NORM)
        })
        .collect()
}

/// Distance an unconstrained first subproblem may travel, which sets the
/// proximal weight from the objective gradient at the start.
const PROX_RADIUS: f64 = 0.1;
const PROX_DECAY: f64 = 0.5;

struct Lagrangian<'a> {
    problem: &'a EvaluatedProblem,
    center: &'a [f64],
    prox: f64,
    ineq_scale: &'a [f64],
    ineq_mult: &'a [f64],
    eq_mult: &'a [f64],
    penalty: f64,
}

impl Lagrangian<'_> {
    /// Minimized merit: −f plus PHR terms.
    fn value(&self, z: &[f64]) -> f64 {
        let p = self.problem;
        let rho = self.penalty;
        let mut v = -p.objective.eval(z);
        v += 0.5
            * self.prox
            * z.iter()
                .zip(self.center)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>();
        for ((g, &lam), &sc) in p
            .ineq_constraints
            .iter()
            .zip(self.ineq_mult)
            .zip(self.ineq_scale)
        {
            let s = (lam - rho * sc * g.eval(z)).max(0.0);
            v += (s * s - lam * lam) / (2.0 * rho);
        }
        for (h, &nu) in p.eq_constraints.iter().zip(self.eq_mult) {
            let hv = h.eval(z);
            v += nu * hv + 0.5 * rho * hv * hv;
        }
        v
    }

    fn gradient(&self, z: &[f64], out: &mut [f64], scratch: &mut [f64]) {
        let p = self.problem;
        let rho = self.penalty;
        gradient_of(&p.objective, z, &p.bounds, scratch);
        for ((o, s), (zi, ci)) in out
            .iter_mut()
            .zip(scratch.iter())
            .zip(z.iter().zip(self.center))
        {
            *o = -s + self.prox * (zi - ci);
        }
        for ((g, &lam), &sc) in p
            .ineq_constraints
            .iter()
            .zip(self.ineq_mult)
            .zip(self.ineq_scale)
        {
            let s = (lam - rho * sc * g.eval(z)).max(0.0);
            if s > 0.0 {
                gradient_of(g, z, &p.bounds, scratch);
                for (o, d) in out.iter_mut().zip(scratch.iter()) {
                    *o -= s * sc * d;
                }
            }
        }
        for (h, &nu) in p.eq_constraints.iter().zip(self.eq_mult) {
            let w = nu + rho * h.eval(z);
            if w != 0.0 {
                gradient_of(h, z, &p.bounds, scratch);
                for (o, d) in out.iter_mut().zip(scratch.iter()) {
                    *o += w * d;
                }
            }
        }
    }
}

fn inf_norm_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Spectral projected gradient: Barzilai–Borwein steps with nonmonotone
/// Armijo backtracking along the projection arc. Returns whether the projected-gradient norm
/// dropped below `tol`.
fn minimize_inner(merit: &Lagrangian, z: &mut [f64], max_iter: usize, tol: f64) -> bool {
    let p = merit.problem;
    let nw = p.n_weights();
    let dim = z.len();
    let mut grad = vec![0.0; dim];
    let mut scratch = vec![0.0; dim];
    let mut trial = vec![0.0; dim];
    let mut f = merit.value(z);
    merit.gradient(z, &mut grad, &mut scratch);
    let mut step = 1.0;
    let mut history = std::collections::VecDeque::with_capacity(NONMONOTONE_WINDOW);
    history.push_back(f);
    for _ in 0..max_iter {
        trial.copy_from_slice(z);
        for (t, g) in trial.iter_mut().zip(&grad) {
            *t -= g;
        }
        project(&mut trial, nw, &p.bounds);
        if inf_norm_diff(&trial, z) <= tol {
            return true;
        }

        let f_ref = history.iter().copied().fold(f, f64::max);
        let mut alpha = step;
        let accepted = loop {
            for i in 0..dim {
                trial[i] = z[i] - alpha * grad[i];
            }
            project(&mut trial, nw, &p.bounds);
            let decrease: f64 = grad
                .iter()
                .zip(trial.iter().zip(z.iter()))
                .map(|(g, (t, x))| g * (t - x))
                .sum();
            let ft = merit.value(&trial);
            if ft <= f_ref + ARMIJO * decrease || (ft < f && decrease >= 0.0) {
                break Some(ft);
            }
            alpha *= 0.5;
            if alpha < MIN_STEP {
                break None;
            }
        };
        let Some(f_new) = accepted else {
            return false;
        };

        let mut g_new = vec![0.0; dim];
        merit.gradient(&trial, &mut g_new, &mut scratch);
        let (mut ss, mut sy) = (0.0, 0.0);
        for i in 0..dim {
            let s = trial[i] - z[i];
            ss += s * s;
            sy += s * (g_new[i] - grad[i]);
        }
        step = if sy > 0.0 {
            (ss / sy).clamp(1e-12, 1e12)
        } else {
            (alpha * 4.0).min(1e12)
        };
        let moved = ss.sqrt();
        let gain = f - f_new;
        z.copy_from_slice(&trial);
        grad = g_new;
        f = f_new;
        if history.len() == NONMONOTONE_WINDOW {
            history.pop_front();
        }
        history.push_back(f);
        if moved <= f64::EPSILON * 4.0 && gain <= f64::EPSILON * f.abs().max(1.0) {
            return false;
        }
    }
    false
}

/// One augmented-Lagrangian run from `start`.
pub(crate) fn solve_local(
    problem: &EvaluatedProblem,
    start: Vec<f64>,
    opts: &SolverOptions,
) -> LocalOutcome {
    let mut z = start;
    project(&mut z, problem.n_weights(), &problem.bounds);
    problem.close_aux(&mut z);
    let ineq_scale = constraint_scales(&problem.ineq_constraints, &z, &problem.bounds);
    let mut prox = {
        let mut g = vec![0.0; z.len()];
        gradient_of(&problem.objective, &z, &problem.bounds, &mut g);
        g.iter().map(|v| v * v).sum::<f64>().sqrt().max(1e-3) / PROX_RADIUS
    };
    let mut ineq_mult = vec![0.0; problem.ineq_constraints.len()];
    let mut eq_mult = vec![0.0; problem.eq_constraints.len()];
    let mut penalty = opts.penalty_init;
    let mut prev_violation = f64::INFINITY;
    let mut prev_obj = problem.objective.eval(&z);
    let mut converged = false;

    for _ in 0..opts.max_outer {
        let before = z.clone();
        let inner_ok = {
            let merit = Lagrangian {
                problem,
                center: &before,
                prox,
                ineq_scale: &ineq_scale,
                ineq_mult: &ineq_mult,
                eq_mult: &eq_mult,
                penalty,
            };
            minimize_inner(&merit, &mut z, opts.max_inner, opts.tol_opt)
        };

        // exact minimization over the aux block for the current (x, k)
        problem.close_aux(&mut z);
        let violation = problem.max_violation(&z);
        // complementarity: a slack constraint must not keep a multiplier
        let mut kkt = violation;
        for ((lam, g), sc) in ineq_mult
            .iter_mut()
            .zip(&problem.ineq_constraints)
            .zip(&ineq_scale)
        {
            let gv = sc * g.eval(&z);
            kkt = kkt.max(gv.min(*lam / penalty));
            *lam = (*lam - penalty * gv).max(0.0);
        }
        for (nu, h) in eq_mult.iter_mut().zip(&problem.eq_constraints) {
            *nu += penalty * h.eval(&z);
        }

        let obj = problem.objective.eval(&z);
        let moved = inf_norm_diff(&before, &z);
        let still = moved <= opts.tol_opt.sqrt()
            && (obj - prev_obj).abs() <= opts.tol_opt * (1.0 + obj.abs());
        // the proximal pull is the remaining stationarity error
        if kkt <= opts.tol_feas && prox * moved <= opts.tol_opt.sqrt() && (still || inner_ok) {
            converged = true;
            break;
        }
        // complementarity is left to the multiplier updates; a harder penalty
        // is pointless while the current subproblem is not solved
        if inner_ok && violation > opts.tol_feas && violation > 0.25 * prev_violation {
            penalty = (penalty * opts.penalty_growth).min(opts.penalty_max);
        }
        prev_violation = violation;
        prev_obj = obj;
        prox *= PROX_DECAY;
    }
    LocalOutcome { z, converged }
}
