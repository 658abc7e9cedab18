//! Reference solvers: simultaneous gradient descent ascent and the minimax
//! cubic-regularized Newton method.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::inner::{ascend, certified_distance, schedule_counts, AscentSchedule};
use crate::linalg::min_eigenvalue;
use crate::problem::{check_dims, schur_hessian, MinimaxProblem, ProblemConstants};
use crate::record::{row, Recorder, RunResult, RunStatus, SspCertificate};
use crate::tr::default_max_outer;
use crate::trs::solve_cubic;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GdaConfig {
    /// Defaults to `1 / L_P`.
    pub eta_x: Option<f64>,
    /// Defaults to `1 / ℓ`.
    pub eta_y: Option<f64>,
    pub max_iter: usize,
    /// Stop once `‖∇_x f‖ ≤ grad_tol`.
    pub grad_tol: f64,
    /// Record every k-th iteration (the last one is always recorded).
    pub record_every: usize,
    pub record_trajectory: bool,
    /// Keep `x_t` alongside each trajectory row.
    pub record_iterates: bool,
    pub max_wall_time_s: Option<f64>,
}

impl Default for GdaConfig {
    fn default() -> Self {
        Self {
            eta_x: None,
            eta_y: None,
            max_iter: 1_000_000,
            grad_tol: 1e-6,
            record_every: 1,
            record_trajectory: true,
            record_iterates: false,
            max_wall_time_s: None,
        }
    }
}

impl GdaConfig {
    pub fn step_sizes(&self, c: &ProblemConstants) -> (f64, f64) {
        (self.eta_x.unwrap_or(1.0 / c.l_p), self.eta_y.unwrap_or(1.0 / c.ell))
    }
}

/// `x ← x − η_x ∇_x f(x, y)`, `y ← y + η_y ∇_y f(x, y)`, both gradients taken
/// at the old pair. Trajectory rows carry `lambda = 0` and `delta = η_x`.
pub fn run_gda<P: MinimaxProblem + ?Sized>(
    problem: &P,
    x0: &DVector<f64>,
    y0: &DVector<f64>,
    config: &GdaConfig,
) -> Result<RunResult> {
    check_dims(problem, x0, y0)?;
    let (eta_x, eta_y) = config.step_sizes(problem.constants());
    if !(eta_x > 0.0 && eta_y > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "GDA step sizes must be positive, got eta_x = {eta_x}, eta_y = {eta_y}"
        )));
    }
    if config.record_every == 0 {
        return Err(Error::InvalidConfig("record_every must be at least 1".into()));
    }
    let mut rec = Recorder::new(problem, config.record_trajectory, config.record_iterates);
    let mut x = x0.clone();
    let mut y = y0.clone();
    let mut status = RunStatus::BudgetExhausted;
    let mut iter = 0;
    loop {
        let gx = problem.grad_x(&x, &y);
        let gy = problem.grad_y(&x, &y);
        let converged = gx.norm() <= config.grad_tol;
        let out_of_iters = iter >= config.max_iter;
        let out_of_time = rec.over_budget(config.max_wall_time_s);
        let last = converged || out_of_iters || out_of_time;
        let step = &gx * eta_x;
        if last || iter % config.record_every == 0 {
            let step_norm = if last { 0.0 } else { step.norm() };
            rec.push(row(iter, problem.value(&x, &y), gx.norm(), step_norm, 0.0, eta_x, 0), &x);
        }
        if converged {
            status = RunStatus::Converged;
            break;
        }
        if out_of_time {
            status = RunStatus::TimeLimit;
            break;
        }
        if out_of_iters {
            break;
        }
        x -= step;
        y += gy * eta_y;
        iter += 1;
    }
    Ok(RunResult {
        status,
        x,
        y,
        certificate: None,
        trajectory: std::mem::take(&mut rec.rows),
        iterates: std::mem::take(&mut rec.iterates),
        step_counts: None,
        outer_iterations: iter,
        total_inner_iterations: 0,
        wall_time_s: rec.elapsed(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct McnConfig {
    pub eps: f64,
    /// Cubic weight; defaults to `H_Lip`.
    #[serde(rename = "M")]
    pub m: Option<f64>,
    pub eps1: Option<f64>,
    pub eps2: Option<f64>,
    /// Defaults to the fixed-radius method's theoretical cap.
    pub max_outer: Option<usize>,
    pub record_trajectory: bool,
    /// Keep `x_t` alongside each trajectory row.
    pub record_iterates: bool,
    pub max_wall_time_s: Option<f64>,
}

impl Default for McnConfig {
    fn default() -> Self {
        Self {
            eps: 1e-4,
            m: None,
            eps1: None,
            eps2: None,
            max_outer: None,
            record_trajectory: true,
            record_iterates: false,
            max_wall_time_s: None,
        }
    }
}

impl McnConfig {
    pub fn new(eps: f64) -> Self {
        Self { eps, ..Self::default() }
    }

    pub fn weight(&self, c: &ProblemConstants) -> f64 {
        self.m.unwrap_or(c.h_lip)
    }

    /// `½ √(ε / H_Lip)`.
    pub fn step_threshold(&self, c: &ProblemConstants) -> f64 {
        0.5 * (self.eps / c.h_lip).sqrt()
    }
}

/// Cubic-regularized Newton on `P` with the fixed inner schedule.
///
/// Stops, returning `x_{t+1}`, once `max{‖s_t‖, ‖s_{t−1}‖} ≤ ½√(ε/H_Lip)`
/// (only `‖s_0‖` at `t = 0`). Rows carry the cubic multiplier `(M/2)‖s‖` as
/// `lambda` and `M` as `delta`.
pub fn run_mcn<P: MinimaxProblem + ?Sized>(
    problem: &P,
    x0: &DVector<f64>,
    y_init: &DVector<f64>,
    config: &McnConfig,
) -> Result<RunResult> {
    check_dims(problem, x0, y_init)?;
    let c = *problem.constants();
    if !(config.eps > 0.0) {
        return Err(Error::InvalidConfig(format!("eps must be positive, got {}", config.eps)));
    }
    let m = config.weight(&c);
    if !(m > 0.0) || !m.is_finite() {
        return Err(Error::InvalidRegularization(m));
    }
    let eps1 = config.eps1.unwrap_or(config.eps / 12.0);
    let eps2 = config.eps2.unwrap_or((config.eps * c.h_lip).sqrt() / 6.0);
    let threshold = config.step_threshold(&c);
    let max_outer = match config.max_outer {
        Some(n) => n,
        None => default_max_outer(problem, x0, y_init, config.eps)?,
    };

    let mut rec = Recorder::new(problem, config.record_trajectory, config.record_iterates);
    let dist0 = certified_distance(problem, x0, y_init);
    let mut x = x0.clone();
    let mut y = y_init.clone();
    let mut prev_step: Option<f64> = None;
    let mut total_inner = 0;
    let mut status = RunStatus::BudgetExhausted;
    let mut outer = 0;

    while outer < max_outer {
        if rec.over_budget(config.max_wall_time_s) {
            status = RunStatus::TimeLimit;
            break;
        }
        let t = outer;
        let n_t = schedule_counts(&c, eps1, eps2, dist0, prev_step.unwrap_or(0.0), t)?;
        y = ascend(problem, &x, &y, &AscentSchedule::fixed(&c, n_t))?.y;
        total_inner += n_t;
        let g = problem.grad_x(&x, &y);
        let h = schur_hessian(problem, &x, &y)?;
        let sol = solve_cubic(&g, &h, m)?;
        let step_norm = sol.s.norm();
        rec.push(row(t, problem.value(&x, &y), g.norm(), step_norm, sol.nu, m, n_t), &x);
        outer += 1;

        let x_next = &x + &sol.s;
        if step_norm.max(prev_step.unwrap_or(0.0)) <= threshold {
            let d = certified_distance(problem, &x, &y);
            let certificate = SspCertificate {
                x: x_next.clone(),
                grad_norm_bound: 0.5 * (c.h_lip + m) * step_norm * step_norm + c.ell * d + c.l_h * d * step_norm,
                hessian_eigen_bound: min_eigenvalue(&h) - c.l_h * d - c.h_lip * step_norm,
                terminated_by_dual: false,
                outer_iterations: outer,
                total_inner_iterations: total_inner,
            };
            return Ok(RunResult {
                status: RunStatus::Converged,
                x: x_next,
                y,
                certificate: Some(certificate),
                trajectory: std::mem::take(&mut rec.rows),
                iterates: std::mem::take(&mut rec.iterates),
                step_counts: None,
                outer_iterations: outer,
                total_inner_iterations: total_inner,
                wall_time_s: rec.elapsed(),
            });
        }
        x = x_next;
        prev_step = Some(step_norm);
    }

    Ok(RunResult {
        status,
        x,
        y,
        certificate: None,
        trajectory: std::mem::take(&mut rec.rows),
        iterates: std::mem::take(&mut rec.iterates),
        step_counts: None,
        outer_iterations: outer,
        total_inner_iterations: total_inner,
        wall_time_s: rec.elapsed(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::test_problems::Quad;

    fn v(xs: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(xs)
    }

    #[test]
    fn gda_converges_on_squared_primal() {
        let p = Quad::scalar();
        let cfg = GdaConfig {
            eta_x: Some(0.1),
            eta_y: Some(0.1),
            max_iter: 400,
            grad_tol: 0.0,
            ..GdaConfig::default()
        };
        let out = run_gda(&p, &v(&[1.0]), &v(&[0.0]), &cfg).unwrap();
        assert!(out.x[0].abs() <= 1e-6, "{}", out.x[0]);
        assert_eq!(out.trajectory.len(), 401);
    }

    #[test]
    fn gda_records_sparsely() {
        let p = Quad::scalar();
        let cfg = GdaConfig { max_iter: 10, grad_tol: 0.0, record_every: 4, ..GdaConfig::default() };
        let out = run_gda(&p, &v(&[1.0]), &v(&[0.0]), &cfg).unwrap();
        let iters: Vec<_> = out.trajectory.iter().map(|r| r.iter).collect();
        assert_eq!(iters, vec![0, 4, 8, 10]);
    }

    #[test]
    fn mcn_converges_on_squared_primal() {
        let p = Quad::scalar();
        let eps = 1e-2;
        let out = run_mcn(&p, &v(&[1.0]), &v(&[0.0]), &McnConfig::new(eps)).unwrap();
        assert_eq!(out.status, RunStatus::Converged);
        assert!(p.primal_gradient(&out.x).unwrap().norm() <= eps);
    }

    #[test]
    fn mcn_stops_on_zero_step() {
        let p = Quad::scalar();
        let out = run_mcn(&p, &v(&[0.0]), &v(&[0.0]), &McnConfig::new(1e-2)).unwrap();
        assert_eq!(out.outer_iterations, 1);
        assert_eq!(out.trajectory[0].step_norm, 0.0);
    }
}
