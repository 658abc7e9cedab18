//! Fixed-radius inexact trust region on the primal function.
//!
//! Each outer iteration ascends `y` for a scheduled number of steps, forms
//! `g_t = ∇_x f(x_t, y_t)` and the Schur Hessian `H_t`, and takes the exact
//! trust-region step of radius `r`.
//!
//! # The dual variable
//!
//! The subproblem solver returns the raw multiplier `ν` of
//! `(H_t + νI)s = −g_t`. The method's stopping rule is phrased in terms of the
//! scaled dual `λ_t = 2ν / H_Lip`, i.e. the optimality system is read as
//! `g_t + H_t s_t + (λ_t H_Lip / 2) s_t = 0`. The iteration stops, returning
//! `x_{t+1} = x_t + s_t`, as soon as `λ_t ≤ 2√(ε / H_Lip)`.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::inner::{ascend, certified_distance, schedule_counts, AscentSchedule};
use crate::linalg::min_eigenvalue;
use crate::problem::{check_dims, schur_hessian, MinimaxProblem, ProblemConstants};
use crate::record::{row, Recorder, RunResult, RunStatus, SspCertificate};
use crate::trs::{solve_trs, KKT_TOL};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrConfig {
    pub eps: f64,
    /// Gradient accuracy; defaults to `ε/12`.
    pub eps1: Option<f64>,
    /// Hessian accuracy; defaults to `√(ε H_Lip)/6`.
    pub eps2: Option<f64>,
    /// Defaults to `√(ε / H_Lip)`.
    pub radius: Option<f64>,
    /// Defaults to `⌈6 √H_Lip (P(x₀) − P_lower) / ε^1.5⌉`.
    pub max_outer: Option<usize>,
    pub record_trajectory: bool,
    /// Keep `x_t` alongside each trajectory row.
    pub record_iterates: bool,
    pub max_wall_time_s: Option<f64>,
}

impl Default for TrConfig {
    fn default() -> Self {
        Self {
            eps: 1e-4,
            eps1: None,
            eps2: None,
            radius: None,
            max_outer: None,
            record_trajectory: true,
            record_iterates: false,
            max_wall_time_s: None,
        }
    }
}

impl TrConfig {
    pub fn new(eps: f64) -> Self {
        Self { eps, ..Self::default() }
    }

    pub fn eps1(&self) -> f64 {
        self.eps1.unwrap_or(self.eps / 12.0)
    }

    pub fn eps2(&self, c: &ProblemConstants) -> f64 {
        self.eps2.unwrap_or((self.eps * c.h_lip).sqrt() / 6.0)
    }

    pub fn radius(&self, c: &ProblemConstants) -> f64 {
        self.radius.unwrap_or((self.eps / c.h_lip).sqrt())
    }

    /// The scaled-dual threshold `2√(ε / H_Lip)`.
    pub fn dual_threshold(&self, c: &ProblemConstants) -> f64 {
        2.0 * (self.eps / c.h_lip).sqrt()
    }

    pub fn validate(&self, c: &ProblemConstants) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidConfig(format!("{name} must be positive and finite, got {v}")))
            }
        };
        positive("eps", self.eps)?;
        positive("eps1", self.eps1())?;
        positive("eps2", self.eps2(c))?;
        positive("radius", self.radius(c))?;
        if let Some(t) = self.max_wall_time_s {
            positive("max_wall_time_s", t)?;
        }
        Ok(())
    }
}

/// Upper bound on `P(x)`: the analytic value when available, otherwise
/// `f(x, y) + ‖∇_y f(x, y)‖² / (2μ)` from strong concavity.
pub fn primal_upper_bound<P: MinimaxProblem + ?Sized>(problem: &P, x: &DVector<f64>, y: &DVector<f64>) -> f64 {
    if let Some(p) = problem.primal_value(x) {
        return p;
    }
    let gy = problem.grad_y(x, y);
    problem.value(x, y) + gy.norm_squared() / (2.0 * problem.constants().mu)
}

/// Iteration cap `⌈6 √H_Lip (P(x₀) − P_lower) / ε^1.5⌉`, at least 1.
pub fn default_max_outer<P: MinimaxProblem + ?Sized>(
    problem: &P,
    x0: &DVector<f64>,
    y0: &DVector<f64>,
    eps: f64,
) -> Result<usize> {
    let c = problem.constants();
    if !c.p_lower.is_finite() {
        return Err(Error::InvalidConfig(
            "max_outer must be set explicitly when no finite lower bound on P is known".into(),
        ));
    }
    let gap = (primal_upper_bound(problem, x0, y0) - c.p_lower).max(0.0);
    let cap = (6.0 * c.h_lip.sqrt() * gap / eps.powf(1.5)).ceil();
    Ok(if cap >= usize::MAX as f64 { usize::MAX } else { (cap as usize).max(1) })
}

pub fn run_minimax_tr<P: MinimaxProblem + ?Sized>(
    problem: &P,
    x0: &DVector<f64>,
    y_init: &DVector<f64>,
    config: &TrConfig,
) -> Result<RunResult> {
    check_dims(problem, x0, y_init)?;
    let c = *problem.constants();
    config.validate(&c)?;
    let (eps1, eps2, r) = (config.eps1(), config.eps2(&c), config.radius(&c));
    let threshold = config.dual_threshold(&c);
    let max_outer = match config.max_outer {
        Some(m) => m,
        None => default_max_outer(problem, x0, y_init, config.eps)?,
    };

    let mut rec = Recorder::new(problem, config.record_trajectory, config.record_iterates);
    let dist0 = certified_distance(problem, x0, y_init);
    let mut x = x0.clone();
    let mut y = y_init.clone();
    let mut prev_step = 0.0;
    let mut total_inner = 0;
    let mut best: Option<(f64, DVector<f64>, DVector<f64>)> = None;
    let mut status = RunStatus::BudgetExhausted;
    let mut outer = 0;

    while outer < max_outer {
        if rec.over_budget(config.max_wall_time_s) {
            status = RunStatus::TimeLimit;
            break;
        }
        let t = outer;
        let n_t = schedule_counts(&c, eps1, eps2, dist0, prev_step, t)?;
        y = ascend(problem, &x, &y, &AscentSchedule::fixed(&c, n_t))?.y;
        total_inner += n_t;

        let g = problem.grad_x(&x, &y);
        let h = schur_hessian(problem, &x, &y)?;
        let sol = solve_trs(&g, &h, r, KKT_TOL)?;
        let lambda = 2.0 * sol.nu / c.h_lip;
        let step_norm = sol.step_norm();
        let surrogate = problem.value(&x, &y);
        rec.push(row(t, surrogate, g.norm(), step_norm, lambda, r, n_t), &x);
        outer += 1;

        if best.as_ref().is_none_or(|(v, _, _)| surrogate < *v) {
            best = Some((surrogate, x.clone(), y.clone()));
        }

        let x_next = &x + &sol.s;
        if lambda <= threshold {
            let d = certified_distance(problem, &x, &y);
            let e1 = c.ell * d;
            let e2 = c.l_h * d;
            let certificate = SspCertificate {
                x: x_next.clone(),
                grad_norm_bound: 0.5 * c.h_lip * step_norm * step_norm + e1 + e2 * step_norm + sol.nu * step_norm,
                hessian_eigen_bound: min_eigenvalue(&h) - e2 - c.h_lip * step_norm,
                terminated_by_dual: true,
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
        prev_step = step_norm;
    }

    let (x_out, y_out) = match best {
        Some((_, bx, by)) => (bx, by),
        None => (x, y),
    };
    Ok(RunResult {
        status,
        x: x_out,
        y: y_out,
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

    #[test]
    fn squared_primal_reaches_certificate() {
        let p = Quad::scalar();
        let eps = 1e-2;
        let x0 = DVector::from_element(1, 1.0);
        let out = run_minimax_tr(&p, &x0, &DVector::zeros(1), &TrConfig::new(eps)).unwrap();
        assert_eq!(out.status, RunStatus::Converged);
        let grad = p.primal_gradient(&out.x).unwrap().norm();
        assert!(grad <= 1.75 * eps, "grad {grad}");
        let cert = out.certificate.unwrap();
        assert!(cert.terminated_by_dual);
        assert!(grad <= cert.grad_norm_bound * (1.0 + 1e-12));
        // every step respects the radius r = √ε
        for r in &out.trajectory {
            assert!(r.step_norm <= 0.1 * (1.0 + 1e-12));
        }
    }

    #[test]
    fn stationary_start_stops_after_one_iteration() {
        let p = Quad::scalar();
        let out = run_minimax_tr(&p, &DVector::zeros(1), &DVector::zeros(1), &TrConfig::new(1e-2)).unwrap();
        assert_eq!(out.outer_iterations, 1);
        assert_eq!(out.status, RunStatus::Converged);
    }

    #[test]
    fn budget_exhaustion_is_flagged() {
        let p = Quad::scalar();
        let cfg = TrConfig { max_outer: Some(3), ..TrConfig::new(1e-2) };
        let out = run_minimax_tr(&p, &DVector::from_element(1, 1.0), &DVector::zeros(1), &cfg).unwrap();
        assert_eq!(out.status, RunStatus::BudgetExhausted);
        assert!(out.certificate.is_none());
        assert_eq!(out.trajectory.len(), 3);
    }

    #[test]
    fn default_budget_needs_lower_bound() {
        let mut p = Quad::scalar();
        p.constants = p.constants.with_lower_bound(f64::NEG_INFINITY);
        let err = run_minimax_tr(&p, &DVector::zeros(1), &DVector::zeros(1), &TrConfig::new(1e-2)).unwrap_err();
        assert!(matches!(err, Error::InvalidConfig(_)));
    }

    #[test]
    fn rejects_nonpositive_eps() {
        let p = Quad::scalar();
        assert!(run_minimax_tr(&p, &DVector::zeros(1), &DVector::zeros(1), &TrConfig::new(0.0)).is_err());
    }
}
