//! Per-iteration records, run status and the second-order certificate shared
//! by all solvers.

use std::time::Instant;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::problem::MinimaxProblem;

/// Outcome class of one adaptive trust-region iteration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum StepClass {
    /// Accepted because `λ ≤ σ‖s‖`.
    AcceptSigma,
    /// Accepted on the outer radius `‖s‖ = Δ`.
    AcceptDelta,
    Contract,
    Expand,
}

impl StepClass {
    pub fn as_str(self) -> &'static str {
        match self {
            StepClass::AcceptSigma => "ACCEPT_SIGMA",
            StepClass::AcceptDelta => "ACCEPT_DELTA",
            StepClass::Contract => "CONTRACT",
            StepClass::Expand => "EXPAND",
        }
    }

    pub fn is_accept(self) -> bool {
        matches!(self, StepClass::AcceptSigma | StepClass::AcceptDelta)
    }
}

impl std::str::FromStr for StepClass {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "ACCEPT_SIGMA" => Ok(StepClass::AcceptSigma),
            "ACCEPT_DELTA" => Ok(StepClass::AcceptDelta),
            "CONTRACT" => Ok(StepClass::Contract),
            "EXPAND" => Ok(StepClass::Expand),
            other => Err(format!("unknown step class {other:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepClassCounts {
    pub accept_sigma: usize,
    pub accept_delta: usize,
    pub contract: usize,
    pub expand: usize,
}

impl StepClassCounts {
    pub fn add(&mut self, class: StepClass) {
        match class {
            StepClass::AcceptSigma => self.accept_sigma += 1,
            StepClass::AcceptDelta => self.accept_delta += 1,
            StepClass::Contract => self.contract += 1,
            StepClass::Expand => self.expand += 1,
        }
    }

    pub fn total(&self) -> usize {
        self.accept_sigma + self.accept_delta + self.contract + self.expand
    }
}

/// One trajectory row.
///
/// `surrogate_p` is `f(x_t, y_t)`; `true_p_gap` is `P(x_t) − P*` when the
/// problem exposes both. `lambda` is whatever dual quantity the solver
/// drives its logic with (scaled for the fixed-radius method, raw for the
/// adaptive one, the cubic multiplier for the cubic method, 0 for GDA).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iter: usize,
    pub wall_time_s: f64,
    pub surrogate_p: f64,
    pub true_p_gap: Option<f64>,
    pub grad_norm: f64,
    pub step_norm: f64,
    pub lambda: f64,
    pub delta: f64,
    pub rho: Option<f64>,
    pub step_class: Option<StepClass>,
    pub inner_iters: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    /// The method's own stopping rule fired.
    Converged,
    /// Iteration budget exhausted.
    BudgetExhausted,
    /// Wall-clock budget exhausted.
    TimeLimit,
}

/// Computable bounds at the output point.
///
/// `grad_norm_bound` bounds `‖∇P(x)‖` from above and `hessian_eigen_bound`
/// bounds `λ_min(∇²P(x))` from below, both from quantities the solver had in
/// hand (certified inner-loop distance, step, multiplier, Lipschitz constants).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SspCertificate {
    pub x: DVector<f64>,
    pub grad_norm_bound: f64,
    pub hessian_eigen_bound: f64,
    pub terminated_by_dual: bool,
    pub outer_iterations: usize,
    pub total_inner_iterations: usize,
}

impl SspCertificate {
    /// Whether the bounds certify an `(ε, √ε)`-second-order stationary point
    /// with the given multipliers on `ε` and `√ε`.
    pub fn certifies(&self, eps: f64, grad_factor: f64, hess_factor: f64) -> bool {
        self.grad_norm_bound <= grad_factor * eps && self.hessian_eigen_bound >= -hess_factor * eps.sqrt()
    }
}

/// Result of any solver run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub status: RunStatus,
    pub x: DVector<f64>,
    pub y: DVector<f64>,
    pub certificate: Option<SspCertificate>,
    pub trajectory: Vec<IterationRecord>,
    /// `x_t` for every trajectory row, when iterate recording is on.
    pub iterates: Vec<DVector<f64>>,
    pub step_counts: Option<StepClassCounts>,
    pub outer_iterations: usize,
    pub total_inner_iterations: usize,
    pub wall_time_s: f64,
}

/// Clock plus the optional analytic gap oracle.
pub(crate) struct Recorder<'a, P: MinimaxProblem + ?Sized> {
    problem: &'a P,
    start: Instant,
    p_star: Option<f64>,
    pub rows: Vec<IterationRecord>,
    pub iterates: Vec<DVector<f64>>,
    pub enabled: bool,
    keep_iterates: bool,
}

impl<'a, P: MinimaxProblem + ?Sized> Recorder<'a, P> {
    pub fn new(problem: &'a P, enabled: bool, keep_iterates: bool) -> Self {
        Self {
            problem,
            start: Instant::now(),
            p_star: problem.optimal_value(),
            rows: Vec::new(),
            iterates: Vec::new(),
            enabled,
            keep_iterates,
        }
    }

    pub fn elapsed(&self) -> f64 {
        self.start.elapsed().as_secs_f64()
    }

    pub fn over_budget(&self, limit: Option<f64>) -> bool {
        limit.is_some_and(|l| self.elapsed() >= l)
    }

    pub fn gap(&self, x: &DVector<f64>) -> Option<f64> {
        Some(self.problem.primal_value(x)? - self.p_star?)
    }

    pub fn push(&mut self, mut row: IterationRecord, x: &DVector<f64>) {
        if !self.enabled {
            return;
        }
        row.wall_time_s = self.elapsed();
        row.true_p_gap = self.gap(x);
        self.rows.push(row);
        if self.keep_iterates {
            self.iterates.push(x.clone());
        }
    }
}

/// Row with the timing and gap fields left for [`Recorder::push`] to fill.
pub(crate) fn row(iter: usize, surrogate_p: f64, grad_norm: f64, step_norm: f64, lambda: f64, delta: f64, inner_iters: usize) -> IterationRecord {
    IterationRecord {
        iter,
        wall_time_s: 0.0,
        surrogate_p,
        true_p_gap: None,
        grad_norm,
        step_norm,
        lambda,
        delta,
        rho: None,
        step_class: None,
        inner_iters,
    }
}
