//! Adaptive trust region with contractions and expansions.
//!
//! The radius `δ_t` is driven by the subproblem dual `λ_t` rather than by the
//! usual ratio-only heuristics. Every iteration falls into one of three sets:
//!
//! * accepted: `ρ_t ≥ η` and (`λ_t ≤ σ_t‖s_t‖` or `‖s_t‖ = Δ_t`);
//! * contraction: `ρ_t < η`;
//! * expansion: everything else (a good step that is too short for its dual).
//!
//! `ρ_t = (P(x_t) − P(x_t + s_t)) / ‖s_t‖³` is evaluated with the surrogates
//! `f(x_t, y_t)` and `f(x_t + s_t, y⁺)`, where `y⁺` is refined at the trial
//! point to the same certified accuracy as `y_t`. A rejected trial's `y⁺` is
//! discarded.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::inner::{ascend_consistent, certified_distance, refine, ConsistencyConstants};
use crate::linalg::min_eigenvalue;
use crate::problem::{check_dims, MinimaxProblem};
use crate::record::{row, Recorder, RunResult, RunStatus, SspCertificate, StepClass, StepClassCounts};
use crate::trs::{find_lambda_in_range, solve_shifted, solve_trs, KKT_TOL};

/// Relative tolerance for the `‖s‖ = Δ` test.
pub const RADIUS_MATCH_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TraceConfig {
    /// Target accuracy of the `(ε, √ε)` stopping test.
    pub eps: f64,
    pub eta: f64,
    #[serde(rename = "gamma_C")]
    pub gamma_c: f64,
    #[serde(rename = "gamma_E")]
    pub gamma_e: f64,
    pub gamma_lambda: f64,
    pub sigma_lo: f64,
    pub sigma_hi: f64,
    pub delta0: f64,
    #[serde(rename = "Delta0")]
    pub big_delta0: f64,
    pub sigma0: f64,
    pub max_outer: usize,
    #[serde(rename = "C1")]
    pub c1: f64,
    #[serde(rename = "C2")]
    pub c2: f64,
    /// Defaults to `√ε / 2`.
    #[serde(rename = "M2")]
    pub m2: Option<f64>,
    pub record_trajectory: bool,
    /// Keep `x_t` alongside each trajectory row.
    pub record_iterates: bool,
    pub max_wall_time_s: Option<f64>,
}

impl Default for TraceConfig {
    fn default() -> Self {
        Self {
            eps: 1e-4,
            eta: 0.1,
            gamma_c: 0.5,
            gamma_e: 2.5,
            gamma_lambda: 2.0,
            sigma_lo: 1e-4,
            sigma_hi: 1e4,
            delta0: 1.0,
            big_delta0: 1e3,
            sigma0: 1.0,
            max_outer: 100_000,
            c1: 1.0,
            c2: 1.0,
            m2: None,
            record_trajectory: true,
            record_iterates: false,
            max_wall_time_s: None,
        }
    }
}

impl TraceConfig {
    pub fn new(eps: f64) -> Self {
        Self { eps, ..Self::default() }
    }

    pub fn consistency(&self) -> ConsistencyConstants {
        ConsistencyConstants {
            c1: self.c1,
            c2: self.c2,
            m2: self.m2.unwrap_or(0.5 * self.eps.sqrt()),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::InvalidConfig(msg));
        if !(self.eps > 0.0) {
            return fail(format!("eps must be positive, got {}", self.eps));
        }
        if !(self.eta > 0.0 && self.eta < 1.0) {
            return fail(format!("eta must lie in (0, 1), got {}", self.eta));
        }
        if !(self.gamma_c > 0.0 && self.gamma_c < 1.0 && self.gamma_e > 1.0) {
            return fail(format!(
                "need 0 < gamma_C < 1 < gamma_E, got gamma_C = {}, gamma_E = {}",
                self.gamma_c, self.gamma_e
            ));
        }
        if !(self.gamma_lambda > 1.0) {
            return fail(format!("gamma_lambda must exceed 1, got {}", self.gamma_lambda));
        }
        if !(self.sigma_lo > 0.0 && self.sigma_lo <= self.sigma_hi) {
            return fail(format!(
                "need 0 < sigma_lo <= sigma_hi, got {} and {}",
                self.sigma_lo, self.sigma_hi
            ));
        }
        if !(self.delta0 > 0.0 && self.delta0 <= self.big_delta0) {
            return fail(format!(
                "need 0 < delta0 <= Delta0, got {} and {}",
                self.delta0, self.big_delta0
            ));
        }
        if !(self.sigma0 >= self.sigma_lo) {
            return fail(format!("sigma0 must be at least sigma_lo, got {}", self.sigma0));
        }
        let cc = self.consistency();
        if !(cc.c1 > 0.0 && cc.c2 > 0.0 && cc.m2 > 0.0) {
            return fail("C1, C2 and M2 must be positive".into());
        }
        if let Some(t) = self.max_wall_time_s {
            if !(t > 0.0) {
                return fail(format!("max_wall_time_s must be positive, got {t}"));
            }
        }
        Ok(())
    }
}

/// Radius and regularization state carried between iterations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRadii {
    pub delta: f64,
    pub big_delta: f64,
    pub sigma: f64,
}

impl TraceRadii {
    pub fn initial(config: &TraceConfig) -> Self {
        Self {
            delta: config.delta0,
            big_delta: config.big_delta0,
            sigma: config.sigma0,
        }
    }
}

/// Full iterate of the method.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceState {
    pub x: DVector<f64>,
    pub y: DVector<f64>,
    pub radii: TraceRadii,
    pub s: DVector<f64>,
    /// Raw subproblem multiplier.
    pub lambda: f64,
    pub rho: f64,
}

pub fn compute_rho(p_before: f64, p_after: f64, step_norm: f64) -> Result<f64> {
    if !(step_norm > 0.0) {
        return Err(Error::ZeroStep);
    }
    Ok((p_before - p_after) / step_norm.powi(3))
}

pub fn at_outer_radius(step_norm: f64, big_delta: f64) -> bool {
    (step_norm - big_delta).abs() <= RADIUS_MATCH_TOL * big_delta
}

pub fn classify(rho: f64, eta: f64, lambda: f64, sigma: f64, step_norm: f64, big_delta: f64) -> StepClass {
    if rho < eta {
        return StepClass::Contract;
    }
    let on_outer = at_outer_radius(step_norm, big_delta);
    if on_outer {
        StepClass::AcceptDelta
    } else if lambda <= sigma * step_norm {
        StepClass::AcceptSigma
    } else {
        StepClass::Expand
    }
}

/// Which branch of the contraction produced the new radius.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ContractBranch {
    /// `‖s¹‖` from the shift `λ̂ = λ + √(σ̲‖g‖)`.
    ShiftAccepted,
    /// `‖s²‖` from the bracketed search on `(λ, λ̂)`.
    RangeSearch,
    /// `max{‖s³‖, γ_C‖s‖}` from the shift `γ_λ λ`.
    ScaledDual,
    /// `γ_C‖s‖`, used when the shifted solves cannot produce a shorter step.
    Fallback,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContractOutcome {
    pub delta: f64,
    pub branch: ContractBranch,
}

/// New radius after a rejected step `s` with multiplier `lambda`.
///
/// Always returns a radius strictly below `‖s‖`.
pub fn contract(
    g: &DVector<f64>,
    h: &DMatrix<f64>,
    step_norm: f64,
    lambda: f64,
    config: &TraceConfig,
) -> Result<ContractOutcome> {
    if !(step_norm > 0.0) {
        return Err(Error::ZeroStep);
    }
    let fallback = ContractOutcome {
        delta: config.gamma_c * step_norm,
        branch: ContractBranch::Fallback,
    };
    let outcome = if lambda < config.sigma_lo * step_norm {
        let g_norm = g.norm();
        if g_norm == 0.0 {
            return Ok(fallback);
        }
        let lambda_hat = lambda + (config.sigma_lo * g_norm).sqrt();
        let s1 = match solve_shifted(g, h, lambda_hat) {
            Ok(s) => s,
            Err(Error::Indefinite(_)) => return Ok(fallback),
            Err(e) => return Err(e),
        };
        if lambda_hat / s1.norm() <= config.sigma_hi {
            ContractOutcome {
                delta: s1.norm(),
                branch: ContractBranch::ShiftAccepted,
            }
        } else {
            match find_lambda_in_range(g, h, lambda, lambda_hat, config.sigma_lo, config.sigma_hi) {
                Ok(found) => ContractOutcome {
                    delta: found.s.norm(),
                    branch: ContractBranch::RangeSearch,
                },
                Err(Error::BracketViolation(_)) => fallback,
                Err(e) => return Err(e),
            }
        }
    } else {
        let s3_norm = match solve_shifted(g, h, config.gamma_lambda * lambda) {
            Ok(s) => s.norm(),
            Err(Error::Indefinite(_)) => 0.0,
            Err(e) => return Err(e),
        };
        ContractOutcome {
            delta: s3_norm.max(config.gamma_c * step_norm),
            branch: ContractBranch::ScaledDual,
        }
    };
    // Guards against rounding when the shifted step is as long as `s`.
    if outcome.delta >= step_norm || !(outcome.delta > 0.0) {
        return Ok(fallback);
    }
    Ok(outcome)
}

/// Result of one state transition.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceTransition {
    pub x: DVector<f64>,
    pub radii: TraceRadii,
    pub contract: Option<ContractOutcome>,
}

#[allow(clippy::too_many_arguments)]
pub fn trace_update(
    x: &DVector<f64>,
    s: &DVector<f64>,
    lambda: f64,
    radii: &TraceRadii,
    class: StepClass,
    g: &DVector<f64>,
    h: &DMatrix<f64>,
    config: &TraceConfig,
) -> Result<TraceTransition> {
    let step_norm = s.norm();
    match class {
        StepClass::AcceptSigma | StepClass::AcceptDelta => {
            let big_delta = radii.big_delta.max(config.gamma_e * step_norm);
            let delta = big_delta.min(radii.delta.max(config.gamma_e * step_norm));
            let sigma = if step_norm > 0.0 {
                radii.sigma.max(lambda / step_norm)
            } else {
                radii.sigma
            };
            Ok(TraceTransition {
                x: x + s,
                radii: TraceRadii { delta, big_delta, sigma },
                contract: None,
            })
        }
        StepClass::Contract => {
            let out = contract(g, h, step_norm, lambda, config)?;
            Ok(TraceTransition {
                x: x.clone(),
                radii: TraceRadii { delta: out.delta, ..*radii },
                contract: Some(out),
            })
        }
        StepClass::Expand => Ok(TraceTransition {
            x: x.clone(),
            radii: TraceRadii {
                delta: radii.big_delta.min(lambda / radii.sigma),
                ..*radii
            },
            contract: None,
        }),
    }
}

pub fn run_minimax_trace<P: MinimaxProblem + ?Sized>(
    problem: &P,
    x0: &DVector<f64>,
    y_init: &DVector<f64>,
    config: &TraceConfig,
) -> Result<RunResult> {
    check_dims(problem, x0, y_init)?;
    config.validate()?;
    let c = *problem.constants();
    let cc = config.consistency();
    let grad_tol = 0.5 * config.eps;
    let curv_tol = -0.5 * config.eps.sqrt();

    let mut rec = Recorder::new(problem, config.record_trajectory, config.record_iterates);
    let mut counts = StepClassCounts::default();
    let mut x = x0.clone();
    let mut y = y_init.clone();
    let mut radii = TraceRadii::initial(config);
    let mut after_contract = false;
    let mut total_inner = 0;
    let mut status = RunStatus::BudgetExhausted;
    let mut outer = 0;

    while outer < config.max_outer {
        if rec.over_budget(config.max_wall_time_s) {
            status = RunStatus::TimeLimit;
            break;
        }
        let t = outer;
        let delta = radii.delta;
        let cons = ascend_consistent(problem, &x, &y, &cc, |g, h| solve_trs(g, h, delta, KKT_TOL))?;
        let mut inner = cons.inner_iterations;
        y = cons.y;
        let (g, h, sol) = (cons.g, cons.h, cons.trial);
        let step_norm = sol.step_norm();
        let lambda = sol.nu;
        if after_contract && step_norm > 0.0 {
            radii.sigma = radii.sigma.max(lambda / step_norm);
        }
        let surrogate = problem.value(&x, &y);
        outer += 1;

        let lambda_min = min_eigenvalue(&h);
        if g.norm() <= grad_tol && lambda_min >= curv_tol {
            total_inner += inner;
            rec.push(row(t, surrogate, g.norm(), step_norm, lambda, delta, inner), &x);
            let d = certified_distance(problem, &x, &y);
            let certificate = SspCertificate {
                x: x.clone(),
                grad_norm_bound: g.norm() + c.ell * d,
                hessian_eigen_bound: lambda_min - c.l_h * d,
                terminated_by_dual: false,
                outer_iterations: outer,
                total_inner_iterations: total_inner,
            };
            return Ok(RunResult {
                status: RunStatus::Converged,
                x,
                y,
                certificate: Some(certificate),
                trajectory: std::mem::take(&mut rec.rows),
                iterates: std::mem::take(&mut rec.iterates),
                step_counts: Some(counts),
                outer_iterations: outer,
                total_inner_iterations: total_inner,
                wall_time_s: rec.elapsed(),
            });
        }

        let x_trial = &x + &sol.s;
        let refined = refine(problem, &x_trial, &y, cc.bound(&c, step_norm))?;
        inner += refined.iterations;
        total_inner += inner;
        let rho = compute_rho(surrogate, problem.value(&x_trial, &refined.y), step_norm)?;
        let class = classify(rho, config.eta, lambda, radii.sigma, step_norm, radii.big_delta);
        let next = trace_update(&x, &sol.s, lambda, &radii, class, &g, &h, config)?;

        let mut r = row(t, surrogate, g.norm(), step_norm, lambda, delta, inner);
        r.rho = Some(rho);
        r.step_class = Some(class);
        rec.push(r, &x);
        counts.add(class);

        if class.is_accept() {
            y = refined.y;
        }
        x = next.x;
        radii = next.radii;
        after_contract = class == StepClass::Contract;
    }

    Ok(RunResult {
        status,
        x,
        y,
        certificate: None,
        trajectory: std::mem::take(&mut rec.rows),
        iterates: std::mem::take(&mut rec.iterates),
        step_counts: Some(counts),
        outer_iterations: outer,
        total_inner_iterations: total_inner,
        wall_time_s: rec.elapsed(),
    })
}
