//! Gradient-ascent inner maximization over `y`.
//!
//! Two ways of deciding how long to ascend:
//!
//! * a fixed step count, chosen by [`schedule_counts`] so that the error
//!   contracts below `A = min{ε₁/ℓ, ε₂/L_H}` given how far `x` moved;
//! * a tolerance, certified through strong concavity:
//!   `‖y − y*(x)‖ ≤ ‖∇_y f(x, y)‖ / μ`.
//!
//! [`ascend_consistent`] couples the tolerance mode to the trial step it is
//! meant to support, which is how the adaptive method meets its inexactness
//! requirement.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::problem::{schur_hessian, MinimaxProblem, ProblemConstants};
use crate::trs::{CubicSolution, TrsSolution};

pub const DEFAULT_MAX_ASCENT_STEPS: usize = 1_000_000;
pub const MAX_CONSISTENCY_ROUNDS: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AscentMode {
    FixedCount(usize),
    /// Ascend until the certified distance to `y*(x)` is at most the target.
    Tolerance(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AscentSchedule {
    pub mode: AscentMode,
    pub step_size: f64,
    /// Step cap in tolerance mode.
    pub max_steps: usize,
}

impl AscentSchedule {
    pub fn fixed(constants: &ProblemConstants, n: usize) -> Self {
        Self {
            mode: AscentMode::FixedCount(n),
            step_size: default_step_size(constants),
            max_steps: DEFAULT_MAX_ASCENT_STEPS,
        }
    }

    pub fn tolerance(constants: &ProblemConstants, target_dist: f64) -> Self {
        Self {
            mode: AscentMode::Tolerance(target_dist),
            step_size: default_step_size(constants),
            max_steps: DEFAULT_MAX_ASCENT_STEPS,
        }
    }

    pub fn with_step_size(mut self, step_size: f64) -> Self {
        self.step_size = step_size;
        self
    }
}

/// `2 / (ℓ + μ)`, the step with contraction factor `1 − 1/κ` or better.
pub fn default_step_size(constants: &ProblemConstants) -> f64 {
    2.0 / (constants.ell + constants.mu)
}

/// `A = min{ε₁/ℓ, ε₂/L_H}`.
pub fn accuracy_target(constants: &ProblemConstants, eps1: f64, eps2: f64) -> Result<f64> {
    let a = (eps1 / constants.ell).min(eps2 / constants.l_h);
    if !(a > 0.0) {
        return Err(Error::InvalidAccuracy(a));
    }
    Ok(a)
}

fn ceil_log_count(kappa: f64, ratio: f64) -> usize {
    if !(ratio > 1.0) {
        return 0;
    }
    let n = (kappa * ratio.ln()).ceil();
    if n >= usize::MAX as f64 {
        usize::MAX
    } else {
        n as usize
    }
}

/// Number of ascent steps before outer iteration `t`.
///
/// `t = 0`: `⌈κ ln(dist0 / A)⌉₊` where `dist0` bounds `‖y₋₁ − y*(x₀)‖`.
/// `t ≥ 1`: `⌈κ ln((A + κ‖s_{t−1}‖) / A)⌉₊`, since `y*` is κ-Lipschitz and
/// the previous output was already `A`-accurate for the previous `x`.
pub fn schedule_counts(
    constants: &ProblemConstants,
    eps1: f64,
    eps2: f64,
    dist0: f64,
    step_norm_prev: f64,
    t: usize,
) -> Result<usize> {
    let a = accuracy_target(constants, eps1, eps2)?;
    let kappa = constants.kappa;
    Ok(if t == 0 {
        ceil_log_count(kappa, dist0 / a)
    } else {
        ceil_log_count(kappa, (a + kappa * step_norm_prev) / a)
    })
}

/// `‖∇_y f(x, y)‖ / μ`, an upper bound on `‖y − y*(x)‖`.
pub fn certified_distance<P: MinimaxProblem + ?Sized>(problem: &P, x: &DVector<f64>, y: &DVector<f64>) -> f64 {
    problem.grad_y(x, y).norm() / problem.constants().mu
}

/// Steps over which `‖∇_y f‖` must at least halve in exact arithmetic.
///
/// With step `2/(ℓ+μ)`, `‖y_k − y*‖ ≤ q^k ‖y_0 − y*‖` for `q = (κ−1)/(κ+1)`,
/// so `‖∇_y f(y_k)‖ ≤ κ q^k ‖∇_y f(y_0)‖ ≤ ½ ‖∇_y f(y_0)‖` once `k ≥ κ ln 2κ`.
pub fn halving_window(constants: &ProblemConstants) -> usize {
    let k = constants.kappa;
    (k * (2.0 * k).ln()).ceil().max(1.0) as usize + 1
}

/// Result of [`refine`].
#[derive(Debug, Clone, PartialEq)]
pub struct Refinement {
    pub y: DVector<f64>,
    pub iterations: usize,
    /// Certified distance `‖∇_y f‖ / μ` at the returned `y`.
    pub distance: f64,
    /// Stopped because rounding, not the target, ended progress.
    pub stalled: bool,
}

/// Ascent with the default step until the certified distance is at most
/// `target`, or until `‖∇_y f‖` fails to halve over a [`halving_window`],
/// which cannot happen in exact arithmetic and so marks the rounding level of
/// the gradient evaluation. `target = 0` ascends to that level.
pub fn refine<P: MinimaxProblem + ?Sized>(
    problem: &P,
    x: &DVector<f64>,
    y_start: &DVector<f64>,
    target: f64,
) -> Result<Refinement> {
    let c = problem.constants();
    let eta = default_step_size(c);
    let window = halving_window(c);
    let mut y = y_start.clone();
    let mut gy = problem.grad_y(x, &y);
    let mut anchor = gy.norm();
    for k in 0..=DEFAULT_MAX_ASCENT_STEPS {
        let norm = gy.norm();
        let done = |stalled| Refinement { y: y.clone(), iterations: k, distance: norm / c.mu, stalled };
        if norm / c.mu <= target {
            return Ok(done(false));
        }
        if k > 0 && k % window == 0 {
            if norm > 0.5 * anchor {
                return Ok(done(true));
            }
            anchor = norm;
        }
        y += &gy * eta;
        gy = problem.grad_y(x, &y);
    }
    Err(Error::AscentNonTermination(DEFAULT_MAX_ASCENT_STEPS))
}

#[derive(Debug, Clone, PartialEq)]
pub struct AscentOutcome {
    pub y: DVector<f64>,
    pub iterations: usize,
}

/// Plain gradient ascent `y ← y + η_y ∇_y f(x, y)`.
pub fn ascend<P: MinimaxProblem + ?Sized>(
    problem: &P,
    x: &DVector<f64>,
    y_start: &DVector<f64>,
    schedule: &AscentSchedule,
) -> Result<AscentOutcome> {
    let eta = schedule.step_size;
    let mut y = y_start.clone();
    match schedule.mode {
        AscentMode::FixedCount(n) => {
            for _ in 0..n {
                y += problem.grad_y(x, &y) * eta;
            }
            Ok(AscentOutcome { y, iterations: n })
        }
        AscentMode::Tolerance(target) => {
            let mu = problem.constants().mu;
            for k in 0..=schedule.max_steps {
                let gy = problem.grad_y(x, &y);
                if gy.norm() / mu <= target {
                    return Ok(AscentOutcome { y, iterations: k });
                }
                if k == schedule.max_steps {
                    break;
                }
                y += gy * eta;
            }
            Err(Error::AscentNonTermination(schedule.max_steps))
        }
    }
}

/// Constants of the step-consistent accuracy requirement
/// `‖y − y*‖ ≤ min{C₁‖s‖²/ℓ, M₂/ℓ, C₂‖s‖/L_H, M₂/L_H}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConsistencyConstants {
    pub c1: f64,
    pub c2: f64,
    pub m2: f64,
}

impl ConsistencyConstants {
    pub fn bound(&self, constants: &ProblemConstants, step_norm: f64) -> f64 {
        let (ell, l_h) = (constants.ell, constants.l_h);
        [
            self.c1 * step_norm * step_norm / ell,
            self.m2 / ell,
            self.c2 * step_norm / l_h,
            self.m2 / l_h,
        ]
        .into_iter()
        .fold(f64::INFINITY, f64::min)
    }
}

/// Anything carrying a trial step `s`.
pub trait TrialStep {
    fn step(&self) -> &DVector<f64>;
}

impl TrialStep for TrsSolution {
    fn step(&self) -> &DVector<f64> {
        &self.s
    }
}

impl TrialStep for CubicSolution {
    fn step(&self) -> &DVector<f64> {
        &self.s
    }
}

impl TrialStep for DVector<f64> {
    fn step(&self) -> &DVector<f64> {
        self
    }
}

/// A `(y, s)` pair meeting the step-consistent accuracy requirement, with the
/// derivative information it was computed from.
#[derive(Debug, Clone)]
pub struct Consistent<S> {
    pub y: DVector<f64>,
    pub g: DVector<f64>,
    pub h: DMatrix<f64>,
    pub trial: S,
    /// Certified `‖y − y*(x)‖` at exit.
    pub distance: f64,
    pub inner_iterations: usize,
    pub rounds: usize,
    /// Accepted because `y` could not be refined further in floating point.
    pub at_noise_floor: bool,
}

/// Refines `y` until it is accurate enough for the trial step it produces.
///
/// Each round evaluates `g = ∇_x f`, `H` (Schur complement) and
/// `s = provider(g, H)`. If the certified distance exceeds the bound for
/// `‖s‖`, `y` is ascended to half the bound and the round repeats. A zero step
/// is accepted as is, and so is a `y` whose refinement stalled at the
/// rounding level of `∇_y f`.
pub fn ascend_consistent<P, S, F>(
    problem: &P,
    x: &DVector<f64>,
    y_start: &DVector<f64>,
    consistency: &ConsistencyConstants,
    mut provider: F,
) -> Result<Consistent<S>>
where
    P: MinimaxProblem + ?Sized,
    S: TrialStep,
    F: FnMut(&DVector<f64>, &DMatrix<f64>) -> Result<S>,
{
    let constants = *problem.constants();
    let mut y = y_start.clone();
    let mut inner_iterations = 0;
    let mut at_noise_floor = false;
    for rounds in 0..=MAX_CONSISTENCY_ROUNDS {
        let g = problem.grad_x(x, &y);
        let h = schur_hessian(problem, x, &y)?;
        let trial = provider(&g, &h)?;
        let step_norm = trial.step().norm();
        let distance = certified_distance(problem, x, &y);
        let bound = consistency.bound(&constants, step_norm);
        if step_norm == 0.0 || distance <= bound || at_noise_floor {
            return Ok(Consistent {
                y,
                g,
                h,
                trial,
                distance,
                inner_iterations,
                rounds,
                at_noise_floor,
            });
        }
        if rounds == MAX_CONSISTENCY_ROUNDS {
            break;
        }
        let out = refine(problem, x, &y, 0.5 * bound)?;
        inner_iterations += out.iterations;
        at_noise_floor = out.stalled;
        y = out.y;
    }
    Err(Error::ConsistencyStalled(MAX_CONSISTENCY_ROUNDS))
}
