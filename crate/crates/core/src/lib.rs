//! Second-order methods for `min_x max_y f(x, y)` with `f` strongly concave in `y`.
//!
//! The primal function `P(x) = max_y f(x, y)` is minimized through inexact
//! derivatives: `y` is driven towards `y*(x)` by gradient ascent, and the
//! gradient and Schur-complement Hessian at `(x, y)` stand in for `∇P` and
//! `∇²P`.
//!
//! * [`tr`]: fixed-radius trust region with a dual-based stopping rule.
//! * [`trace`]: adaptive trust region with contractions and expansions.
//! * [`baselines`]: gradient descent ascent and cubic-regularized Newton.
//! * [`trs`]: the dense subproblem solvers they share.

// `!(x > 0.0)` style guards are used on purpose: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod baselines;
pub mod error;
pub mod inner;
pub mod linalg;
pub mod problem;
pub mod record;
pub mod tr;
pub mod trace;
pub mod trs;

pub use baselines::{run_gda, run_mcn, GdaConfig, McnConfig};
pub use error::{Error, Result};
pub use problem::{schur_hessian, MinimaxProblem, PrimalDualPoint, ProblemConstants};
pub use record::{IterationRecord, RunResult, RunStatus, SspCertificate, StepClass, StepClassCounts};
pub use tr::{run_minimax_tr, TrConfig};
pub use trace::{run_minimax_trace, TraceConfig};
