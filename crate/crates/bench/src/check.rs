//! Problem self-checks: finite differences against the analytic oracles and,
//! for the Du benchmark, the stationary-point catalog and C² gluing probes.

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use minimax_core::linalg::min_eigenvalue;
use minimax_core::problem::{finite_difference_check, DEFAULT_FD_STEP};
use minimax_core::MinimaxProblem;

use crate::config::{ExperimentConfig, ProblemConfig};
use crate::du::{du_value_grad_hess, DuParams, TAU};
use crate::error::Result;

pub const FD_TOL: f64 = 1e-5;
pub const CATALOG_GRAD_TOL: f64 = 1e-8;
pub const NU_REL_TOL: f64 = 1e-10;

/// Keeps sampled points this far from every piece boundary, so central
/// differences never straddle two pieces.
const MARGIN: f64 = 1e-3;

/// A random point of the nominal domain: region `i`, settled coordinates in
/// `[2τ, 6τ]`, coordinate `i` in one branch, the rest in `[0, τ]`.
pub fn sample_du_interior(params: &DuParams, rng: &mut ChaCha8Rng) -> DVector<f64> {
    let n = params.n;
    let region = rng.random_range(0..=n);
    let mut u = |lo: f64, hi: f64| rng.random_range(lo + MARGIN..hi - MARGIN);
    let mut x = DVector::zeros(n);
    for j in 0..n {
        x[j] = if j < region {
            u(2.0 * TAU, 6.0 * TAU)
        } else if j == region {
            if u(0.0, 1.0) < 0.5 {
                u(0.0, TAU)
            } else {
                u(TAU, 2.0 * TAU)
            }
        } else {
            u(0.0, TAU)
        };
    }
    x
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FdSummary {
    pub points: usize,
    pub max_rel_error: f64,
    pub passed: bool,
}

pub fn fd_suite(problem: &dyn MinimaxProblem, points: &[(DVector<f64>, DVector<f64>)]) -> FdSummary {
    let max_rel_error = points
        .iter()
        .map(|(x, y)| finite_difference_check(problem, x, y, DEFAULT_FD_STEP).max_error())
        .fold(0.0, f64::max);
    FdSummary { points: points.len(), max_rel_error, passed: max_rel_error <= FD_TOL }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DuIntegrity {
    pub catalog_max_grad_norm: f64,
    /// Largest `λ_min(∇²g)` over the saddles; must be `≤ −γ`.
    pub saddle_max_min_eigenvalue: f64,
    /// `λ_min(∇²g)` at `(4τ, …, 4τ)`; must equal `2L`.
    pub optimum_min_eigenvalue: f64,
    pub nu_rel_error: f64,
    pub continuity_probes: usize,
    /// Largest one-sided jumps across piece boundaries, each divided by the
    /// probe width, so smooth gluing keeps them of order `ℓ` and `ρ`.
    pub max_value_jump: f64,
    pub max_grad_jump: f64,
    pub max_hess_jump: f64,
    pub passed: bool,
}

/// Probe half-width for the gluing checks.
const PROBE_H: f64 = 1e-7;

/// Catalog checks and C² probes across every boundary `|x_k| ∈ {τ, 2τ}` on the
/// nominal domain. Jumps over `[b − h, b + h]` are bounded by `2h` times the
/// relevant Lipschitz constant when the gluing is C², and are `O(1)`
/// otherwise.
pub fn du_integrity(params: &DuParams, probes: usize, seed: u64) -> DuIntegrity {
    let n = params.n;
    let pts = params.stationary_points();
    let mut max_grad = 0.0_f64;
    let mut saddle_eig = f64::NEG_INFINITY;
    let mut opt_eig = f64::NAN;
    for (k, x) in pts.iter().enumerate() {
        let (_, g, h) = du_value_grad_hess(x, params);
        max_grad = max_grad.max(g.norm());
        let e = min_eigenvalue(&h);
        if k < n {
            saddle_eig = saddle_eig.max(e);
        } else {
            opt_eig = e;
        }
    }
    let nu_direct = -params.h1(2.0 * TAU) + 4.0 * params.l * TAU * TAU;
    let nu_rel_error = (nu_direct - params.nu()).abs() / params.nu().abs();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut dv, mut dg, mut dh) = (0.0_f64, 0.0_f64, 0.0_f64);
    for _ in 0..probes {
        let mut x = sample_du_interior(params, &mut rng);
        let k = rng.random_range(0..n);
        for j in 0..k {
            x[j] = rng.random_range(2.0 * TAU + MARGIN..6.0 * TAU - MARGIN);
        }
        for j in k + 1..n {
            x[j] = rng.random_range(0.0..TAU - MARGIN);
        }
        let b = if rng.random_bool(0.5) { TAU } else { 2.0 * TAU };
        let (mut lo, mut hi) = (x.clone(), x);
        lo[k] = b - PROBE_H;
        hi[k] = b + PROBE_H;
        let (v0, g0, h0) = du_value_grad_hess(&lo, params);
        let (v1, g1, h1) = du_value_grad_hess(&hi, params);
        let w = 2.0 * PROBE_H;
        dv = dv.max((v1 - v0).abs() / w);
        dg = dg.max((g1 - g0).norm() / w);
        dh = dh.max((h1 - h0).norm() / w);
    }
    // Generous multiples of the derivative bounds; a missing C⁰/C¹/C² match
    // would show up as a jump of order 1/h ≈ 10⁷.
    let scale = params.default_rho().max(params.default_ell()) * 10.0 * (n as f64);
    let passed = max_grad <= CATALOG_GRAD_TOL
        && saddle_eig <= -params.gamma
        && (opt_eig - 2.0 * params.l).abs() <= 1e-12 * params.l
        && nu_rel_error <= NU_REL_TOL
        && dv <= scale * 100.0
        && dg <= scale
        && dh <= scale;
    DuIntegrity {
        catalog_max_grad_norm: max_grad,
        saddle_max_min_eigenvalue: saddle_eig,
        optimum_min_eigenvalue: opt_eig,
        nu_rel_error,
        continuity_probes: probes,
        max_value_jump: dv,
        max_grad_jump: dg,
        max_hess_jump: dh,
        passed,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub finite_differences: FdSummary,
    pub du: Option<DuIntegrity>,
    pub passed: bool,
}

pub fn check_problem(config: &ExperimentConfig, points: usize) -> Result<CheckReport> {
    let problem = config.build_problem()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.run.seed);
    let m = problem.dim_y();
    let normal = |d: usize, rng: &mut ChaCha8Rng| DVector::from_fn(d, |_, _| StandardNormal.sample(rng));
    let du_params = match &config.problem {
        ProblemConfig::Du(d) => Some(DuParams::new(d.n, d.l, d.gamma)?),
        ProblemConfig::Quadratic(_) => None,
    };
    let sample: Vec<_> = (0..points)
        .map(|_| {
            let x = match &du_params {
                Some(p) => sample_du_interior(p, &mut rng),
                None => normal(problem.dim_x(), &mut rng),
            };
            (x, normal(m, &mut rng))
        })
        .collect();
    let finite_differences = fd_suite(problem.as_ref(), &sample);
    let du = du_params.map(|p| du_integrity(&p, points, config.run.seed));
    let passed = finite_differences.passed && du.as_ref().is_none_or(|d| d.passed);
    Ok(CheckReport { finite_differences, du, passed })
}
