//! Piecewise-polynomial test function with a chain of `n` strict saddles
//! leading to a single local minimum, coupled to a trivial strongly concave
//! maximization: `f(x, y) = g(x) − ½‖y‖²`.
//!
//! `g` is glued from quadratic pieces and the two transition polynomials
//! `h₁`, `h₂` so that the result is C². Starting near the origin, the
//! stationary points `(4τ, …, 4τ, 0, …, 0)` are visited in turn; every one but
//! `(4τ, …, 4τ)` has a direction of curvature `−2γ`.
//!
//! # Outside the nominal domain
//!
//! `g` is specified only on a union of boxes inside `[0, 6τ]ⁿ`. Iterates may
//! leave it, so the pieces are extended: the region is chosen from
//! `min(|x_j|, 6τ)` (first coordinate below `2τ`, branch by `≤ τ`), and each
//! coordinate enters its polynomial through `|x_j|`. On the nominal domain
//! this is the original function; elsewhere it is a continuous mirror-image
//! extension, even in every coordinate.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use minimax_core::{Error, MinimaxProblem, ProblemConstants, Result};

pub const TAU: f64 = std::f64::consts::E;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DuParams {
    pub n: usize,
    #[serde(rename = "L")]
    pub l: f64,
    pub gamma: f64,
}

impl DuParams {
    pub fn new(n: usize, l: f64, gamma: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidConfig("Du problem needs n >= 1".into()));
        }
        if !(l > 0.0 && gamma > 0.0) {
            return Err(Error::InvalidConfig(format!("need L, gamma > 0, got {l}, {gamma}")));
        }
        Ok(Self { n, l, gamma })
    }

    pub fn tau(&self) -> f64 {
        TAU
    }

    /// `ν = (37L + 13γ)τ²/6`, which equals `−h₁(2τ) + 4Lτ²`.
    pub fn nu(&self) -> f64 {
        (37.0 * self.l + 13.0 * self.gamma) * TAU * TAU / 6.0
    }

    /// `min g = g(4τ, …, 4τ) = −nν`.
    pub fn optimal_value(&self) -> f64 {
        -(self.n as f64) * self.nu()
    }

    pub fn h1(&self, x: f64) -> f64 {
        let (l, gm) = (self.l, self.gamma);
        let d = x - TAU;
        -gm * x * x + (-14.0 * l + 10.0 * gm) * d.powi(3) / (3.0 * TAU) + (5.0 * l - 3.0 * gm) * d.powi(4) / (2.0 * TAU * TAU)
    }

    pub fn h1_d1(&self, x: f64) -> f64 {
        let (l, gm) = (self.l, self.gamma);
        let d = x - TAU;
        -2.0 * gm * x + (-14.0 * l + 10.0 * gm) * d * d / TAU + 2.0 * (5.0 * l - 3.0 * gm) * d.powi(3) / (TAU * TAU)
    }

    pub fn h1_d2(&self, x: f64) -> f64 {
        let (l, gm) = (self.l, self.gamma);
        let d = x - TAU;
        -2.0 * gm + 2.0 * (-14.0 * l + 10.0 * gm) * d / TAU + 6.0 * (5.0 * l - 3.0 * gm) * d * d / (TAU * TAU)
    }

    pub fn h2(&self, x: f64) -> f64 {
        let k = self.l + self.gamma;
        let u = (x - 2.0 * TAU) / TAU;
        -self.gamma - 10.0 * k * u.powi(3) - 15.0 * k * u.powi(4) - 6.0 * k * u.powi(5)
    }

    pub fn h2_d1(&self, x: f64) -> f64 {
        let k = self.l + self.gamma;
        let u = (x - 2.0 * TAU) / TAU;
        -(30.0 * k * u * u + 60.0 * k * u.powi(3) + 30.0 * k * u.powi(4)) / TAU
    }

    pub fn h2_d2(&self, x: f64) -> f64 {
        let k = self.l + self.gamma;
        let u = (x - 2.0 * TAU) / TAU;
        -(60.0 * k * u + 180.0 * k * u * u + 120.0 * k * u.powi(3)) / (TAU * TAU)
    }

    /// Gradient Lipschitz bound `max(12L + 10γ, 1)` for `f` on the nominal
    /// domain; the `1` covers the `y` block.
    pub fn default_ell(&self) -> f64 {
        (12.0 * self.l + 10.0 * self.gamma).max(1.0)
    }

    /// Hessian Lipschitz bound `36L + 30γ` for `g` on the nominal domain.
    pub fn default_rho(&self) -> f64 {
        36.0 * self.l + 30.0 * self.gamma
    }

    /// Stationary points `(4τ, …, 4τ, 0, …, 0)` with `k = 0..=n` leading `4τ`s.
    pub fn stationary_points(&self) -> Vec<DVector<f64>> {
        (0..=self.n)
            .map(|k| DVector::from_fn(self.n, |j, _| if j < k { 4.0 * TAU } else { 0.0 }))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Branch {
    /// `|x_i| ≤ τ`: the `−γ x_i²` piece.
    One,
    /// `τ < |x_i| < 2τ`: the `h₁`/`h₂` transition piece.
    Two,
}

/// 1-based region index `i ∈ [1, n+1]`; `branch` is meaningless for `i = n+1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegionIndex {
    pub i: usize,
    pub branch: Branch,
}

pub fn classify_region(x: &DVector<f64>, params: &DuParams) -> RegionIndex {
    let n = params.n;
    for (j, xj) in x.iter().enumerate().take(n) {
        let a = xj.abs().min(6.0 * TAU);
        if a < 2.0 * TAU {
            let branch = if a <= TAU { Branch::One } else { Branch::Two };
            return RegionIndex { i: j + 1, branch };
        }
    }
    RegionIndex { i: n + 1, branch: Branch::One }
}

fn sign(v: f64) -> f64 {
    if v < 0.0 {
        -1.0
    } else {
        1.0
    }
}

/// `(g(x), ∇g(x), ∇²g(x))` on the piece selected by [`classify_region`].
pub fn du_value_grad_hess(x: &DVector<f64>, params: &DuParams) -> (f64, DVector<f64>, DMatrix<f64>) {
    let n = params.n;
    let (l, gm) = (params.l, params.gamma);
    let region = classify_region(x, params);
    let mut value = 0.0;
    let mut grad = DVector::zeros(n);
    let mut hess = DMatrix::zeros(n, n);

    let settled = (region.i - 1).min(n);
    for j in 0..settled {
        let a = x[j].abs();
        value += l * (a - 4.0 * TAU).powi(2);
        grad[j] = sign(x[j]) * 2.0 * l * (a - 4.0 * TAU);
        hess[(j, j)] = 2.0 * l;
    }
    value -= settled as f64 * params.nu();
    if region.i == n + 1 {
        return (value, grad, hess);
    }

    let k = region.i - 1;
    let a = x[k].abs();
    let sk = sign(x[k]);
    let tail_start = match region.branch {
        Branch::One => {
            value += -gm * a * a;
            grad[k] = -2.0 * gm * x[k];
            hess[(k, k)] = -2.0 * gm;
            k + 1
        }
        Branch::Two => {
            value += params.h1(a);
            grad[k] = sk * params.h1_d1(a);
            hess[(k, k)] = params.h1_d2(a);
            if k + 1 < n {
                let b = x[k + 1];
                let (h2, h2d, h2dd) = (params.h2(a), params.h2_d1(a), params.h2_d2(a));
                value += h2 * b * b;
                grad[k] += sk * h2d * b * b;
                grad[k + 1] = 2.0 * h2 * b;
                hess[(k, k)] += h2dd * b * b;
                hess[(k, k + 1)] = sk * 2.0 * h2d * b;
                hess[(k + 1, k)] = hess[(k, k + 1)];
                hess[(k + 1, k + 1)] = 2.0 * h2;
            }
            k + 2
        }
    };
    for j in tail_start..n {
        value += l * x[j] * x[j];
        grad[j] = 2.0 * l * x[j];
        hess[(j, j)] = 2.0 * l;
    }
    (value, grad, hess)
}

/// `f(x, y) = g(x) − ½‖y‖²`.
#[derive(Debug, Clone)]
pub struct DuMinimax {
    pub params: DuParams,
    pub dim_y: usize,
    constants: ProblemConstants,
}

/// Optional replacements for the default Du constants.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstantOverrides {
    pub ell: Option<f64>,
    pub rho: Option<f64>,
    /// Lipschitz constant of `∇²P`.
    pub h_lip: Option<f64>,
    /// Lipschitz constant of the Schur Hessian in `(x, y)`.
    pub l_h: Option<f64>,
}

/// Builds the benchmark with `μ = 1`, `P = g`, `P* = −nν`.
///
/// Since the coupling block vanishes, `∇²P = H(x, y) = ∇²g(x)` for every `y`,
/// so both Lipschitz constants of the Schur Hessian default to `ρ` itself
/// rather than to the generic `ρ(1+κ)²`, `ρ(1+κ)³`.
pub fn build_du_minimax(params: DuParams, dim_y: usize, overrides: &ConstantOverrides) -> Result<DuMinimax> {
    if dim_y == 0 {
        return Err(Error::InvalidConfig("dim_y must be at least 1".into()));
    }
    let ell = overrides.ell.unwrap_or_else(|| params.default_ell());
    let rho = overrides.rho.unwrap_or_else(|| params.default_rho());
    let constants = ProblemConstants::derive(ell, 1.0, rho, params.optimal_value())?
        .with_hessian_lipschitz(overrides.h_lip.unwrap_or(rho))?
        .with_schur_lipschitz(overrides.l_h.unwrap_or(rho))?;
    Ok(DuMinimax { params, dim_y, constants })
}

impl MinimaxProblem for DuMinimax {
    fn dim_x(&self) -> usize {
        self.params.n
    }
    fn dim_y(&self) -> usize {
        self.dim_y
    }
    fn value(&self, x: &DVector<f64>, y: &DVector<f64>) -> f64 {
        du_value_grad_hess(x, &self.params).0 - 0.5 * y.norm_squared()
    }
    fn grad_x(&self, x: &DVector<f64>, _y: &DVector<f64>) -> DVector<f64> {
        du_value_grad_hess(x, &self.params).1
    }
    fn grad_y(&self, _x: &DVector<f64>, y: &DVector<f64>) -> DVector<f64> {
        -y
    }
    fn hess_xx(&self, x: &DVector<f64>, _y: &DVector<f64>) -> DMatrix<f64> {
        du_value_grad_hess(x, &self.params).2
    }
    fn hess_xy(&self, _x: &DVector<f64>, _y: &DVector<f64>) -> DMatrix<f64> {
        DMatrix::zeros(self.params.n, self.dim_y)
    }
    fn hess_yy(&self, _x: &DVector<f64>, _y: &DVector<f64>) -> DMatrix<f64> {
        -DMatrix::identity(self.dim_y, self.dim_y)
    }
    fn constants(&self) -> &ProblemConstants {
        &self.constants
    }
    fn y_star(&self, _x: &DVector<f64>) -> Option<DVector<f64>> {
        Some(DVector::zeros(self.dim_y))
    }
    fn primal_value(&self, x: &DVector<f64>) -> Option<f64> {
        Some(du_value_grad_hess(x, &self.params).0)
    }
    fn primal_gradient(&self, x: &DVector<f64>) -> Option<DVector<f64>> {
        Some(du_value_grad_hess(x, &self.params).1)
    }
    fn primal_hessian(&self, x: &DVector<f64>) -> Option<DMatrix<f64>> {
        Some(du_value_grad_hess(x, &self.params).2)
    }
    fn optimal_value(&self) -> Option<f64> {
        Some(self.params.optimal_value())
    }
}
