//! Minimax problem oracles, structural constants and the Schur-complement
//! surrogate Hessian.
//!
//! A problem `min_x max_y f(x, y)` is described by value, partial gradient and
//! Hessian-block oracles of `f`. The primal function is `P(x) = max_y f(x, y)`;
//! under strong concavity in `y` its Hessian equals the Schur complement
//! `H(x, y) = ∇²xx f - ∇²xy f (∇²yy f)⁻¹ ∇²yx f` evaluated at `y = y*(x)`.

use nalgebra::{Cholesky, DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::symmetrize;

/// Smoothness, concavity and Lipschitz constants of a problem.
///
/// `kappa`, `l_p`, `l_h` and `h_lip` are derived from `(ell, mu, rho)`. The
/// two Lipschitz constants of the Schur complement may be replaced by tighter
/// problem-specific bounds through [`ProblemConstants::with_hessian_lipschitz`]
/// and [`ProblemConstants::with_schur_lipschitz`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProblemConstants {
    /// Joint gradient Lipschitz constant of `f`.
    pub ell: f64,
    /// Strong concavity modulus in `y`.
    pub mu: f64,
    /// Lipschitz constant of the Hessian blocks of `f`.
    pub rho: f64,
    /// Condition number `ell / mu`.
    pub kappa: f64,
    /// Gradient Lipschitz constant of `P`, `(kappa + 1) ell`.
    pub l_p: f64,
    /// Lipschitz constant of `H(x, y)`, `rho (1 + kappa)²`.
    pub l_h: f64,
    /// Lipschitz constant of `∇²P`, `rho (1 + kappa)³`.
    pub h_lip: f64,
    /// Known lower bound on `P`. May be `-inf`, serialized as `null`.
    #[serde(with = "lower_bound")]
    pub p_lower: f64,
}

mod lower_bound {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        v.is_finite().then_some(*v).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NEG_INFINITY))
    }
}

impl ProblemConstants {
    pub fn derive(ell: f64, mu: f64, rho: f64, p_lower: f64) -> Result<Self> {
        if !(mu > 0.0) || !mu.is_finite() {
            return Err(Error::InvalidConstants(format!("mu must be positive, got {mu}")));
        }
        if !(ell >= mu) || !ell.is_finite() {
            return Err(Error::InvalidConstants(format!(
                "ell must satisfy ell >= mu = {mu}, got {ell}"
            )));
        }
        if !(rho > 0.0) || !rho.is_finite() {
            return Err(Error::InvalidConstants(format!("rho must be positive, got {rho}")));
        }
        if p_lower.is_nan() || p_lower == f64::INFINITY {
            return Err(Error::InvalidConstants(format!("invalid lower bound {p_lower}")));
        }
        let kappa = ell / mu;
        Ok(Self {
            ell,
            mu,
            rho,
            kappa,
            l_p: (kappa + 1.0) * ell,
            l_h: rho * (1.0 + kappa).powi(2),
            h_lip: rho * (1.0 + kappa).powi(3),
            p_lower,
        })
    }

    /// Replaces `h_lip` with a problem-specific Lipschitz bound on `∇²P`.
    pub fn with_hessian_lipschitz(mut self, h_lip: f64) -> Result<Self> {
        if !(h_lip > 0.0) || !h_lip.is_finite() {
            return Err(Error::InvalidConstants(format!("h_lip must be positive, got {h_lip}")));
        }
        self.h_lip = h_lip;
        Ok(self)
    }

    /// Replaces `l_h` with a problem-specific Lipschitz bound on `H(x, y)`.
    pub fn with_schur_lipschitz(mut self, l_h: f64) -> Result<Self> {
        if !(l_h > 0.0) || !l_h.is_finite() {
            return Err(Error::InvalidConstants(format!("l_h must be positive, got {l_h}")));
        }
        self.l_h = l_h;
        Ok(self)
    }

    pub fn with_lower_bound(mut self, p_lower: f64) -> Self {
        self.p_lower = p_lower;
        self
    }
}

/// Oracle bundle for a smooth `f(x, y)`, strongly concave in `y`.
///
/// Implementations must be pure functions of `(x, y)` so a problem can be
/// shared read-only across concurrent runs. `hess_yx` is always taken as the
/// transpose of [`MinimaxProblem::hess_xy`].
///
/// The `primal_*`, `y_star` and `optimal_value` hooks are optional analytic
/// oracles used for certificate checks on benchmark problems.
pub trait MinimaxProblem: Send + Sync {
    fn dim_x(&self) -> usize;
    fn dim_y(&self) -> usize;
    fn value(&self, x: &DVector<f64>, y: &DVector<f64>) -> f64;
    fn grad_x(&self, x: &DVector<f64>, y: &DVector<f64>) -> DVector<f64>;
    fn grad_y(&self, x: &DVector<f64>, y: &DVector<f64>) -> DVector<f64>;
    fn hess_xx(&self, x: &DVector<f64>, y: &DVector<f64>) -> DMatrix<f64>;
    /// `n × m` mixed block.
    fn hess_xy(&self, x: &DVector<f64>, y: &DVector<f64>) -> DMatrix<f64>;
    fn hess_yy(&self, x: &DVector<f64>, y: &DVector<f64>) -> DMatrix<f64>;
    fn constants(&self) -> &ProblemConstants;

    fn y_star(&self, _x: &DVector<f64>) -> Option<DVector<f64>> {
        None
    }

    fn primal_value(&self, _x: &DVector<f64>) -> Option<f64> {
        None
    }

    fn primal_gradient(&self, _x: &DVector<f64>) -> Option<DVector<f64>> {
        None
    }

    fn primal_hessian(&self, _x: &DVector<f64>) -> Option<DMatrix<f64>> {
        None
    }

    /// Exact `P* = inf P`, when known.
    fn optimal_value(&self) -> Option<f64> {
        None
    }
}

/// Iterate pair `(x_t, y_t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PrimalDualPoint {
    pub x: DVector<f64>,
    pub y: DVector<f64>,
}

impl PrimalDualPoint {
    pub fn new<P: MinimaxProblem + ?Sized>(
        problem: &P,
        x: DVector<f64>,
        y: DVector<f64>,
    ) -> Result<Self> {
        check_dims(problem, &x, &y)?;
        Ok(Self { x, y })
    }
}

pub(crate) fn check_dims<P: MinimaxProblem + ?Sized>(
    problem: &P,
    x: &DVector<f64>,
    y: &DVector<f64>,
) -> Result<()> {
    if x.len() != problem.dim_x() {
        return Err(Error::DimensionMismatch(format!(
            "x has length {}, problem expects {}",
            x.len(),
            problem.dim_x()
        )));
    }
    if y.len() != problem.dim_y() {
        return Err(Error::DimensionMismatch(format!(
            "y has length {}, problem expects {}",
            y.len(),
            problem.dim_y()
        )));
    }
    Ok(())
}

/// `∇²xx f - ∇²xy f (∇²yy f)⁻¹ ∇²yx f` at `(x, y)`.
///
/// Uses a Cholesky factorization `-∇²yy f = L Lᵀ`, so the correction term is
/// `WᵀW` with `W = L⁻¹ ∇²yx f`. The result is symmetric entry by entry.
pub fn schur_hessian<P: MinimaxProblem + ?Sized>(
    problem: &P,
    x: &DVector<f64>,
    y: &DVector<f64>,
) -> Result<DMatrix<f64>> {
    let hxx = problem.hess_xx(x, y);
    let hxy = problem.hess_xy(x, y);
    let neg_hyy = -problem.hess_yy(x, y);
    let chol = Cholesky::new(symmetrize(&neg_hyy)).ok_or(Error::ConcavityViolation)?;
    let w = chol
        .l()
        .solve_lower_triangular(&hxy.transpose())
        .ok_or(Error::ConcavityViolation)?;
    Ok(symmetrize(&(hxx + w.transpose() * w)))
}

/// Per-block maximum relative errors between central differences and the
/// analytic oracles. Each error is `max |fd - oracle| / max(1, max |oracle|)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FdReport {
    pub grad_x: f64,
    pub grad_y: f64,
    pub hess_xx: f64,
    pub hess_xy: f64,
    pub hess_yy: f64,
}

impl FdReport {
    pub fn max_error(&self) -> f64 {
        [self.grad_x, self.grad_y, self.hess_xx, self.hess_xy, self.hess_yy]
            .into_iter()
            .fold(0.0, f64::max)
    }
}

pub const DEFAULT_FD_STEP: f64 = 1e-5;

fn rel_error<'a>(fd: impl Iterator<Item = &'a f64>, exact: impl Iterator<Item = &'a f64> + Clone) -> f64 {
    let scale = exact.clone().fold(1.0_f64, |acc, v| acc.max(v.abs()));
    fd.zip(exact).fold(0.0_f64, |acc, (a, b)| acc.max((a - b).abs())) / scale
}

/// Compares the gradient oracles against central differences of `value`,
/// and the Hessian blocks against central differences of the gradients.
pub fn finite_difference_check<P: MinimaxProblem + ?Sized>(
    problem: &P,
    x: &DVector<f64>,
    y: &DVector<f64>,
    h: f64,
) -> FdReport {
    let n = x.len();
    let m = y.len();
    let two_h = 2.0 * h;

    let mut fd_gx = DVector::zeros(n);
    let mut fd_hxx = DMatrix::zeros(n, n);
    for i in 0..n {
        let mut xp = x.clone();
        let mut xm = x.clone();
        xp[i] += h;
        xm[i] -= h;
        fd_gx[i] = (problem.value(&xp, y) - problem.value(&xm, y)) / two_h;
        let col = (problem.grad_x(&xp, y) - problem.grad_x(&xm, y)) / two_h;
        fd_hxx.set_column(i, &col);
    }

    let mut fd_gy = DVector::zeros(m);
    let mut fd_hxy = DMatrix::zeros(n, m);
    let mut fd_hyy = DMatrix::zeros(m, m);
    for j in 0..m {
        let mut yp = y.clone();
        let mut ym = y.clone();
        yp[j] += h;
        ym[j] -= h;
        fd_gy[j] = (problem.value(x, &yp) - problem.value(x, &ym)) / two_h;
        fd_hxy.set_column(j, &((problem.grad_x(x, &yp) - problem.grad_x(x, &ym)) / two_h));
        fd_hyy.set_column(j, &((problem.grad_y(x, &yp) - problem.grad_y(x, &ym)) / two_h));
    }

    let gx = problem.grad_x(x, y);
    let gy = problem.grad_y(x, y);
    let hxx = problem.hess_xx(x, y);
    let hxy = problem.hess_xy(x, y);
    let hyy = problem.hess_yy(x, y);

    FdReport {
        grad_x: rel_error(fd_gx.iter(), gx.iter()),
        grad_y: rel_error(fd_gy.iter(), gy.iter()),
        hess_xx: rel_error(fd_hxx.iter(), hxx.iter()),
        hess_xy: rel_error(fd_hxy.iter(), hxy.iter()),
        hess_yy: rel_error(fd_hyy.iter(), hyy.iter()),
    }
}

#[cfg(test)]
pub(crate) mod test_problems {
    use super::*;

    /// `f = ½xᵀAx + xᵀBy - ½yᵀCy`, optionally plus `(c/4) Σ x_i⁴`.
    #[derive(Debug, Clone)]
    pub struct Quad {
        pub a: DMatrix<f64>,
        pub b: DMatrix<f64>,
        pub c: DMatrix<f64>,
        pub quartic: f64,
        pub constants: ProblemConstants,
    }

    impl Quad {
        pub fn new(a: DMatrix<f64>, b: DMatrix<f64>, c: DMatrix<f64>, constants: ProblemConstants) -> Self {
            Self { a, b, c, quartic: 0.0, constants }
        }

        /// `f = ½x² + xy - ½y²`, so `P(x) = x²`.
        pub fn scalar() -> Self {
            let one = DMatrix::from_element(1, 1, 1.0);
            let constants = ProblemConstants::derive(2f64.sqrt(), 1.0, 1.0, 0.0)
                .unwrap()
                .with_hessian_lipschitz(1.0)
                .unwrap();
            Self::new(one.clone(), one.clone(), one, constants)
        }

        fn c_inv(&self) -> DMatrix<f64> {
            self.c.clone().try_inverse().unwrap()
        }

        pub fn p_hessian_quadratic(&self) -> DMatrix<f64> {
            &self.a + &self.b * self.c_inv() * self.b.transpose()
        }
    }

    impl MinimaxProblem for Quad {
        fn dim_x(&self) -> usize {
            self.a.nrows()
        }
        fn dim_y(&self) -> usize {
            self.c.nrows()
        }
        fn value(&self, x: &DVector<f64>, y: &DVector<f64>) -> f64 {
            0.5 * x.dot(&(&self.a * x)) + x.dot(&(&self.b * y)) - 0.5 * y.dot(&(&self.c * y))
                + 0.25 * self.quartic * x.iter().map(|v| v.powi(4)).sum::<f64>()
        }
        fn grad_x(&self, x: &DVector<f64>, y: &DVector<f64>) -> DVector<f64> {
            &self.a * x + &self.b * y + x.map(|v| self.quartic * v.powi(3))
        }
        fn grad_y(&self, x: &DVector<f64>, y: &DVector<f64>) -> DVector<f64> {
            self.b.transpose() * x - &self.c * y
        }
        fn hess_xx(&self, x: &DVector<f64>, _y: &DVector<f64>) -> DMatrix<f64> {
            &self.a + DMatrix::from_diagonal(&x.map(|v| 3.0 * self.quartic * v * v))
        }
        fn hess_xy(&self, _x: &DVector<f64>, _y: &DVector<f64>) -> DMatrix<f64> {
            self.b.clone()
        }
        fn hess_yy(&self, _x: &DVector<f64>, _y: &DVector<f64>) -> DMatrix<f64> {
            -self.c.clone()
        }
        fn constants(&self) -> &ProblemConstants {
            &self.constants
        }
        fn y_star(&self, x: &DVector<f64>) -> Option<DVector<f64>> {
            Some(self.c_inv() * self.b.transpose() * x)
        }
        fn primal_value(&self, x: &DVector<f64>) -> Option<f64> {
            let y = self.y_star(x)?;
            Some(self.value(x, &y))
        }
        fn primal_gradient(&self, x: &DVector<f64>) -> Option<DVector<f64>> {
            Some(self.p_hessian_quadratic() * x + x.map(|v| self.quartic * v.powi(3)))
        }
        fn primal_hessian(&self, x: &DVector<f64>) -> Option<DMatrix<f64>> {
            Some(self.p_hessian_quadratic() + DMatrix::from_diagonal(&x.map(|v| 3.0 * self.quartic * v * v)))
        }
    }
}
