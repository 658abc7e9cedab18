//! Seeded quadratic minimax instances with closed-form inner maximizer:
//! `f(x, y) = ½xᵀAx + xᵀBy − ½yᵀCy + (c/4) Σ x_i⁴`.
//!
//! `y*(x) = C⁻¹Bᵀx`, so `P(x) = ½xᵀ(A + BC⁻¹Bᵀ)x + (c/4) Σ x_i⁴` and every
//! primal oracle is exact.

use nalgebra::{Cholesky, DMatrix, DVector, SymmetricEigen};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use minimax_core::linalg::{min_eigenvalue, sym_spectral_norm, symmetrize};
use minimax_core::{Error, MinimaxProblem, ProblemConstants, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QuadraticParams {
    pub seed: u64,
    pub n: usize,
    pub m: usize,
    pub mu: f64,
    pub coupling_scale: f64,
    /// Weight `c` of the quartic term.
    pub quartic: f64,
    /// When set, `A` is shifted so that its smallest eigenvalue equals this.
    pub min_a_eigenvalue: Option<f64>,
    /// Explicit blocks, row-major; they replace the random draws.
    pub a: Option<Vec<Vec<f64>>>,
    pub b: Option<Vec<Vec<f64>>>,
    pub c: Option<Vec<Vec<f64>>>,
    /// Hessian Lipschitz constant. Zero for a pure quadratic, so any positive
    /// value is valid; with a quartic term it is only a local bound.
    pub rho: f64,
}

impl Default for QuadraticParams {
    fn default() -> Self {
        Self {
            seed: 0,
            n: 4,
            m: 3,
            mu: 1.0,
            coupling_scale: 1.0,
            quartic: 0.0,
            min_a_eigenvalue: None,
            a: None,
            b: None,
            c: None,
            rho: 1.0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct QuadraticMinimax {
    pub a: DMatrix<f64>,
    pub b: DMatrix<f64>,
    pub c: DMatrix<f64>,
    pub quartic: f64,
    c_chol: Cholesky<f64, nalgebra::Dyn>,
    p_hess: DMatrix<f64>,
    constants: ProblemConstants,
}

fn rows_to_matrix(name: &str, rows: &[Vec<f64>], nrows: usize, ncols: usize) -> Result<DMatrix<f64>> {
    if rows.len() != nrows || rows.iter().any(|r| r.len() != ncols) {
        return Err(Error::DimensionMismatch(format!("{name} must be {nrows}x{ncols}")));
    }
    Ok(DMatrix::from_fn(nrows, ncols, |i, j| rows[i][j]))
}

fn gaussian(rng: &mut ChaCha8Rng, r: usize, c: usize) -> DMatrix<f64> {
    DMatrix::from_fn(r, c, |_, _| StandardNormal.sample(rng))
}

pub fn build_quadratic_minimax(params: &QuadraticParams) -> Result<QuadraticMinimax> {
    let QuadraticParams { seed, n, m, mu, coupling_scale, .. } = *params;
    if n == 0 || m == 0 {
        return Err(Error::InvalidConfig("quadratic problem needs n, m >= 1".into()));
    }
    if !(mu > 0.0) {
        return Err(Error::InvalidConstants(format!("mu must be positive, got {mu}")));
    }
    if params.quartic < 0.0 {
        return Err(Error::InvalidConfig("quartic weight must be nonnegative".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut a = match &params.a {
        Some(rows) => rows_to_matrix("A", rows, n, n)?,
        None => {
            let g = gaussian(&mut rng, n, n);
            (&g + g.transpose()) * (0.5 / (n as f64).sqrt())
        }
    };
    a = symmetrize(&a);
    if let Some(target) = params.min_a_eigenvalue {
        let shift = target - min_eigenvalue(&a);
        a += DMatrix::identity(n, n) * shift;
    }
    let b = match &params.b {
        Some(rows) => rows_to_matrix("B", rows, n, m)?,
        None => gaussian(&mut rng, n, m) * (coupling_scale / (m as f64).sqrt()),
    };

    // Random C = μI + GGᵀ/m is positive definite by construction; draws are
    // still screened (and redrawn) so a degenerate factorization can never
    // leak through.
    let (c, c_chol) = match &params.c {
        Some(rows) => {
            let c = symmetrize(&rows_to_matrix("C", rows, m, m)?);
            if min_eigenvalue(&c) < mu * (1.0 - 1e-12) {
                return Err(Error::InvalidConstants(format!("C must satisfy C ⪰ {mu}·I")));
            }
            let chol = Cholesky::new(c.clone()).ok_or(Error::ConcavityViolation)?;
            (c, chol)
        }
        None => loop {
            let g = gaussian(&mut rng, m, m);
            let c = symmetrize(&(DMatrix::identity(m, m) * mu + &g * g.transpose() / m as f64));
            if let Some(chol) = Cholesky::new(c.clone()) {
                break (c, chol);
            }
        },
    };

    let p_hess = symmetrize(&(&a + &b * c_chol.solve(&b.transpose())));
    let mut full = DMatrix::zeros(n + m, n + m);
    full.view_mut((0, 0), (n, n)).copy_from(&a);
    full.view_mut((0, n), (n, m)).copy_from(&b);
    full.view_mut((n, 0), (m, n)).copy_from(&b.transpose());
    full.view_mut((n, n), (m, m)).copy_from(&(-&c));
    let ell = sym_spectral_norm(&full).max(min_eigenvalue(&c));
    let mu_c = min_eigenvalue(&c);
    // P* = 0 at x = 0 exactly when the quadratic part of P is convex.
    // Otherwise a quartic term still bounds P below: with Σx⁴ ≥ ‖x‖⁴/n,
    // ½λ‖x‖² + (c/4n)‖x‖⁴ ≥ −nλ²/(4c).
    let lam = min_eigenvalue(&p_hess);
    let p_lower = if lam >= 0.0 {
        0.0
    } else if params.quartic > 0.0 {
        -(n as f64) * lam * lam / (4.0 * params.quartic)
    } else {
        f64::NEG_INFINITY
    };
    let constants = ProblemConstants::derive(ell, mu_c, params.rho, p_lower)?;
    Ok(QuadraticMinimax {
        a,
        b,
        c,
        quartic: params.quartic,
        c_chol,
        p_hess,
        constants,
    })
}

impl QuadraticMinimax {
    /// `A + BC⁻¹Bᵀ`.
    pub fn schur_closed_form(&self) -> &DMatrix<f64> {
        &self.p_hess
    }

    pub fn p_hessian_eigenvalues(&self) -> DVector<f64> {
        SymmetricEigen::new(self.p_hess.clone()).eigenvalues
    }
}

impl MinimaxProblem for QuadraticMinimax {
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
        Some(self.c_chol.solve(&(self.b.transpose() * x)))
    }
    fn primal_value(&self, x: &DVector<f64>) -> Option<f64> {
        Some(0.5 * x.dot(&(&self.p_hess * x)) + 0.25 * self.quartic * x.iter().map(|v| v.powi(4)).sum::<f64>())
    }
    fn primal_gradient(&self, x: &DVector<f64>) -> Option<DVector<f64>> {
        Some(&self.p_hess * x + x.map(|v| self.quartic * v.powi(3)))
    }
    fn primal_hessian(&self, x: &DVector<f64>) -> Option<DMatrix<f64>> {
        Some(&self.p_hess + DMatrix::from_diagonal(&x.map(|v| 3.0 * self.quartic * v * v)))
    }
    fn optimal_value(&self) -> Option<f64> {
        (self.constants.p_lower == 0.0).then_some(0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use minimax_core::schur_hessian;

    #[test]
    fn decoupled_instance() {
        let q = build_quadratic_minimax(&QuadraticParams { coupling_scale: 0.0, ..QuadraticParams::default() }).unwrap();
        let x = DVector::from_vec(vec![0.3, -1.0, 2.0, 0.5]);
        assert_eq!(q.y_star(&x).unwrap().norm(), 0.0);
        let half = 0.5 * x.dot(&(&q.a * &x));
        assert!((q.primal_value(&x).unwrap() - half).abs() < 1e-14);
    }

    #[test]
    fn scalar_instance() {
        let one = Some(vec![vec![1.0]]);
        let q = build_quadratic_minimax(&QuadraticParams {
            n: 1,
            m: 1,
            a: one.clone(),
            b: one.clone(),
            c: one,
            ..QuadraticParams::default()
        })
        .unwrap();
        let x = DVector::from_element(1, 3.0);
        assert!((q.primal_value(&x).unwrap() - 9.0).abs() < 1e-14);
        assert!((q.primal_hessian(&x).unwrap()[(0, 0)] - 2.0).abs() < 1e-15);
    }

    #[test]
    fn schur_matches_closed_form() {
        for seed in 0..10 {
            let q = build_quadratic_minimax(&QuadraticParams { seed, n: 5, m: 4, ..QuadraticParams::default() }).unwrap();
            let x = DVector::from_element(5, 0.2);
            let y = DVector::from_element(4, -0.7);
            let h = schur_hessian(&q, &x, &y).unwrap();
            assert!((h - q.schur_closed_form()).abs().max() <= 1e-10);
        }
    }

    #[test]
    fn seeded_draws_are_reproducible() {
        let p = QuadraticParams { seed: 42, ..QuadraticParams::default() };
        let a = build_quadratic_minimax(&p).unwrap();
        let b = build_quadratic_minimax(&p).unwrap();
        assert_eq!(a.a, b.a);
        assert_eq!(a.c, b.c);
    }

    #[test]
    fn explicit_c_must_dominate_mu() {
        let p = QuadraticParams {
            n: 1,
            m: 1,
            mu: 2.0,
            c: Some(vec![vec![1.0]]),
            ..QuadraticParams::default()
        };
        assert!(build_quadratic_minimax(&p).is_err());
    }
}
