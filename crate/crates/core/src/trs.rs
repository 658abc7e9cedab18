//! Dense solvers for the trust-region subproblem
//!
//! ```text
//! min  gᵀs + ½ sᵀHs   s.t. ‖s‖ ≤ δ
//! ```
//!
//! and its relatives: the shifted system `(H + λI)s = -g`, the bracketed
//! search for a shift with a prescribed `λ / ‖s(λ)‖` ratio, and the cubic
//! regularized model `gᵀs + ½ sᵀHs + (M/6)‖s‖³`.
//!
//! The trust-region and cubic solvers work in the eigenbasis of `H`. With
//! `H = Q diag(λ_i) Qᵀ` and `c = Qᵀg`, the shifted step has norm
//! `‖s(ν)‖² = Σ c_i² / (λ_i + ν)²`. Roots are sought in the variable
//! `θ = ν + λ_min`, so every denominator reads `(λ_i - λ_min) + θ` and stays
//! accurate when `ν` sits right next to `-λ_min`.

use nalgebra::{Cholesky, DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{asymmetry, max_abs, sorted_eigen, symmetrize};

/// Default KKT certification tolerance.
pub const KKT_TOL: f64 = 1e-8;
/// Default relative tolerance on the secular equation `‖s‖ = δ`.
pub const SECULAR_TOL: f64 = 1e-10;

const MAX_ROOT_ITERS: usize = 200;
const MAX_BISECTIONS: usize = 200;

/// Solution of the trust-region subproblem with its certified multiplier.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrsSolution {
    pub s: DVector<f64>,
    /// Multiplier `ν ≥ 0` with `(H + νI)s = -g`.
    pub nu: f64,
    pub on_boundary: bool,
    pub hard_case: bool,
    /// Largest violation among stationarity, curvature, complementarity and
    /// feasibility, each normalized as in [`kkt_residual`].
    pub kkt_residual: f64,
}

impl TrsSolution {
    pub fn step_norm(&self) -> f64 {
        self.s.norm()
    }

    /// `gᵀs + ½ sᵀHs`.
    pub fn model_value(&self, g: &DVector<f64>, h: &DMatrix<f64>) -> f64 {
        model_value(g, h, &self.s)
    }
}

pub fn model_value(g: &DVector<f64>, h: &DMatrix<f64>, s: &DVector<f64>) -> f64 {
    g.dot(s) + 0.5 * s.dot(&(h * s))
}

/// Optimality residual of `(s, ν)` for radius `δ`:
///
/// * stationarity `‖(H + νI)s + g‖ / (‖g‖ + 1)`
/// * curvature `max(0, -λ_min(H + νI))`
/// * complementarity `ν |δ - ‖s‖|`
/// * feasibility `max(0, ‖s‖ - δ) / δ`
pub fn kkt_residual(g: &DVector<f64>, h: &DMatrix<f64>, delta: f64, s: &DVector<f64>, nu: f64) -> f64 {
    let n = g.len();
    let shifted = h + DMatrix::identity(n, n) * nu;
    let stationarity = (&shifted * s + g).norm() / (g.norm() + 1.0);
    let curvature = (-crate::linalg::min_eigenvalue(&shifted)).max(0.0);
    let norm = s.norm();
    let complementarity = nu * (delta - norm).abs();
    let feasibility = (norm - delta).max(0.0) / delta;
    stationarity.max(curvature).max(complementarity).max(feasibility)
}

/// Eigen-representation of `(g, H)` used by the secular-equation solvers.
#[derive(Debug, Clone)]
struct Spectral {
    lambda_min: f64,
    /// `λ_i - λ_min`, ascending; the leading cluster is snapped to exactly 0.
    gaps: DVector<f64>,
    vectors: DMatrix<f64>,
    coeffs: DVector<f64>,
    /// Coefficients below this magnitude count as zero for hard-case purposes.
    coeff_tol: f64,
    g_norm: f64,
}

impl Spectral {
    fn new(g: &DVector<f64>, h: &DMatrix<f64>) -> Self {
        let (values, vectors) = sorted_eigen(h);
        let coeffs = vectors.transpose() * g;
        let lambda_min = values[0];
        let scale = values.iter().fold(1.0_f64, |acc, v| acc.max(v.abs()));
        let cluster_tol = 64.0 * f64::EPSILON * scale;
        let mut gaps = values.map(|v| v - lambda_min);
        for gap in gaps.iter_mut() {
            if *gap <= cluster_tol {
                *gap = 0.0;
            }
        }
        let g_norm = g.norm();
        Self {
            lambda_min,
            gaps,
            vectors,
            coeffs,
            coeff_tol: 1e-12 * g_norm,
            g_norm,
        }
    }

    /// `‖s‖²` at shift `θ`; terms whose denominator vanishes are dropped when
    /// their coefficient is negligible and give `+inf` otherwise.
    fn norm_sq(&self, theta: f64) -> f64 {
        let mut acc = 0.0;
        for (gap, c) in self.gaps.iter().zip(self.coeffs.iter()) {
            let d = gap + theta;
            if d == 0.0 {
                if c.abs() > self.coeff_tol {
                    return f64::INFINITY;
                }
                continue;
            }
            acc += (c / d).powi(2);
        }
        acc
    }

    /// `(‖s‖², Σ c_i² / d_i³)` at shift `θ > 0`.
    fn norm_sq_and_moment(&self, theta: f64) -> (f64, f64) {
        let mut n2 = 0.0;
        let mut m3 = 0.0;
        for (gap, c) in self.gaps.iter().zip(self.coeffs.iter()) {
            let d = gap + theta;
            if d == 0.0 {
                continue;
            }
            let r = c / d;
            n2 += r * r;
            m3 += r * r / d;
        }
        (n2, m3)
    }

    fn step(&self, theta: f64) -> DVector<f64> {
        let n = self.coeffs.len();
        let mut w = DVector::zeros(n);
        for i in 0..n {
            let d = self.gaps[i] + theta;
            if d != 0.0 {
                w[i] = -self.coeffs[i] / d;
            }
        }
        &self.vectors * w
    }

    /// Leading eigenvector with a nonnegative first nonzero component.
    fn leading_vector(&self) -> DVector<f64> {
        let mut v = self.vectors.column(0).into_owned();
        let pivot = v.iter().copied().find(|c| c.abs() > 1e-12).unwrap_or(1.0);
        if pivot < 0.0 {
            v.neg_mut();
        }
        v
    }
}

/// Bracketed Newton iteration on an increasing function `f` with `f(lo) < 0 ≤ f(hi)`.
/// `eval` returns `(f, f')`. Falls back to bisection whenever the Newton
/// iterate leaves the bracket.
fn safeguarded_newton(
    mut lo: f64,
    mut hi: f64,
    start: f64,
    mut eval: impl FnMut(f64) -> (f64, f64),
    done: impl Fn(f64, f64) -> bool,
) -> f64 {
    let mut x = start.clamp(lo, hi);
    for _ in 0..MAX_ROOT_ITERS {
        let (fx, dfx) = eval(x);
        if done(x, fx) {
            return x;
        }
        if fx < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        if hi - lo <= 4.0 * f64::EPSILON * hi.abs().max(f64::MIN_POSITIVE) {
            return hi;
        }
        let newton = x - fx / dfx;
        x = if newton.is_finite() && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
    }
    x
}

fn validate_symmetric(h: &DMatrix<f64>, g: &DVector<f64>, tol: f64) -> Result<()> {
    if h.nrows() != h.ncols() || h.nrows() != g.len() {
        return Err(Error::DimensionMismatch(format!(
            "H is {}x{}, g has length {}",
            h.nrows(),
            h.ncols(),
            g.len()
        )));
    }
    let asym = asymmetry(h);
    if asym > tol * max_abs(h).max(1.0) {
        return Err(Error::NotSymmetric { asymmetry: asym });
    }
    Ok(())
}

/// Global minimizer of `gᵀs + ½ sᵀHs` over `‖s‖ ≤ δ`.
///
/// `tol` bounds the accepted asymmetry of `H`; the secular equation is
/// solved to relative accuracy [`SECULAR_TOL`] or better.
pub fn solve_trs(g: &DVector<f64>, h: &DMatrix<f64>, delta: f64, tol: f64) -> Result<TrsSolution> {
    if !(delta > 0.0) || !delta.is_finite() {
        return Err(Error::InvalidRadius(delta));
    }
    validate_symmetric(h, g, tol)?;
    let h = symmetrize(h);
    let sp = Spectral::new(g, &h);

    let theta_lo = sp.lambda_min.max(0.0);
    let nu_lo = theta_lo - sp.lambda_min;
    let norm_lo = sp.norm_sq(theta_lo).sqrt();

    let (s, nu, on_boundary, hard_case) = if norm_lo <= delta {
        if nu_lo <= 64.0 * f64::EPSILON * sp.lambda_min.abs().max(1.0) {
            // Interior: H is (numerically) positive semidefinite and the
            // minimum-norm Newton step fits.
            (sp.step(theta_lo), nu_lo, false, false)
        } else {
            let s_p = sp.step(0.0);
            let tau = (delta * delta - s_p.norm_squared()).max(0.0).sqrt();
            (s_p + sp.leading_vector() * tau, nu_lo, true, true)
        }
    } else {
        let theta_hi = (sp.g_norm / delta).max(theta_lo);
        let theta = safeguarded_newton(
            theta_lo,
            theta_hi,
            theta_hi,
            |t| {
                let (n2, m3) = sp.norm_sq_and_moment(t);
                let norm = n2.sqrt();
                (1.0 / norm - 1.0 / delta, m3 / (norm * n2))
            },
            |t, _| (sp.norm_sq(t).sqrt() - delta).abs() <= SECULAR_TOL * 1e-3 * delta,
        );
        (sp.step(theta), theta - sp.lambda_min, true, false)
    };

    let kkt = kkt_residual(g, &h, delta, &s, nu);
    Ok(TrsSolution {
        s,
        nu,
        on_boundary,
        hard_case,
        kkt_residual: kkt,
    })
}

/// `s = -(H + λI)⁻¹ g` via Cholesky; [`Error::Indefinite`] when `H + λI` is
/// not positive definite.
pub fn solve_shifted(g: &DVector<f64>, h: &DMatrix<f64>, lambda: f64) -> Result<DVector<f64>> {
    validate_symmetric(h, g, f64::INFINITY)?;
    let n = g.len();
    let shifted = symmetrize(h) + DMatrix::identity(n, n) * lambda;
    let chol = Cholesky::new(shifted).ok_or(Error::Indefinite(lambda))?;
    Ok(-chol.solve(g))
}

/// Result of [`find_lambda_in_range`].
#[derive(Debug, Clone, PartialEq)]
pub struct LambdaSearch {
    pub lambda: f64,
    pub s: DVector<f64>,
    /// `false` when the bisection budget ran out; `lambda` is then the upper
    /// bracket end.
    pub converged: bool,
    pub bisections: usize,
}

/// Bisection for `λ ∈ (lambda_lo, lambda_hi)` with
/// `sigma_lo ≤ λ / ‖s(λ)‖ ≤ sigma_hi`, where `s(λ) = -(H + λI)⁻¹ g`.
///
/// The ratio is increasing in `λ` on the positive definite range. The
/// bracket must satisfy `ratio(lambda_lo) < sigma_lo` and
/// `ratio(lambda_hi) > sigma_hi`.
pub fn find_lambda_in_range(
    g: &DVector<f64>,
    h: &DMatrix<f64>,
    lambda_lo: f64,
    lambda_hi: f64,
    sigma_lo: f64,
    sigma_hi: f64,
) -> Result<LambdaSearch> {
    validate_symmetric(h, g, f64::INFINITY)?;
    if !(sigma_lo > 0.0 && sigma_lo <= sigma_hi) {
        return Err(Error::BracketViolation(format!(
            "need 0 < sigma_lo <= sigma_hi, got [{sigma_lo}, {sigma_hi}]"
        )));
    }
    if !(lambda_lo < lambda_hi) {
        return Err(Error::BracketViolation(format!(
            "need lambda_lo < lambda_hi, got ({lambda_lo}, {lambda_hi})"
        )));
    }
    let sp = Spectral::new(g, &symmetrize(h));
    // shift in θ-coordinates
    let theta = |lambda: f64| lambda + sp.lambda_min;
    if theta(lambda_lo) < 0.0 {
        return Err(Error::BracketViolation(format!(
            "H + {lambda_lo}I is indefinite"
        )));
    }
    let ratio = |lambda: f64| lambda / sp.norm_sq(theta(lambda)).sqrt();

    let r_lo = ratio(lambda_lo);
    let r_hi = ratio(lambda_hi);
    if !(r_lo < sigma_lo) {
        return Err(Error::BracketViolation(format!(
            "ratio at lambda_lo is {r_lo}, expected below {sigma_lo}"
        )));
    }
    if !(r_hi > sigma_hi) {
        return Err(Error::BracketViolation(format!(
            "ratio at lambda_hi is {r_hi}, expected above {sigma_hi}"
        )));
    }

    let (mut lo, mut hi) = (lambda_lo, lambda_hi);
    for k in 1..=MAX_BISECTIONS {
        let mid = 0.5 * (lo + hi);
        let r = ratio(mid);
        if r >= sigma_lo && r <= sigma_hi {
            return Ok(LambdaSearch {
                lambda: mid,
                s: sp.step(theta(mid)),
                converged: true,
                bisections: k,
            });
        }
        if r < sigma_lo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(LambdaSearch {
        lambda: lambda_hi,
        s: sp.step(theta(lambda_hi)),
        converged: false,
        bisections: MAX_BISECTIONS,
    })
}

/// Solution of the cubic-regularized model.
#[derive(Debug, Clone, PartialEq)]
pub struct CubicSolution {
    pub s: DVector<f64>,
    /// `(M/2)‖s‖`, the multiplier in `(H + νI)s = -g`.
    pub nu: f64,
    pub hard_case: bool,
}

/// Global minimizer of `gᵀs + ½ sᵀHs + (M/6)‖s‖³`.
///
/// Characterized by `(H + (M/2)‖s‖ I)s = -g` with `H + (M/2)‖s‖ I ⪰ 0`;
/// found by root-finding on `‖s(ν)‖ = 2ν/M` in the eigenbasis of `H`.
pub fn solve_cubic(g: &DVector<f64>, h: &DMatrix<f64>, m: f64) -> Result<CubicSolution> {
    if !(m > 0.0) || !m.is_finite() {
        return Err(Error::InvalidRegularization(m));
    }
    validate_symmetric(h, g, KKT_TOL)?;
    let sp = Spectral::new(g, &symmetrize(h));
    let lmin = sp.lambda_min;
    let theta_lo = lmin.max(0.0);
    let nu_lo = theta_lo - lmin;
    let norm_lo = sp.norm_sq(theta_lo).sqrt();
    let radius_lo = 2.0 * nu_lo / m;

    if norm_lo <= radius_lo {
        if nu_lo == 0.0 {
            return Ok(CubicSolution {
                s: DVector::zeros(g.len()),
                nu: 0.0,
                hard_case: false,
            });
        }
        let s_p = sp.step(0.0);
        let tau = (radius_lo * radius_lo - s_p.norm_squared()).max(0.0).sqrt();
        let s = s_p + sp.leading_vector() * tau;
        let nu = 0.5 * m * s.norm();
        return Ok(CubicSolution { s, nu, hard_case: true });
    }

    // ψ(θ) = 2(θ - λ_min)/M - ‖s(θ)‖ is increasing.
    let theta_hi = (0.5 * (lmin + (lmin * lmin + 2.0 * m * sp.g_norm).sqrt())).max(theta_lo);
    let theta = safeguarded_newton(
        theta_lo,
        theta_hi,
        theta_hi,
        |t| {
            let (n2, m3) = sp.norm_sq_and_moment(t);
            let norm = n2.sqrt();
            (2.0 * (t - lmin) / m - norm, 2.0 / m + m3 / norm)
        },
        |t, f| f.abs() <= 1e-14 * (2.0 * (t - lmin) / m).max(f64::MIN_POSITIVE),
    );
    let s = sp.step(theta);
    let nu = 0.5 * m * s.norm();
    Ok(CubicSolution { s, nu, hard_case: false })
}

pub fn cubic_model_value(g: &DVector<f64>, h: &DMatrix<f64>, m: f64, s: &DVector<f64>) -> f64 {
    model_value(g, h, s) + m / 6.0 * s.norm().powi(3)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn v(xs: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(xs)
    }

    fn diag(xs: &[f64]) -> DMatrix<f64> {
        DMatrix::from_diagonal(&v(xs))
    }

    #[test]
    fn interior_newton_step() {
        let sol = solve_trs(&v(&[1.0, 0.0]), &diag(&[1.0, 1.0]), 2.0, KKT_TOL).unwrap();
        assert!((&sol.s - v(&[-1.0, 0.0])).norm() < 1e-14);
        assert_eq!(sol.nu, 0.0);
        assert!(!sol.on_boundary && !sol.hard_case);
    }

    #[test]
    fn pure_eigenvector_hard_case() {
        let h = diag(&[-2.0, 1.0]);
        let g = v(&[0.0, 0.0]);
        let sol = solve_trs(&g, &h, 1.0, KKT_TOL).unwrap();
        assert!(sol.hard_case && sol.on_boundary);
        assert!((sol.nu - 2.0).abs() < 1e-14);
        assert!((&sol.s - v(&[1.0, 0.0])).norm() < 1e-14, "tie-break picks +e1");
        assert!((sol.model_value(&g, &h) + 1.0).abs() < 1e-14);
    }

    #[test]
    fn secular_boundary_step() {
        // 4/(1+ν) = 1
        let sol = solve_trs(&v(&[-4.0, 0.0]), &diag(&[1.0, 2.0]), 1.0, KKT_TOL).unwrap();
        assert!((sol.nu - 3.0).abs() < 1e-10);
        assert!((&sol.s - v(&[1.0, 0.0])).norm() < 1e-10);
        assert!(sol.on_boundary && !sol.hard_case);
    }

    #[test]
    fn rejects_bad_input() {
        let g = v(&[1.0, 0.0]);
        assert!(matches!(
            solve_trs(&g, &DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 0.0, 1.0]), 1.0, KKT_TOL),
            Err(Error::NotSymmetric { .. })
        ));
        assert_eq!(solve_trs(&g, &diag(&[1.0, 1.0]), 0.0, KKT_TOL), Err(Error::InvalidRadius(0.0)));
        assert!(solve_trs(&g, &diag(&[1.0]), 1.0, KKT_TOL).is_err());
    }

    #[test]
    fn shifted_solves() {
        let s = solve_shifted(&v(&[2.0, 0.0]), &diag(&[1.0, 1.0]), 1.0).unwrap();
        assert!((s - v(&[-1.0, 0.0])).norm() < 1e-15);
        assert_eq!(
            solve_shifted(&v(&[1.0, 1.0]), &diag(&[-2.0, 1.0]), 1.0),
            Err(Error::Indefinite(1.0))
        );
    }

    #[test]
    fn lambda_search_one_dimensional() {
        // ratio(λ) = λ(1 + λ); roots of λ(1+λ) = 1 and = 3.
        let lo_root = (-1.0 + 5f64.sqrt()) / 2.0;
        let hi_root = (-1.0 + 13f64.sqrt()) / 2.0;
        let out = find_lambda_in_range(&v(&[-1.0]), &diag(&[1.0]), 0.0, 5.0, 1.0, 3.0).unwrap();
        assert!(out.converged);
        assert!(out.lambda >= lo_root - 1e-12 && out.lambda <= hi_root + 1e-12, "{}", out.lambda);
        assert!((out.s[0] - 1.0 / (1.0 + out.lambda)).abs() < 1e-14);
    }

    #[test]
    fn lambda_search_returns_on_first_midpoint() {
        // midpoint 1.0 has ratio 2 ∈ [1, 3]
        let out = find_lambda_in_range(&v(&[-1.0]), &diag(&[1.0]), 0.0, 2.0, 1.0, 3.0).unwrap();
        assert_eq!(out.bisections, 1);
        assert_eq!(out.lambda, 1.0);
    }

    #[test]
    fn lambda_search_rejects_bad_bracket() {
        // ratio(1) = 2 > sigma_hi = 1.5 already at the lower end
        let err = find_lambda_in_range(&v(&[-1.0]), &diag(&[1.0]), 1.0, 5.0, 1.0, 1.5).unwrap_err();
        assert!(matches!(err, Error::BracketViolation(_)));
    }

    #[test]
    fn cubic_one_dimensional() {
        let sol = solve_cubic(&v(&[1.0]), &diag(&[0.0]), 6.0).unwrap();
        assert!((sol.s[0] + 1.0 / 3f64.sqrt()).abs() < 1e-12, "{}", sol.s[0]);
        assert!((sol.nu - 3.0 * sol.s.norm()).abs() < 1e-15);
    }

    #[test]
    fn cubic_origin_when_g_zero_and_psd() {
        let sol = solve_cubic(&v(&[0.0, 0.0]), &diag(&[1.0, 0.5]), 3.0).unwrap();
        assert_eq!(sol.s, v(&[0.0, 0.0]));
    }

    #[test]
    fn cubic_hard_case() {
        // g = 0, H = diag(-1, 2), M = 2: s = r e1 with r = 2·1/M = 1.
        let sol = solve_cubic(&v(&[0.0, 0.0]), &diag(&[-1.0, 2.0]), 2.0).unwrap();
        assert!(sol.hard_case);
        assert!((&sol.s - v(&[1.0, 0.0])).norm() < 1e-14);
    }

    fn sym_from(n: usize, entries: &[f64]) -> DMatrix<f64> {
        let m = DMatrix::from_row_slice(n, n, &entries[..n * n]);
        symmetrize(&(&m + m.transpose()))
    }

    proptest! {
        #[test]
        fn kkt_certified(n in 1usize..8, entries in prop::collection::vec(-3.0f64..3.0, 64),
                         gs in prop::collection::vec(-2.0f64..2.0, 8), delta in 0.05f64..3.0) {
            let h = sym_from(n, &entries);
            let g = DVector::from_column_slice(&gs[..n]);
            let sol = solve_trs(&g, &h, delta, KKT_TOL).unwrap();
            prop_assert!(sol.kkt_residual <= KKT_TOL, "residual {}", sol.kkt_residual);
        }

        #[test]
        fn monotone_in_radius(n in 1usize..6, entries in prop::collection::vec(-3.0f64..3.0, 36),
                              gs in prop::collection::vec(-2.0f64..2.0, 6),
                              d1 in 0.05f64..2.0, extra in 0.0f64..2.0) {
            let h = sym_from(n, &entries);
            let g = DVector::from_column_slice(&gs[..n]);
            let a = solve_trs(&g, &h, d1, KKT_TOL).unwrap();
            let b = solve_trs(&g, &h, d1 + extra, KKT_TOL).unwrap();
            prop_assert!(b.step_norm() >= a.step_norm() - 1e-9);
            prop_assert!(b.model_value(&g, &h) <= a.model_value(&g, &h) + 1e-9);
        }

        #[test]
        fn shifted_norm_decreasing(n in 1usize..6, entries in prop::collection::vec(-3.0f64..3.0, 36),
                                   gs in prop::collection::vec(-2.0f64..2.0, 6),
                                   bump in 0.01f64..1.0, extra in 0.01f64..2.0) {
            let h = sym_from(n, &entries);
            let g = DVector::from_column_slice(&gs[..n]);
            prop_assume!(g.norm() > 1e-3);
            let base = (-crate::linalg::min_eigenvalue(&h)).max(0.0) + bump;
            let s1 = solve_shifted(&g, &h, base).unwrap();
            let s2 = solve_shifted(&g, &h, base + extra).unwrap();
            prop_assert!(s2.norm() < s1.norm());
            let shifted = &h + DMatrix::identity(n, n) * base;
            prop_assert!((shifted * &s1 + &g).norm() <= 1e-10 * (1.0 + g.norm()));
        }

        #[test]
        fn cubic_beats_random_points(entries in prop::collection::vec(-3.0f64..3.0, 16),
                                     gs in prop::collection::vec(-2.0f64..2.0, 4),
                                     m in 0.1f64..10.0,
                                     probes in prop::collection::vec(-2.0f64..2.0, 200)) {
            let h = sym_from(4, &entries);
            let g = DVector::from_column_slice(&gs);
            let sol = solve_cubic(&g, &h, m).unwrap();
            let best = cubic_model_value(&g, &h, m, &sol.s);
            for p in probes.chunks(4) {
                let s = DVector::from_column_slice(p);
                prop_assert!(best <= cubic_model_value(&g, &h, m, &s) + 1e-10);
            }
            // the TRS solution at the matched radius cannot do better on the cubic model
            if sol.s.norm() > 1e-8 {
                let trs = solve_trs(&g, &h, sol.s.norm(), KKT_TOL).unwrap();
                prop_assert!(best <= cubic_model_value(&g, &h, m, &trs.s) + 1e-9);
            }
        }
    }
}
