use nalgebra::DVector;
use proptest::prelude::*;

use minimax_bench::du::{build_du_minimax, classify_region, du_value_grad_hess, Branch, ConstantOverrides, DuParams, TAU};
use minimax_core::MinimaxProblem;

fn params(n: usize) -> DuParams {
    DuParams::new(n, 2.0, 1.0).unwrap()
}

fn point(n: usize) -> impl Strategy<Value = DVector<f64>> {
    proptest::collection::vec(-8.0 * TAU..8.0 * TAU, n).prop_map(DVector::from_vec)
}

/// Settled coordinates in `[2τ, 6τ]`, one active coordinate in `[0, 2τ)`, the
/// tail in `[0, τ]`; signs arbitrary.
fn nominal_point(n: usize) -> impl Strategy<Value = DVector<f64>> {
    (0..=n, proptest::collection::vec((0.0f64..1.0, any::<bool>()), n)).prop_map(move |(region, u)| {
        DVector::from_fn(n, |j, _| {
            let (t, neg) = u[j];
            let a = if j < region {
                2.0 * TAU + 4.0 * TAU * t
            } else if j == region {
                2.0 * TAU * t
            } else {
                TAU * t
            };
            if neg { -a } else { a }
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn value_is_even_in_every_coordinate(x in point(4), flips in proptest::collection::vec(any::<bool>(), 4)) {
        let p = params(4);
        let mut y = x.clone();
        for (v, f) in y.iter_mut().zip(&flips) {
            if *f { *v = -*v; }
        }
        let (gx, dx, hx) = du_value_grad_hess(&x, &p);
        let (gy, dy, hy) = du_value_grad_hess(&y, &p);
        prop_assert_eq!(gx, gy);
        for j in 0..4 {
            let s = if flips[j] { -1.0 } else { 1.0 };
            prop_assert_eq!(dx[j] * s, dy[j]);
            for k in 0..4 {
                let t = if flips[k] { -1.0 } else { 1.0 };
                prop_assert_eq!(hx[(j, k)] * s * t, hy[(j, k)]);
            }
        }
    }

    // Only on the nominal domain: beyond it the transition term h₂(x_i)·x_{i+1}²
    // has no lower bound.
    #[test]
    fn value_never_drops_below_the_optimum(x in nominal_point(5)) {
        let p = params(5);
        let (g, _, h) = du_value_grad_hess(&x, &p);
        prop_assert!(g >= p.optimal_value() - 1e-9 * p.optimal_value().abs(), "{} < {}", g, p.optimal_value());
        prop_assert_eq!(&h, &h.transpose());
    }

    #[test]
    fn region_index_matches_leading_settled_block(x in point(6)) {
        let p = params(6);
        let r = classify_region(&x, &p);
        for j in 0..r.i - 1 {
            prop_assert!(x[j].abs() >= 2.0 * TAU);
        }
        if r.i <= 6 {
            let a = x[r.i - 1].abs();
            prop_assert!(a < 2.0 * TAU);
            prop_assert_eq!(r.branch == Branch::One, a <= TAU);
        }
    }

    #[test]
    fn minimax_wrapper_is_separable(x in point(3), y in proptest::collection::vec(-5.0f64..5.0, 2)) {
        let p = build_du_minimax(params(3), 2, &ConstantOverrides::default()).unwrap();
        let y = DVector::from_vec(y);
        let (g, gx, _) = du_value_grad_hess(&x, &p.params);
        prop_assert_eq!(p.value(&x, &y), g - 0.5 * y.norm_squared());
        prop_assert_eq!(p.grad_x(&x, &y), gx);
        prop_assert_eq!(p.grad_y(&x, &y), -&y);
        prop_assert_eq!(p.primal_value(&x), Some(g));
    }
}

#[test]
fn stationary_points_have_the_catalogued_values() {
    let p = params(4);
    for (k, x) in p.stationary_points().iter().enumerate() {
        let (g, grad, _) = du_value_grad_hess(x, &p);
        assert!(grad.norm() <= 1e-9, "point {k}: {}", grad.norm());
        assert!((g + k as f64 * p.nu()).abs() <= 1e-9 * p.nu(), "point {k}: {g}");
    }
    assert_eq!(p.optimal_value(), -4.0 * p.nu());
}

#[test]
fn default_constants_follow_l_and_gamma() {
    let p = build_du_minimax(params(10), 5, &ConstantOverrides::default()).unwrap();
    let c = p.constants();
    assert_eq!((c.ell, c.rho), (34.0, 102.0));
    assert_eq!((c.h_lip, c.l_h), (102.0, 102.0));
    assert_eq!(c.p_lower, p.params.optimal_value());

    let o = ConstantOverrides { ell: Some(50.0), h_lip: Some(7.0), ..Default::default() };
    let q = build_du_minimax(params(10), 5, &o).unwrap();
    assert_eq!((q.constants().ell, q.constants().h_lip), (50.0, 7.0));
}
