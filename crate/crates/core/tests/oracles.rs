use std::f64::consts::PI;

use kp_core::fredholm::{tau_point, u_from_tau};
use kp_core::glm::{solve_glm_grid, solve_glm_point, u_from_g};
use kp_core::io::{load_field, save_field};
use kp_core::linalg::{determinant, DenseMatrix};
use kp_core::quadrature::clenshaw_curtis_rule;
use kp_core::scattering::{analytic_soliton_g, analytic_soliton_tau, analytic_soliton_u};
use kp_core::{
    make_soliton, Grid2D, Method, QuadratureKind, Quantity, ScatteringData, SolutionField,
};
use proptest::prelude::*;

const L: f64 = 10.0 * PI;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    /// Rank-one kernels have closed-form GLM and determinant solutions.
    /// Rates stay above 1.4 so truncating the integral at −L/2 costs less
    /// than `e^{−1.4·5π} ≈ 3e-10`.
    #[test]
    fn one_soliton_matches_closed_forms(
        a in 1.0..2.0f64,
        b in 0.4..2.0f64,
        x in -L / 2.0..0.0,
        y in -3.0..3.0f64,
        t in 0.0..0.3f64,
    ) {
        let c = make_soliton(a, b).unwrap();
        let data = ScatteringData::single(c);
        let rule = clenshaw_curtis_rule(L, 256).unwrap();
        let g = solve_glm_point(&data, &rule, x, y, t).unwrap();
        let g_exact = analytic_soliton_g(&c, x, y, t);
        prop_assert!((g - g_exact).abs() <= 1e-9 * c.rate().max(1.0), "g {g} vs {g_exact}");
        let tau = tau_point(&data, &rule, x, y, t).unwrap();
        let tau_exact = analytic_soliton_tau(&c, x, y, t);
        prop_assert!((tau - tau_exact).abs() <= 1e-9 * tau_exact, "tau {tau} vs {tau_exact}");
    }

    /// `det(I − W^{1/2} Q W^{1/2}) = det(I − W Q)` by similarity.
    #[test]
    fn symmetric_and_plain_determinants_agree(x in -6.0..0.0f64, y in -3.0..3.0f64, m in 2usize..17) {
        let data = ScatteringData::two_soliton();
        let rule = clenshaw_curtis_rule(L, 2 * m).unwrap();
        let n = rule.len();
        let w = rule.weights();
        let mut q = vec![0.0; n * n];
        data.fill_kernel_matrix(rule.nodes(), rule.nodes(), x, y, 0.1, &mut q);
        let plain = DenseMatrix::from_fn(n, n, |i, j| f64::from(u8::from(i == j)) - w[i] * q[i * n + j]).unwrap();
        let expected = determinant(&plain).unwrap();
        let got = tau_point(&data, &rule, x, y, 0.1).unwrap();
        prop_assert!((got - expected).abs() <= 1e-11 * expected.abs().max(1.0), "{got} vs {expected}");
    }
}

#[test]
fn u_fields_match_closed_form_to_second_order() {
    let c = make_soliton(1.0, 0.5).unwrap();
    let data = ScatteringData::single(c);
    let mut errors = Vec::new();
    for n in [65usize, 129] {
        let grid = Grid2D::new(L, 4.0, n, 3).unwrap();
        let exact = SolutionField::from_fn(grid, Quantity::U, Method::Analytic, 0.0, |x, y| {
            analytic_soliton_u(&c, x, y, 0.0)
        });
        let u_glm = u_from_g(
            &solve_glm_grid(&data, QuadratureKind::ClenshawCurtis, 128, &grid, 0.0).unwrap(),
        )
        .unwrap();
        let tau = kp_core::fredholm::tau_grid(&data, 128, &grid, 0.0).unwrap();
        let u_det = u_from_tau(&tau).unwrap();
        let e1 = kp_core::analysis::max_error(&u_glm, &exact, 0.0).unwrap();
        let e2 = kp_core::analysis::max_error(&u_det, &exact, 0.0).unwrap();
        errors.push((e1, e2));
    }
    for k in 0..2 {
        let (coarse, fine) = if k == 0 {
            (errors[0].0, errors[1].0)
        } else {
            (errors[0].1, errors[1].1)
        };
        assert!(coarse < 5e-2, "{errors:?}");
        let ratio = coarse / fine;
        assert!(
            (3.0..5.5).contains(&ratio),
            "halving dx should quarter the error: {errors:?}"
        );
    }
}

/// Without the display shift the interaction sits at the origin; the two
/// routes to g still agree where the determinant is well conditioned.
#[test]
fn unshifted_two_soliton_methods_agree_left_of_origin() {
    let data = ScatteringData::two_soliton();
    let rule = clenshaw_curtis_rule(L, 128).unwrap();
    let h = 1e-4;
    for &(x, y) in &[(-3.0, -2.0), (-1.0, 0.5), (-4.0, 3.0), (0.0, 0.0)] {
        let g = solve_glm_point(&data, &rule, x, y, 0.25).unwrap();
        let lp = tau_point(&data, &rule, x + h, y, 0.25).unwrap().ln();
        let lm = tau_point(&data, &rule, x - h, y, 0.25).unwrap().ln();
        let g_tau = -(lp - lm) / (2.0 * h);
        assert!((g - g_tau).abs() < 1e-6, "({x}, {y}): {g} vs {g_tau}");
    }
}

#[test]
fn saved_fields_load_back() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("tau.csv");
    let grid = Grid2D::new(L, L, 9, 7).unwrap();
    let tau = kp_core::fredholm::tau_grid(
        &ScatteringData::two_soliton().with_shift(10.0, 10.0),
        16,
        &grid,
        0.25,
    )
    .unwrap();
    save_field(&path, &tau, &["test".to_string()]).unwrap();
    assert_eq!(load_field(&path).unwrap(), tau);
}
