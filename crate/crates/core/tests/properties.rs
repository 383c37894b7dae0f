use std::sync::OnceLock;

use proptest::prelude::*;
use sturm_core::coefficient::{DEFAULT_ABS_TOL, DEFAULT_MAX_DEPTH};
use sturm_core::fss::{compute_fss, FundamentalSystem};
use sturm_core::norms::{lp_norm, GridFunction};
use sturm_core::otelbaev;
use sturm_core::solver::{solve_green, ForcingTerm};
use sturm_core::testfunctions::embedding_witness;
use sturm_core::{grid, Coefficient, WindowIntegralMethod};

const AD: WindowIntegralMethod = WindowIntegralMethod::Antiderivative;

fn families() -> Vec<Coefficient> {
    vec![
        Coefficient::constant(2.5).unwrap(),
        Coefficient::example17(0.5).unwrap(),
        Coefficient::example17(1.0).unwrap(),
        Coefficient::example17(2.0).unwrap(),
        Coefficient::example18(1.5, 1.0).unwrap(),
        Coefficient::piecewise(vec![-1.0, 2.0], vec![3.0, 0.5, 2.0]).unwrap(),
    ]
}

fn any_family() -> impl Strategy<Value = Coefficient> {
    (0..families().len()).prop_map(|i| families()[i].clone())
}

fn cached_fss() -> &'static [(Coefficient, FundamentalSystem)] {
    static CELL: OnceLock<Vec<(Coefficient, FundamentalSystem)>> = OnceLock::new();
    CELL.get_or_init(|| {
        ["constant:1", "constant:4", "example17:1", "example17:1.5", "example18:1.5,1"]
            .iter()
            .map(|s| {
                let q: Coefficient = s.parse().unwrap();
                let f = compute_fss(&q, 15.0, 4000, 1e-6).unwrap();
                (q, f)
            })
            .collect()
    })
}

fn any_forcing() -> impl Strategy<Value = ForcingTerm> {
    prop_oneof![
        (-5.0..5.0f64, 0.3..2.0f64).prop_map(|(center, width)| ForcingTerm::Gaussian { center, width }),
        (-5.0..5.0f64, 0.3..3.0f64).prop_map(|(center, radius)| ForcingTerm::CompactBump { center, radius }),
        (0.5..3.0f64).prop_map(|scale| ForcingTerm::ExpAbs { scale }),
    ]
}

fn sample_function(seed: &[f64]) -> GridFunction {
    let x = grid::uniform(-3.0, 3.0, 600);
    let v = x
        .iter()
        .map(|t| seed.iter().enumerate().map(|(k, c)| c * (k as f64 * t).sin() + c * c * (-t * t).exp()).sum())
        .collect();
    GridFunction::new(x, v).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn window_integral_nondecreasing_in_width(q in any_family(), x in -200.0..200.0f64, d1 in 1e-3..20.0f64, extra in 0.0..20.0f64) {
        let a = q.window_integral(x, d1, AD).unwrap();
        let b = q.window_integral(x, d1 + extra, AD).unwrap();
        prop_assert!(b >= a - 1e-12 * b.abs().max(1.0));
    }

    #[test]
    fn closed_form_and_quadrature_agree(q in any_family(), x in -60.0..60.0f64, d in 1e-2..5.0f64) {
        let method = WindowIntegralMethod::adaptive(DEFAULT_ABS_TOL, DEFAULT_MAX_DEPTH).unwrap();
        let a = q.window_integral(x, d, AD).unwrap();
        let b = q.window_integral(x, d, method).unwrap();
        prop_assert!((a - b).abs() <= 10.0 * DEFAULT_ABS_TOL, "{} at ({x}, {d}): {a} vs {b}", q.label());
    }

    #[test]
    fn coefficients_are_nonnegative(q in any_family(), x in -1e4..1e4f64) {
        prop_assert!(q.eval(x).unwrap() >= 0.0);
    }

    #[test]
    fn root_residual_within_tolerance(q in any_family(), x in -100.0..100.0f64) {
        let tol = 1e-10;
        let d = otelbaev::d_of_x(&q, x, tol).unwrap();
        let r = d * q.window_integral(x, d, AD).unwrap() - 2.0;
        prop_assert!(r.abs() <= tol, "residual {r}");
    }

    #[test]
    fn constant_scaling_law(k in 0..4usize, x in -1e3..1e3f64) {
        let q0 = [0.25, 1.0, 4.0, 9.0][k];
        let tol = 1e-10;
        let d = otelbaev::d_of_x(&Coefficient::constant(q0).unwrap(), x, tol).unwrap();
        prop_assert!((d - q0.powf(-0.5)).abs() <= 10.0 * tol);
    }

    #[test]
    fn refined_grids_never_raise_m(q in any_family(), lo in -50.0..0.0f64, span in 1.0..40.0f64, a in 0.1..3.0f64, n in 4..60usize) {
        let coarse = grid::uniform(lo, lo + span, n);
        let fine: Vec<f64> = coarse
            .windows(2)
            .flat_map(|w| [w[0], w[0] + (w[1] - w[0]) / 3.0, w[0] + 2.0 * (w[1] - w[0]) / 3.0])
            .chain(coarse.last().copied())
            .collect();
        let mc = otelbaev::m_of_a(&q, a, &coarse).unwrap();
        let mf = otelbaev::m_of_a(&q, a, &fine).unwrap();
        prop_assert!(mf <= mc, "{mf} > {mc} by {}", mf - mc);
    }

    #[test]
    fn lp_norm_is_homogeneous(c in prop::collection::vec(-2.0..2.0f64, 1..4), lambda in -50.0..50.0f64, p in 1.0..6.0f64) {
        let g = sample_function(&c);
        let a = lp_norm(&g.scaled(lambda), p).unwrap();
        let b = lambda.abs() * lp_norm(&g, p).unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * b.max(1e-300) + 1e-300);
    }

    #[test]
    fn lp_norm_triangle(c1 in prop::collection::vec(-2.0..2.0f64, 1..4), c2 in prop::collection::vec(-2.0..2.0f64, 1..4), p in 1.0..6.0f64) {
        let g = sample_function(&c1);
        let h = sample_function(&c2);
        let sum = GridFunction::new(g.x.clone(), g.values.iter().zip(&h.values).map(|(a, b)| a + b).collect()).unwrap();
        let lhs = lp_norm(&sum, p).unwrap();
        let rhs = lp_norm(&g, p).unwrap() + lp_norm(&h, p).unwrap();
        prop_assert!(lhs <= rhs * (1.0 + 1e-12));
    }

    #[test]
    fn kernel_is_symmetric_and_positive(k in 0..5usize, x in -14.0..14.0f64, t in -14.0..14.0f64) {
        let fss = &cached_fss()[k].1;
        let a = fss.greens_kernel(x, t).unwrap();
        prop_assert_eq!(a, fss.greens_kernel(t, x).unwrap());
        prop_assert!(a > 0.0);
    }

    #[test]
    fn unit_exponent_norm_band(k in 0..5usize, f in any_forcing()) {
        let sol = solve_green(&cached_fss()[k].1, &f, 1.0).unwrap();
        let ratio = sol.norms.s_norm / sol.norms.w_norm;
        prop_assert!((0.5..=2.0).contains(&ratio), "{ratio}");
    }

    #[test]
    fn nonnegative_forcing_gives_nonnegative_solution(k in 0..5usize, f in any_forcing()) {
        let sol = solve_green(&cached_fss()[k].1, &f, 2.0).unwrap();
        prop_assert!(sol.y.iter().all(|&y| y >= 0.0));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn witness_ratio_scales_quadratically(n in 4.0..40.0f64) {
        let q = Coefficient::tail_vanishing(0.0).unwrap();
        let a = embedding_witness(&q, n, 2.0, 4000).unwrap();
        let b = embedding_witness(&q, 2.0 * n, 2.0, 4000).unwrap();
        let growth = b.ratio / a.ratio;
        prop_assert!((2.0..=8.0).contains(&growth), "{growth}");
    }
}
