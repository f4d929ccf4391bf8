use approx::assert_relative_eq;
use eel_core::*;
use proptest::prelude::*;

fn scalars() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-10.0f64..10.0, 3..25)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn dual_solution_is_a_probability_vector(xs in scalars(), frac in 0.05f64..0.95) {
        let lo = xs.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        prop_assume!(hi - lo > 1e-3);
        let theta = lo + frac * (hi - lo);
        let model = builtin_mean(1).unwrap();
        let sample = Sample::from_scalars(&xs).unwrap();
        let sol = solve_dual(&model, &sample, &[theta], &SolverOptions::default()).unwrap();
        prop_assert!(sol.converged);
        prop_assert!(sol.loglik_ratio >= 0.0);
        prop_assert!(sol.weights.iter().all(|w| *w > 0.0));
        assert_relative_eq!(sol.weights.iter().sum::<f64>(), 1.0, epsilon = 1e-8);
        let weighted: f64 = sol.weights.iter().zip(&xs).map(|(w, x)| w * (x - theta)).sum();
        prop_assert!(weighted.abs() <= 1e-8 * (hi - lo).max(1.0));
    }

    #[test]
    fn loglik_is_symmetric_in_rows(xs in prop::collection::vec((-5.0f64..5.0, -5.0f64..5.0), 4..15), shift in 0usize..15) {
        let rows: Vec<[f64; 2]> = xs.iter().map(|(a, b)| [*a, *b]).collect();
        let n = rows.len();
        let order: Vec<usize> = (0..n).map(|i| (i + shift) % n).rev().collect();
        let model = builtin_mean(2).unwrap();
        let a = Sample::from_rows(&rows).unwrap();
        let b = a.permuted(&order).unwrap();
        let theta = [0.3, -0.2];
        let opts = SolverOptions::default();
        match (oel_loglik(&model, &a, &theta, &opts).unwrap(), oel_loglik(&model, &b, &theta, &opts).unwrap()) {
            (ExtReal::Finite(x), ExtReal::Finite(y)) => assert_relative_eq!(x, y, epsilon = 1e-8, max_relative = 1e-8),
            (x, y) => prop_assert_eq!(x, y),
        }
    }

    #[test]
    fn regression_jacobian_matches_differences(
        y in -50.0f64..50.0,
        x in prop::collection::vec(-10.0f64..10.0, 2),
        beta in prop::collection::vec(-5.0f64..5.0, 2),
    ) {
        let model = builtin_linear_regression(2).unwrap();
        let obs = [y, x[0], x[1]];
        let err = model.jacobian_discrepancy(&obs, &beta).unwrap();
        prop_assert!(err <= 1e-5, "relative discrepancy {}", err);
    }

    #[test]
    fn chisq_quantile_inverts_cdf(level in 0.001f64..0.999, df in 1usize..30) {
        let c = chisq_quantile(level, df).unwrap();
        prop_assert!(c > 0.0);
        prop_assert!((chisq_cdf(c, df) - level).abs() <= 1e-10);
    }

    #[test]
    fn forward_then_inverse_is_identity(xs in prop::collection::vec(-3.0f64..3.0, 6..20), frac in 0.1f64..0.9) {
        let lo = xs.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        prop_assume!(hi - lo > 0.5);
        let model = builtin_mean(1).unwrap();
        let sample = Sample::from_scalars(&xs).unwrap();
        let eval = EelEvaluator::new(&model, &sample, EvalOptions::default()).unwrap();
        let theta = [lo + frac * (hi - lo)];
        let image = eval.forward(&theta, ExpansionOrder::First).unwrap();
        let pre = eval.preimage(&image, ExpansionOrder::First).unwrap();
        prop_assert!((pre.point[0] - theta[0]).abs() <= 1e-6);
    }
}
