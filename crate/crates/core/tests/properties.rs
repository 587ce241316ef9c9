//! Randomized invariants of the stepsize and the iteration.

use opnorm::linop::{DenseOperator, LinearOperator};
use opnorm::matrix::DenseMatrix;
use opnorm::sampling::{tangent_direction, uniform_unit_vector, RngStream};
use opnorm::solver::{coefficients, optimal_stepsize, step, Mode, SearchState, StepOutcome};
use proptest::prelude::*;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Random dense operator with entries in [-5, 5].
fn operator_strategy() -> impl Strategy<Value = DenseOperator> {
    ((2usize..=10), (1usize..=12), any::<u64>()).prop_map(|(d, m, seed)| {
        let mut rng = RngStream::substream(seed, 0xa11);
        let mut mat = DenseMatrix::zeros(m, d);
        for i in 0..m {
            for j in 0..d {
                mat[(i, j)] = 5.0 * (2.0 * rng.standard_normal().tanh());
            }
        }
        DenseOperator::new(mat)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn stepsize_is_a_root_and_roots_multiply_to_minus_one(
        a in prop::num::f64::NORMAL.prop_filter("nonzero", |a| a.abs() > 1e-8 && a.abs() < 1e8),
        b in -1e8f64..1e8,
    ) {
        let tau_max = optimal_stepsize(a, b, Mode::Max).unwrap();
        let tau_min = optimal_stepsize(a, b, Mode::Min).unwrap();
        for tau in [tau_max, tau_min] {
            let residual = a + b * tau - a * tau * tau;
            let scale = a.abs() * (1.0 + tau * tau) + (b * tau).abs();
            prop_assert!(residual.abs() <= 1e-10 * scale.max(1.0));
        }
        prop_assert!((tau_max * tau_min + 1.0).abs() <= 1e-10);
        // the max root always ascends, the min root always descends
        prop_assert!(tau_max * a >= 0.0);
        prop_assert!(tau_min * a <= 0.0);
    }

    #[test]
    fn steps_preserve_invariants_and_the_ascent_identity(
        op in operator_strategy(),
        seed in any::<u64>(),
        mode_max in any::<bool>(),
    ) {
        let mode = if mode_max { Mode::Max } else { Mode::Min };
        let mut rng = RngStream::substream(seed, 7);
        let v0 = uniform_unit_vector(&mut rng, op.input_dim());
        let mut state = SearchState::new(&op, &v0).unwrap();
        for _ in 0..30 {
            let dir = tangent_direction(&mut rng, &state.v).unwrap();
            prop_assert!(dot(&dir.x, &state.v).abs() <= 1e-12);
            let before = state.objective();
            match step(&op, &mut state, &dir, mode, 1e-14).unwrap() {
                StepOutcome::Advanced(diag) => {
                    let scale = before.max(1.0);
                    // exact line search ascent (descent in min mode)
                    let delta = diag.objective - before;
                    prop_assert!((delta - diag.tau * diag.a).abs() <= 1e-9 * scale);
                    match mode {
                        Mode::Max => prop_assert!(delta >= -1e-12 * scale),
                        Mode::Min => prop_assert!(delta <= 1e-12 * scale),
                    }
                    prop_assert!(diag.tau * diag.a >= 0.0 || mode == Mode::Min);
                }
                StepOutcome::Degenerate { .. } => {}
            }
            prop_assert!((norm(&state.v) - 1.0).abs() <= 1e-9);
        }
        // the incrementally maintained image stays faithful to a fresh apply
        let mut fresh = vec![0.0; op.output_dim()];
        op.apply_into(&state.v, &mut fresh);
        let err: f64 = fresh
            .iter()
            .zip(&state.av)
            .map(|(f, c)| (f - c) * (f - c))
            .sum::<f64>()
            .sqrt();
        prop_assert!(err <= 1e-8 * norm(&fresh).max(1.0));
    }

    #[test]
    fn coefficients_match_their_definition(
        op in operator_strategy(),
        seed in any::<u64>(),
    ) {
        let mut rng = RngStream::substream(seed, 13);
        let v = uniform_unit_vector(&mut rng, op.input_dim());
        let x = tangent_direction(&mut rng, &v).unwrap().x;
        let mut av = vec![0.0; op.output_dim()];
        let mut ax = vec![0.0; op.output_dim()];
        op.apply_into(&v, &mut av);
        op.apply_into(&x, &mut ax);
        let (a, b) = coefficients(&av, &ax);
        prop_assert!((a - dot(&av, &ax)).abs() <= 1e-12 * norm(&av) * norm(&ax) + 1e-300);
        prop_assert!((b - (dot(&ax, &ax) - dot(&av, &av))).abs() <= 1e-12);
    }

    #[test]
    fn run_estimate_never_exceeds_the_true_norm(
        op in operator_strategy(),
        seed in any::<u64>(),
    ) {
        let mat = opnorm::reference::materialize(&op).unwrap();
        let sigma = opnorm::reference::dense_spectrum(&mat).unwrap().sigma_max();
        let mut rng = RngStream::substream(seed, 99);
        let cfg = opnorm::solver::RunConfig {
            max_iters: Some(200),
            eps: 1e-4,
            ..Default::default()
        };
        let report = opnorm::solver::run(&op, &cfg, &mut rng).unwrap();
        // ‖Av‖ ≤ σ₁ for every unit v, so the estimate can only undershoot
        prop_assert!(report.norm_estimate <= sigma * (1.0 + 1e-12) + 1e-12);
        prop_assert!((norm(&report.singular_vector) - 1.0).abs() <= 1e-9);
        prop_assert!(report.norm_estimate.is_finite());
    }
}
