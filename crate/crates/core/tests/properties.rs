//! Property tests over randomized knot vectors, envelopes, and curve sets.

use freeknot::bspline::{FunctionSet, KnotSequence};
use freeknot::m2p::{normalize, split};
use freeknot::metrics::{max_abs_error, mspe, mspe_function, mspe_mean, rmse};
use freeknot::placement::{ilp_place_knots, DerivativeEnvelope};
use proptest::prelude::*;

fn knot_sequence_strategy() -> impl Strategy<Value = KnotSequence> {
    (0usize..=4, proptest::collection::vec(0.05f64..0.95, 0..6)).prop_map(|(degree, mut raw)| {
        raw.sort_by(f64::total_cmp);
        raw.dedup_by(|a, b| (*a - *b).abs() < 1e-3);
        KnotSequence::new(degree, 0.0, 1.0, raw).unwrap()
    })
}

proptest! {
    #[test]
    fn basis_rows_are_a_nonnegative_partition_of_unity(
        knots in knot_sequence_strategy(),
        points in proptest::collection::vec(0.0f64..=1.0, 20),
    ) {
        for &t in &points {
            let row = knots.basis_row(t).unwrap();
            let sum: f64 = row.iter().sum();
            prop_assert!((sum - 1.0).abs() <= 1e-12, "sum {sum} at t {t}");
            prop_assert!(row.iter().all(|&v| v >= 0.0));
            let nonzero = row.iter().filter(|&&v| v != 0.0).count();
            prop_assert!(nonzero <= knots.degree() + 1);
        }
    }

    #[test]
    fn basis_functions_vanish_outside_their_support(
        knots in knot_sequence_strategy(),
        points in proptest::collection::vec(0.0f64..=1.0, 20),
    ) {
        let expanded = knots.expanded();
        for &t in &points {
            for q in 0..knots.basis_count() {
                let value = knots.basis_value(q, t).unwrap();
                let in_support = (t >= expanded[q] && t < expanded[q + knots.degree() + 1])
                    || (t == knots.upper() && expanded[q + knots.degree() + 1] == knots.upper());
                if !in_support {
                    prop_assert_eq!(value, 0.0, "basis {} at t {}", q, t);
                }
            }
        }
    }

    #[test]
    fn basis_functions_are_positive_strictly_inside_their_support(
        knots in knot_sequence_strategy(),
        fraction in 0.05f64..0.95,
    ) {
        let expanded = knots.expanded();
        for q in 0..knots.basis_count() {
            let (lo, hi) = (expanded[q], expanded[q + knots.degree() + 1]);
            if hi <= lo {
                continue;
            }
            let t = lo + (hi - lo) * fraction;
            // avoid landing exactly on an interior breakpoint of the support
            if expanded.iter().any(|&k| (k - t).abs() < 1e-9) {
                continue;
            }
            let value = knots.basis_value(q, t).unwrap();
            prop_assert!(value > 0.0, "basis {} at t {} gave {}", q, t, value);
        }
    }

    #[test]
    fn knot_documents_round_trip_through_json(knots in knot_sequence_strategy()) {
        let text = serde_json::to_string(&knots).unwrap();
        let back: KnotSequence = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(back, knots);
    }

    #[test]
    fn max_abs_error_dominates_rmse(
        pairs in proptest::collection::vec((-1e3f64..1e3, -1e3f64..1e3), 1..40),
    ) {
        let (actual, predicted): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
        prop_assert!(max_abs_error(&actual, &predicted).unwrap()
            >= rmse(&actual, &predicted).unwrap() - 1e-12);
    }

    #[test]
    fn mspe_family_is_permutation_invariant(
        curves in proptest::collection::vec(
            (proptest::collection::vec(-10.0f64..10.0, 4), proptest::collection::vec(-10.0f64..10.0, 4)),
            2..8,
        ),
        seed in 0u64..1000,
    ) {
        let actual: Vec<Vec<f64>> = curves.iter().map(|(a, _)| a.clone()).collect();
        let predicted: Vec<Vec<f64>> = curves.iter().map(|(_, p)| p.clone()).collect();
        let scalars_a: Vec<f64> = actual.iter().map(|c| c[0]).collect();
        let scalars_p: Vec<f64> = predicted.iter().map(|c| c[0]).collect();

        let mut order: Vec<usize> = (0..actual.len()).collect();
        // cheap deterministic shuffle
        for i in (1..order.len()).rev() {
            order.swap(i, (seed as usize).wrapping_mul(31).wrapping_add(i) % (i + 1));
        }
        let pa: Vec<Vec<f64>> = order.iter().map(|&i| actual[i].clone()).collect();
        let pp: Vec<Vec<f64>> = order.iter().map(|&i| predicted[i].clone()).collect();
        let psa: Vec<f64> = order.iter().map(|&i| scalars_a[i]).collect();
        let psp: Vec<f64> = order.iter().map(|&i| scalars_p[i]).collect();

        let close = |x: f64, y: f64| (x - y).abs() <= 1e-12 * x.abs().max(y.abs()).max(1.0);
        prop_assert!(close(mspe(&scalars_a, &scalars_p).unwrap(), mspe(&psa, &psp).unwrap()));
        prop_assert!(close(mspe_mean(&actual, &predicted).unwrap(), mspe_mean(&pa, &pp).unwrap()));
        prop_assert!(close(
            mspe_function(&actual, &predicted).unwrap(),
            mspe_function(&pa, &pp).unwrap()
        ));
    }

    #[test]
    fn curve_mean_error_is_bounded_by_pointwise_error(
        curves in proptest::collection::vec(
            (proptest::collection::vec(-5.0f64..5.0, 6), proptest::collection::vec(-5.0f64..5.0, 6)),
            1..10,
        ),
    ) {
        let actual: Vec<Vec<f64>> = curves.iter().map(|(a, _)| a.clone()).collect();
        let predicted: Vec<Vec<f64>> = curves.iter().map(|(_, p)| p.clone()).collect();
        // per-subject mean residual cannot exceed the mean squared residual
        prop_assert!(
            mspe_mean(&actual, &predicted).unwrap()
                <= mspe_function(&actual, &predicted).unwrap() + 1e-12
        );
    }

    #[test]
    fn normalization_round_trips_exactly(
        rows in proptest::collection::vec(proptest::collection::vec(-1e4f64..1e4, 5), 1..6),
    ) {
        let spread = rows.iter().flatten().fold(f64::NEG_INFINITY, |m, &v| m.max(v))
            - rows.iter().flatten().fold(f64::INFINITY, |m, &v| m.min(v));
        prop_assume!(spread > 1e-6);
        let grid = vec![0.0, 0.25, 0.5, 0.75, 1.0];
        let set = FunctionSet::new(grid, rows.clone()).unwrap();
        let (scaled, scaling) = normalize(&set).unwrap();
        for (row, original) in scaled.rows().iter().zip(&rows) {
            for (&s, &o) in row.iter().zip(original) {
                prop_assert!((-1.0 - 1e-12..=1.0 + 1e-12).contains(&s));
                let back = scaling.invert(s);
                prop_assert!((back - o).abs() <= 1e-12 * o.abs().max(1.0));
            }
        }
    }

    #[test]
    fn scaling_envelope_and_tolerance_together_preserves_placement(
        values in proptest::collection::vec(0.0f64..50.0, 12..40),
        factor in 0.01f64..100.0,
        epsilon in 0.001f64..1.0,
        degree in 1usize..=3,
    ) {
        let grid: Vec<f64> = (0..values.len()).map(|i| i as f64 / (values.len() - 1) as f64).collect();
        let base = DerivativeEnvelope::new(grid.clone(), values.clone(), degree + 1).unwrap();
        let scaled = DerivativeEnvelope::new(
            grid,
            values.iter().map(|v| v * factor).collect(),
            degree + 1,
        )
        .unwrap();
        let a = ilp_place_knots(&base, degree, epsilon).unwrap();
        let b = ilp_place_knots(&scaled, degree, epsilon * factor).unwrap();
        prop_assert_eq!(a.knots.interior(), b.knots.interior());
    }

    #[test]
    fn splits_are_disjoint_and_cover_all_subjects(
        subjects in 2usize..40,
        fraction in 0.05f64..0.95,
        seed in 0u64..500,
    ) {
        let s = split(subjects, fraction, seed).unwrap();
        prop_assert!(!s.train.is_empty() && !s.test.is_empty());
        let mut all: Vec<usize> = s.train.iter().chain(&s.test).copied().collect();
        all.sort_unstable();
        let expected: Vec<usize> = (0..subjects).collect();
        prop_assert_eq!(all, expected);
        let requested = (subjects as f64 * fraction).round() as i64;
        prop_assert!((s.train.len() as i64 - requested).abs() <= 1);
    }
}

#[test]
fn different_seeds_give_different_splits_with_high_probability() {
    let splits: Vec<_> = (0..20).map(|seed| split(100, 0.75, seed).unwrap()).collect();
    let mut distinct = 0;
    for (i, a) in splits.iter().enumerate() {
        if splits.iter().take(i).all(|b| b.train != a.train) {
            distinct += 1;
        }
    }
    // two identical 75/25 shuffles of 100 subjects are astronomically unlikely
    assert!(distinct >= 19, "only {distinct} distinct splits out of 20");
}
