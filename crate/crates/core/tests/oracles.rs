//! Independent oracles: a symbolic piecewise-polynomial construction of the
//! basis, exact polynomial reproduction, the brute-force leave-one-out
//! cross-check of the GCV shortcut, and difference-operator exactness.

use freeknot::bspline::{
    design_matrix, fit_least_squares, smoothing_diagonal, KnotSequence, SampledFunction,
};
use freeknot::metrics::{gcv, gcv_loo_oracle, max_abs_error};
use freeknot::placement::{derivative_envelope, finite_difference, ilp_place_knots};
use freeknot::synthetic;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Dense polynomial in one variable, coefficient `i` on `x^i`.
#[derive(Clone, Debug)]
struct Poly(Vec<f64>);

impl Poly {
    fn zero() -> Self {
        Poly(Vec::new())
    }

    fn one() -> Self {
        Poly(vec![1.0])
    }

    fn add(&self, other: &Poly) -> Poly {
        let mut out = vec![0.0; self.0.len().max(other.0.len())];
        for (i, &c) in self.0.iter().enumerate() {
            out[i] += c;
        }
        for (i, &c) in other.0.iter().enumerate() {
            out[i] += c;
        }
        Poly(out)
    }

    /// Multiplies by the linear factor `c0 + c1 x`.
    fn mul_linear(&self, c0: f64, c1: f64) -> Poly {
        let mut out = vec![0.0; self.0.len() + 1];
        for (i, &c) in self.0.iter().enumerate() {
            out[i] += c * c0;
            out[i + 1] += c * c1;
        }
        Poly(out)
    }

    fn eval(&self, x: f64) -> f64 {
        self.0.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }
}

/// Restriction of one basis function to a single span, built symbolically
/// by the same two-term recursion but over polynomial coefficients.
fn symbolic_basis(expanded: &[f64], q: usize, degree: usize, span: usize) -> Poly {
    if degree == 0 {
        return if q == span { Poly::one() } else { Poly::zero() };
    }
    let mut acc = Poly::zero();
    let left_width = expanded[q + degree] - expanded[q];
    if left_width > 0.0 {
        let inner = symbolic_basis(expanded, q, degree - 1, span);
        acc = acc.add(&inner.mul_linear(-expanded[q] / left_width, 1.0 / left_width));
    }
    let right_width = expanded[q + degree + 1] - expanded[q + 1];
    if right_width > 0.0 {
        let inner = symbolic_basis(expanded, q + 1, degree - 1, span);
        acc = acc.add(&inner.mul_linear(expanded[q + degree + 1] / right_width, -1.0 / right_width));
    }
    acc
}

#[test]
fn basis_matches_symbolic_piecewise_polynomials() {
    // degrees 0..=3 with at most 6 basis functions, repeats included
    let cases: Vec<(usize, Vec<f64>)> = vec![
        (0, vec![0.3, 0.7]),
        (0, vec![]),
        (1, vec![0.25, 0.5, 0.75]),
        (1, vec![0.6]),
        (2, vec![0.5, 0.5]),
        (2, vec![0.3, 0.8]),
        (2, vec![]),
        (3, vec![0.4, 0.4]),
        (3, vec![0.2, 0.9]),
        (3, vec![0.5]),
    ];
    for (degree, interior) in cases {
        let knots = KnotSequence::new(degree, 0.0, 1.0, interior).unwrap();
        assert!(knots.basis_count() <= 6);
        let expanded = knots.expanded().to_vec();
        let n = knots.basis_count();
        for span in degree..n {
            let (lo, hi) = (expanded[span], expanded[span + 1]);
            if hi <= lo {
                continue;
            }
            for q in 0..n {
                let poly = symbolic_basis(&expanded, q, degree, span);
                for step in 1..=7 {
                    let t = lo + (hi - lo) * step as f64 / 8.0;
                    let direct = poly.eval(t);
                    let recursive = knots.basis_value(q, t).unwrap();
                    assert!(
                        (direct - recursive).abs() <= 1e-12,
                        "degree {degree}, span {span}, basis {q}, t {t}: \
                         symbolic {direct} vs recursive {recursive}"
                    );
                }
            }
        }
    }
}

#[test]
fn spline_space_reproduces_polynomials_up_to_its_degree() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for degree in 0usize..=4 {
        for _ in 0..5 {
            let mut interior: Vec<f64> = (0..rng.gen_range(0..4))
                .map(|_| rng.gen_range(0.1..0.9))
                .collect();
            interior.sort_by(f64::total_cmp);
            interior.dedup_by(|a, b| (*a - *b).abs() < 1e-3);
            let knots = KnotSequence::new(degree, 0.0, 1.0, interior).unwrap();
            let n = knots.basis_count();
            let grid: Vec<f64> = (0..n + 10)
                .map(|j| j as f64 / (n + 9) as f64)
                .collect();
            let coeffs: Vec<f64> = (0..=degree).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let values: Vec<f64> = grid
                .iter()
                .map(|&t| coeffs.iter().rev().fold(0.0, |acc, &c| acc * t + c))
                .collect();
            let design = design_matrix(&knots, &grid).unwrap();
            let model = fit_least_squares(&design, std::slice::from_ref(&values), 0.0).unwrap();
            let fitted = model.evaluate_on(0, &grid).unwrap();
            let scale = values.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-6);
            let residual = max_abs_error(&values, &fitted).unwrap();
            assert!(
                residual <= 1e-9 * scale,
                "degree {degree}: residual {residual} vs scale {scale}"
            );
        }
    }
}

#[test]
fn gcv_shortcut_matches_leave_one_out_on_random_instances() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for case in 0..10 {
        let degree = rng.gen_range(1..=3);
        let interior_count = rng.gen_range(0..=2);
        let mut interior: Vec<f64> = (0..interior_count)
            .map(|_| rng.gen_range(0.2..0.8))
            .collect();
        interior.sort_by(f64::total_cmp);
        interior.dedup_by(|a, b| (*a - *b).abs() < 0.05);
        let knots = KnotSequence::new(degree, 0.0, 1.0, interior).unwrap();
        let n = knots.basis_count();
        let j = n + rng.gen_range(10..=20);
        let grid: Vec<f64> = (0..j).map(|i| i as f64 / (j - 1) as f64).collect();
        let obs: Vec<f64> = grid
            .iter()
            .map(|&t| (4.0 * t).sin() + rng.gen_range(-0.2..0.2))
            .collect();
        let design = design_matrix(&knots, &grid).unwrap();
        let model = fit_least_squares(&design, std::slice::from_ref(&obs), 0.0).unwrap();
        let fitted = model.evaluate_on(0, &grid).unwrap();
        let diagonal = smoothing_diagonal(&design).unwrap();
        let shortcut = gcv(&obs, &fitted, &diagonal).unwrap();
        let oracle = gcv_loo_oracle(&design, &obs).unwrap();
        let denom = shortcut.abs().max(oracle.abs()).max(1e-30);
        assert!(
            (shortcut - oracle).abs() / denom <= 1e-9,
            "case {case}: shortcut {shortcut} vs oracle {oracle}"
        );
    }
}

#[test]
fn kth_difference_of_degree_k_polynomials_is_k_factorial_times_lead() {
    let grid: Vec<f64> = (0..24).map(|i| i as f64).collect();
    for k in 1usize..=4 {
        let lead = 1.5;
        let values: Vec<f64> = grid.iter().map(|&t| lead * t.powi(k as i32)).collect();
        let series = SampledFunction::new(grid.clone(), values).unwrap();
        let diff = finite_difference(&series, k).unwrap();
        let factorial: f64 = (1..=k).map(|i| i as f64).product();
        for &v in diff.values() {
            assert!(
                (v - lead * factorial).abs() <= 1e-9 * (lead * factorial).abs(),
                "order {k}: got {v}, expected {}",
                lead * factorial
            );
        }
    }
}

#[test]
fn halving_the_tolerance_never_drops_knots_on_the_corpus() {
    let set = synthetic::corpus(501);
    for degree in 1usize..=3 {
        for i in 0..set.function_count() {
            let single = set.function(i).unwrap();
            let one = freeknot::bspline::FunctionSet::from_function(&single);
            let envelope = derivative_envelope(&one, degree).unwrap();
            let mut epsilon = 0.5;
            let mut last_count = ilp_place_knots(&envelope, degree, epsilon)
                .unwrap()
                .knots
                .interior()
                .len();
            for _ in 0..6 {
                epsilon /= 2.0;
                let count = ilp_place_knots(&envelope, degree, epsilon)
                    .unwrap()
                    .knots
                    .interior()
                    .len();
                assert!(
                    count >= last_count,
                    "signal {i}, degree {degree}: {last_count} -> {count} at eps {epsilon}"
                );
                last_count = count;
            }
        }
    }
}
