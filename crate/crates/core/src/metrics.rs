//! Approximation and prediction error measures.
//!
//! `gcv` is the per-point leave-one-out shortcut driven by the smoothing
//! matrix diagonal, not the classical trace-based criterion, and
//! [`gcv_loo_oracle`] pins its semantics by literally refitting with each
//! observation removed. For least-squares projections the two agree exactly.

use nalgebra::DMatrix;

use crate::bspline::DesignMatrix;
use crate::error::Error;
use crate::linalg;
use crate::Result;

/// Fit summary for one function on one basis.
#[derive(Debug, Clone, PartialEq)]
pub struct ApproximationReport {
    pub max_abs_error: f64,
    pub rmse: f64,
    pub gcv: f64,
    pub knot_count: usize,
    pub basis_count: usize,
}

fn check_lengths(actual: &[f64], predicted: &[f64]) -> Result<()> {
    if actual.len() != predicted.len() {
        return Err(Error::LengthMismatch {
            left: actual.len(),
            right: predicted.len(),
        });
    }
    if actual.is_empty() {
        return Err(Error::InvalidInput("empty input".into()));
    }
    Ok(())
}

/// Largest absolute discrepancy `max_j |actual_j - predicted_j|`.
pub fn max_abs_error(actual: &[f64], predicted: &[f64]) -> Result<f64> {
    check_lengths(actual, predicted)?;
    Ok(actual
        .iter()
        .zip(predicted)
        .map(|(a, p)| (a - p).abs())
        .fold(0.0, f64::max))
}

/// Square root of the mean squared difference.
pub fn rmse(actual: &[f64], predicted: &[f64]) -> Result<f64> {
    check_lengths(actual, predicted)?;
    let mean_sq = actual
        .iter()
        .zip(predicted)
        .map(|(a, p)| (a - p) * (a - p))
        .sum::<f64>()
        / actual.len() as f64;
    Ok(mean_sq.sqrt())
}

/// Leave-one-out shortcut `(1/J) Σ ((actual - fitted) / (1 - S_jj))²`.
///
/// Interpolating fits have no leave-one-out residual to estimate: whenever
/// some `1 - S_jj` falls below `1e-12` the result is positive infinity, so
/// model-selection sweeps rank such fits last instead of crashing.
pub fn gcv(actual: &[f64], fitted: &[f64], smoothing_diagonal: &[f64]) -> Result<f64> {
    check_lengths(actual, fitted)?;
    if smoothing_diagonal.len() != actual.len() {
        return Err(Error::LengthMismatch {
            left: actual.len(),
            right: smoothing_diagonal.len(),
        });
    }
    let mut sum = 0.0;
    for ((a, f), s) in actual.iter().zip(fitted).zip(smoothing_diagonal) {
        let denom = 1.0 - s;
        if denom < 1e-12 {
            return Ok(f64::INFINITY);
        }
        let term = (a - f) / denom;
        sum += term * term;
    }
    Ok(sum / actual.len() as f64)
}

/// Brute-force leave-one-out cross-validation: refits the least-squares
/// problem `J` times with one observation removed and averages the squared
/// prediction errors at the held-out points.
pub fn gcv_loo_oracle(design: &DesignMatrix, observations: &[f64]) -> Result<f64> {
    let j = design.nrows();
    let n = design.ncols();
    if observations.len() != j {
        return Err(Error::LengthMismatch {
            left: j,
            right: observations.len(),
        });
    }
    if j < n + 1 {
        return Err(Error::InsufficientData {
            needed: n + 1,
            got: j,
        });
    }
    let full = design.entries();
    let mut sum = 0.0;
    for leave_out in 0..j {
        let mut reduced = DMatrix::zeros(j - 1, n);
        let mut rhs = DMatrix::zeros(j - 1, 1);
        let mut r = 0;
        for row in 0..j {
            if row == leave_out {
                continue;
            }
            reduced.row_mut(r).copy_from(&full.row(row));
            rhs[(r, 0)] = observations[row];
            r += 1;
        }
        let beta = linalg::solve_least_squares(&reduced, &rhs)?;
        let predicted = (full.row(leave_out) * &beta)[(0, 0)];
        let err = observations[leave_out] - predicted;
        sum += err * err;
    }
    Ok(sum / j as f64)
}

/// Mean squared prediction error over scalar targets.
pub fn mspe(actual: &[f64], predicted: &[f64]) -> Result<f64> {
    check_lengths(actual, predicted)?;
    Ok(actual
        .iter()
        .zip(predicted)
        .map(|(a, p)| (a - p) * (a - p))
        .sum::<f64>()
        / actual.len() as f64)
}

fn check_curve_pairs(actual: &[Vec<f64>], predicted: &[Vec<f64>]) -> Result<()> {
    if actual.len() != predicted.len() {
        return Err(Error::LengthMismatch {
            left: actual.len(),
            right: predicted.len(),
        });
    }
    if actual.is_empty() {
        return Err(Error::InvalidInput("empty input".into()));
    }
    for (i, (a, p)) in actual.iter().zip(predicted).enumerate() {
        if a.len() != p.len() || a.is_empty() {
            return Err(Error::InvalidInput(format!(
                "subject {i}: predicted curve has {} samples, actual has {}",
                p.len(),
                a.len()
            )));
        }
    }
    Ok(())
}

/// Mean over subjects of the squared difference between the predicted and
/// actual curve means, each mean taken over that subject's samples.
pub fn mspe_mean(actual: &[Vec<f64>], predicted: &[Vec<f64>]) -> Result<f64> {
    check_curve_pairs(actual, predicted)?;
    let sum: f64 = actual
        .iter()
        .zip(predicted)
        .map(|(a, p)| {
            let ma = a.iter().sum::<f64>() / a.len() as f64;
            let mp = p.iter().sum::<f64>() / p.len() as f64;
            (mp - ma) * (mp - ma)
        })
        .sum();
    Ok(sum / actual.len() as f64)
}

/// Pointwise mean squared prediction error over whole curves,
/// `(1/(R N)) Σ_i Σ_s (predicted_{i,s} - actual_{i,s})²`. All subjects must
/// share the same number of samples `R`.
pub fn mspe_function(actual: &[Vec<f64>], predicted: &[Vec<f64>]) -> Result<f64> {
    check_curve_pairs(actual, predicted)?;
    let r = actual[0].len();
    for (i, a) in actual.iter().enumerate() {
        if a.len() != r {
            return Err(Error::InvalidInput(format!(
                "subject {i} has {} samples, expected the shared count {r}",
                a.len()
            )));
        }
    }
    let sum: f64 = actual
        .iter()
        .zip(predicted)
        .flat_map(|(a, p)| a.iter().zip(p).map(|(x, y)| (y - x) * (y - x)))
        .sum();
    Ok(sum / (r * actual.len()) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bspline::{design_matrix, fit_least_squares, smoothing_diagonal, KnotSequence};
    use approx::assert_abs_diff_eq;

    #[test]
    fn max_abs_error_examples() {
        assert_eq!(
            max_abs_error(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]).unwrap(),
            0.0
        );
        assert_eq!(max_abs_error(&[0.0, 0.0], &[0.5, -1.0]).unwrap(), 1.0);
        assert_eq!(max_abs_error(&[2.0], &[5.0]).unwrap(), 3.0);
        assert!(max_abs_error(&[1.0], &[1.0, 2.0]).is_err());
        assert!(max_abs_error(&[], &[]).is_err());
    }

    #[test]
    fn rmse_examples() {
        assert_eq!(rmse(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
        assert_abs_diff_eq!(
            rmse(&[0.0, 0.0], &[3.0, 4.0]).unwrap(),
            12.5f64.sqrt(),
            epsilon = 1e-12
        );
        let offset = [1.5, 1.5, 1.5];
        assert_abs_diff_eq!(rmse(&[0.0; 3], &offset).unwrap(), 1.5, epsilon = 1e-12);
    }

    #[test]
    fn max_abs_error_dominates_rmse() {
        let a = [0.3, -1.2, 4.0, 0.0];
        let p = [0.1, 0.7, 3.5, -2.0];
        assert!(max_abs_error(&a, &p).unwrap() >= rmse(&a, &p).unwrap());
    }

    #[test]
    fn gcv_constant_basis_hand_value() {
        let actual = [0.0, 2.0];
        let fitted = [1.0, 1.0];
        let diag = [0.5, 0.5];
        assert_abs_diff_eq!(gcv(&actual, &fitted, &diag).unwrap(), 4.0, epsilon = 1e-12);
    }

    #[test]
    fn gcv_zero_residuals_is_zero() {
        assert_eq!(
            gcv(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0], &[0.3, 0.3, 0.3]).unwrap(),
            0.0
        );
    }

    #[test]
    fn gcv_interpolating_fit_is_infinite() {
        let g = gcv(&[1.0, 2.0], &[1.0, 1.9], &[1.0, 0.5]).unwrap();
        assert!(g.is_infinite() && g > 0.0);
    }

    #[test]
    fn loo_oracle_constant_basis_hand_value() {
        let knots = KnotSequence::new(0, 0.0, 1.0, vec![]).unwrap();
        let design = design_matrix(&knots, &[0.0, 1.0]).unwrap();
        // leaving out either point predicts the other: errors are ±2
        assert_abs_diff_eq!(
            gcv_loo_oracle(&design, &[0.0, 2.0]).unwrap(),
            4.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn loo_oracle_matches_gcv_shortcut_on_a_spline_fit() {
        let knots = KnotSequence::new(2, 0.0, 1.0, vec![0.5]).unwrap();
        let grid: Vec<f64> = (0..14).map(|i| i as f64 / 13.0).collect();
        let design = design_matrix(&knots, &grid).unwrap();
        let obs: Vec<f64> = grid.iter().map(|t| (5.0 * t).sin() + t).collect();
        let model = fit_least_squares(&design, std::slice::from_ref(&obs), 0.0).unwrap();
        let fitted = model.evaluate_on(0, &grid).unwrap();
        let diag = smoothing_diagonal(&design).unwrap();
        let shortcut = gcv(&obs, &fitted, &diag).unwrap();
        let oracle = gcv_loo_oracle(&design, &obs).unwrap();
        assert_abs_diff_eq!(shortcut, oracle, epsilon = 1e-9 * shortcut.max(1.0));
    }

    #[test]
    fn mspe_examples() {
        assert_eq!(mspe(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
        assert_abs_diff_eq!(mspe(&[1.0, 2.0], &[2.0, 4.0]).unwrap(), 2.5, epsilon = 1e-12);
        assert_eq!(mspe(&[3.0], &[1.0]).unwrap(), 4.0);
        assert!(mspe(&[], &[]).is_err());
    }

    #[test]
    fn mspe_mean_examples() {
        let actual = vec![vec![1.0, 2.0, 6.0]];
        assert_eq!(mspe_mean(&actual, &actual.clone()).unwrap(), 0.0);
        let predicted = vec![vec![5.0, 5.0, 5.0]];
        // actual mean 3, predicted mean 5
        assert_abs_diff_eq!(mspe_mean(&actual, &predicted).unwrap(), 4.0, epsilon = 1e-12);
    }

    #[test]
    fn zero_mean_perturbations_leave_mspe_mean_at_zero() {
        let actual = vec![vec![1.0, 2.0, 3.0], vec![0.0, 1.0, -1.0]];
        let predicted = vec![vec![2.0, 2.0, 2.0], vec![0.0, 0.0, 0.0]];
        assert_abs_diff_eq!(mspe_mean(&actual, &predicted).unwrap(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn mspe_function_examples() {
        let actual = vec![vec![1.0, 2.0]];
        assert_eq!(mspe_function(&actual, &actual.clone()).unwrap(), 0.0);
        let predicted = vec![vec![2.0, 1.0]];
        assert_abs_diff_eq!(
            mspe_function(&actual, &predicted).unwrap(),
            1.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn mspe_function_equals_mspe_mean_for_single_samples() {
        let actual = vec![vec![1.0], vec![4.0]];
        let predicted = vec![vec![2.0], vec![2.5]];
        assert_abs_diff_eq!(
            mspe_function(&actual, &predicted).unwrap(),
            mspe_mean(&actual, &predicted).unwrap(),
            epsilon = 1e-15
        );
    }

    #[test]
    fn curve_metrics_reject_mismatched_sampling() {
        let actual = vec![vec![1.0, 2.0]];
        let predicted = vec![vec![1.0]];
        assert!(mspe_mean(&actual, &predicted).is_err());
        assert!(mspe_function(&actual, &predicted).is_err());
    }
}
