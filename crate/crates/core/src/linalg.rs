//! Thin wrappers around nalgebra factorizations shared by the fitting code.

use nalgebra::DMatrix;

use crate::error::Error;
use crate::Result;

/// Solves `argmin_X ||A X - B||_F` for a tall full-column-rank `A` via QR.
///
/// Errors with [`Error::Singular`] when the triangular factor has a
/// negligible diagonal entry relative to its largest one.
pub(crate) fn solve_least_squares(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    debug_assert_eq!(a.nrows(), b.nrows());
    if a.nrows() < a.ncols() {
        return Err(Error::Singular(format!(
            "underdetermined system: {} equations for {} unknowns",
            a.nrows(),
            a.ncols()
        )));
    }
    let qr = a.clone().qr();
    let r = qr.r();
    check_full_rank(&r)?;
    let qtb = qr.q().transpose() * b;
    r.solve_upper_triangular(&qtb)
        .ok_or_else(|| Error::Singular("triangular solve failed".into()))
}

/// Diagonal of the projection matrix `A (AᵀA)⁻¹ Aᵀ`, computed from the thin
/// orthogonal factor so the full projection is never materialized.
pub(crate) fn projection_diagonal(a: &DMatrix<f64>) -> Result<Vec<f64>> {
    if a.nrows() < a.ncols() {
        return Err(Error::InsufficientData {
            needed: a.ncols(),
            got: a.nrows(),
        });
    }
    let qr = a.clone().qr();
    check_full_rank(&qr.r())?;
    let q = qr.q();
    Ok((0..q.nrows()).map(|j| q.row(j).norm_squared()).collect())
}

fn check_full_rank(r: &DMatrix<f64>) -> Result<()> {
    let dim = r.nrows().min(r.ncols());
    let largest = (0..dim).map(|i| r[(i, i)].abs()).fold(0.0f64, f64::max);
    if largest == 0.0 {
        return Err(Error::Singular("zero design matrix".into()));
    }
    let tol = f64::EPSILON * r.nrows().max(r.ncols()) as f64 * largest;
    for i in 0..dim {
        if r[(i, i)].abs() <= tol {
            return Err(Error::Singular(format!(
                "negligible pivot at column {i} (|r| = {:.3e})",
                r[(i, i)].abs()
            )));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn least_squares_recovers_exact_solution() {
        let a = DMatrix::from_row_slice(4, 2, &[1.0, 0.0, 1.0, 1.0, 1.0, 2.0, 1.0, 3.0]);
        let x = DMatrix::from_row_slice(2, 1, &[0.5, 2.0]);
        let b = &a * &x;
        let solved = solve_least_squares(&a, &b).unwrap();
        assert!((solved - x).abs().max() < 1e-12);
    }

    #[test]
    fn singular_matrix_is_rejected() {
        let a = DMatrix::from_row_slice(3, 2, &[1.0, 2.0, 2.0, 4.0, 3.0, 6.0]);
        let b = DMatrix::zeros(3, 1);
        assert!(matches!(
            solve_least_squares(&a, &b),
            Err(Error::Singular(_))
        ));
    }

    #[test]
    fn projection_diagonal_of_square_identity_fit() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.5, 0.5]);
        let diag = projection_diagonal(&a).unwrap();
        for d in diag {
            assert!((d - 1.0).abs() < 1e-12);
        }
    }
}
