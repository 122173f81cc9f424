//! Dense linear algebra: matrix type, SVD, Moore–Penrose pseudoinverse and
//! minimum-norm least squares.

mod matrix;
mod svd;

pub use matrix::{matmul, Matrix};
pub use svd::{svd, SvdResult, MAX_SWEEPS};

use crate::error::{Error, Result};

/// Default relative singular-value cutoff: machine epsilon × max(rows, cols).
pub fn default_rcond(rows: usize, cols: usize) -> f64 {
    f64::EPSILON * rows.max(cols) as f64
}

fn resolve_rcond(a: &Matrix, rcond: Option<f64>) -> Result<f64> {
    match rcond {
        None => Ok(default_rcond(a.rows(), a.cols())),
        Some(r) if r >= 0.0 && r.is_finite() => Ok(r),
        Some(r) => Err(Error::Validation(format!(
            "rcond must be finite and >= 0, got {r}"
        ))),
    }
}

/// Indices of singular values above `rcond * sigma_max`.
fn retained(singular_values: &[f64], rcond: f64) -> Vec<usize> {
    let sigma_max = singular_values.first().copied().unwrap_or(0.0);
    let cutoff = rcond * sigma_max;
    singular_values
        .iter()
        .enumerate()
        .filter(|(_, &s)| s > cutoff && s > 0.0)
        .map(|(i, _)| i)
        .collect()
}

/// Moore–Penrose pseudoinverse `V · diag(1/σ) · Uᵀ`, dropping singular values
/// at or below `rcond · σ_max` (`None` selects [`default_rcond`]).
pub fn pseudoinverse(a: &Matrix, rcond: Option<f64>) -> Result<Matrix> {
    let rcond = resolve_rcond(a, rcond)?;
    let dec = svd(a)?;
    let keep = retained(&dec.singular_values, rcond);
    let (m, n) = a.shape();
    if keep.is_empty() {
        return Ok(Matrix::zeros(n, m));
    }
    // (V Σ⁺) is n×r, Uᵀ restricted to kept rows is r×m
    let r = keep.len();
    let mut v_scaled = Matrix::zeros(n, r);
    for (c, &k) in keep.iter().enumerate() {
        let inv = 1.0 / dec.singular_values[k];
        for i in 0..n {
            v_scaled[(i, c)] = dec.vt[(k, i)] * inv;
        }
    }
    let ut = dec.u.select_cols(&keep).transpose();
    v_scaled.matmul(&ut)
}

/// Minimum-Frobenius-norm minimizer of `‖a·x − targets‖_F`.
pub fn lstsq(a: &Matrix, targets: &Matrix, rcond: Option<f64>) -> Result<Matrix> {
    if a.rows() != targets.rows() {
        return Err(Error::shape(
            "lstsq",
            format!(
                "system is {}x{} but targets are {}x{}",
                a.rows(),
                a.cols(),
                targets.rows(),
                targets.cols()
            ),
        ));
    }
    let rcond = resolve_rcond(a, rcond)?;
    let dec = svd(a)?;
    let keep = retained(&dec.singular_values, rcond);
    let n = a.cols();
    let p = targets.cols();
    if keep.is_empty() {
        return Ok(Matrix::zeros(n, p));
    }
    // coefficients in the singular basis: Σ⁺ Uᵀ T, r×p
    let mut coeffs = dec.u.select_cols(&keep).transpose().matmul(targets)?;
    for (row, &k) in keep.iter().enumerate() {
        let inv = 1.0 / dec.singular_values[k];
        coeffs.row_mut(row).iter_mut().for_each(|c| *c *= inv);
    }
    let v = dec.vt.select_rows(&keep).transpose();
    v.matmul(&coeffs)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_inverse() {
        let p = pseudoinverse(&Matrix::from_diag(&[2.0, 4.0]), None).unwrap();
        assert_eq!(p.to_rows(), vec![vec![0.5, 0.0], vec![0.0, 0.25]]);
    }

    #[test]
    fn zero_matrix_gives_zero_transpose_shape() {
        let p = pseudoinverse(&Matrix::zeros(3, 2), None).unwrap();
        assert_eq!(p.shape(), (2, 3));
        assert!(p.as_slice().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn identity_system() {
        let t = Matrix::column(&[1.5, -2.0, 7.25]);
        let x = lstsq(&Matrix::identity(3), &t, None).unwrap();
        for (a, b) in x.as_slice().iter().zip(t.as_slice()) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn lstsq_shape_mismatch() {
        let err = lstsq(&Matrix::zeros(3, 2), &Matrix::zeros(4, 1), None).unwrap_err();
        assert!(matches!(err, Error::Shape { .. }));
    }

    #[test]
    fn negative_rcond_rejected() {
        assert!(pseudoinverse(&Matrix::identity(2), Some(-1.0)).is_err());
    }

    #[test]
    fn rcond_cuts_small_values() {
        let p = pseudoinverse(&Matrix::from_diag(&[1.0, 1e-3]), Some(1e-2)).unwrap();
        assert_eq!(p.to_rows(), vec![vec![1.0, 0.0], vec![0.0, 0.0]]);
    }
}
