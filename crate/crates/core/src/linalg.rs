//! Dense helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector};

use crate::config::TOLERANCES;
use crate::error::{Error, Result};

/// Maximum absolute row sum.
pub fn inf_norm(m: &DMatrix<f64>) -> f64 {
    m.row_iter().map(|r| r.iter().map(|x| x.abs()).sum::<f64>()).fold(0.0, f64::max)
}

pub fn vec_inf_norm(v: &DVector<f64>) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

pub fn row_sums(m: &DMatrix<f64>) -> DVector<f64> {
    DVector::from_iterator(m.nrows(), m.row_iter().map(|r| r.sum()))
}

pub fn col_sums(m: &DMatrix<f64>) -> DVector<f64> {
    DVector::from_iterator(m.ncols(), m.column_iter().map(|c| c.sum()))
}

/// Inverse by LU with a residual check `||A X - I||_inf <= solve_residual`.
pub fn inverse_checked(a: &DMatrix<f64>, what: &str) -> Result<DMatrix<f64>> {
    let n = a.nrows();
    let inv = a
        .clone()
        .lu()
        .try_inverse()
        .ok_or_else(|| Error::numeric(format!("{what} is singular")))?;
    let residual = inf_norm(&(a * &inv - DMatrix::<f64>::identity(n, n)));
    if !(residual <= TOLERANCES.solve_residual) {
        return Err(Error::numeric(format!("{what}: inverse residual {residual:e} exceeds tolerance")));
    }
    Ok(inv)
}

/// Solves `A x = b` by LU.
pub fn solve(a: &DMatrix<f64>, b: &DVector<f64>, what: &str) -> Result<DVector<f64>> {
    a.clone().lu().solve(b).ok_or_else(|| Error::numeric(format!("{what} is singular")))
}

pub fn max_asymmetry(m: &DMatrix<f64>) -> f64 {
    (m - m.transpose()).amax()
}

pub fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

/// Smallest eigenvalue of a symmetric matrix.
pub fn symmetric_min_eigenvalue(m: &DMatrix<f64>) -> Result<f64> {
    let eig = nalgebra::SymmetricEigen::try_new(m.clone(), f64::EPSILON, 0)
        .ok_or_else(|| Error::numeric("symmetric eigen decomposition failed"))?;
    Ok(eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min))
}

/// Matrix with a single one at `(i, j)`.
pub fn unit(n: usize, i: usize, j: usize) -> DMatrix<f64> {
    let mut e = DMatrix::zeros(n, n);
    e[(i, j)] = 1.0;
    e
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_of_identity_shift() {
        let a = DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 3.0]);
        let inv = inverse_checked(&a, "a").unwrap();
        assert!((inv[(0, 0)] - 0.6).abs() < 1e-15);
        assert!((inv[(0, 1)] + 0.2).abs() < 1e-15);
    }

    #[test]
    fn singular_is_numeric_error() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 4.0]);
        assert_eq!(inverse_checked(&a, "a").unwrap_err().exit_code(), 4);
    }

    #[test]
    fn sums_and_norms() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, -2.0, 3.0, 4.0]);
        assert_eq!(inf_norm(&a), 7.0);
        assert_eq!(row_sums(&a).as_slice(), &[-1.0, 7.0]);
        assert_eq!(col_sums(&a).as_slice(), &[4.0, 2.0]);
        assert_eq!(max_asymmetry(&a), 5.0);
    }
}
