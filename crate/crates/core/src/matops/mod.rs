//! Dense matrix kernels: exponential, linear solves, quadratic matrix
//! equations and zero-eigenvalue projections.

mod expm;
mod riccati;
mod spectral;

pub use expm::expm;
pub use riccati::{solve_riccati, RiccatiIteration, RiccatiOptions, RiccatiProblem, SolveReport};
pub use spectral::zero_eigen_projection;

use nalgebra::{DMatrix, RowDVector};

use crate::{Error, Result};

pub type Matrix = DMatrix<f64>;
pub type RowVector = RowDVector<f64>;

/// Condition estimates above this are treated as singular.
pub const COND_LIMIT: f64 = 1e13;

/// Induced 1-norm (maximum absolute column sum).
pub fn norm1(a: &Matrix) -> f64 {
    a.column_iter()
        .map(|c| c.iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Induced ∞-norm (maximum absolute row sum).
pub fn norm_inf(a: &Matrix) -> f64 {
    a.row_iter()
        .map(|r| r.iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

pub fn max_abs(v: &RowVector) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Inverse with a 1-norm condition check.
pub fn inverse(a: &Matrix) -> Result<Matrix> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::Dimension {
            expected: n,
            found: a.ncols(),
        });
    }
    if n == 0 {
        return Ok(Matrix::zeros(0, 0));
    }
    if a.iter().any(|x| !x.is_finite()) {
        return Err(Error::Diverged);
    }
    let inv = a
        .clone()
        .lu()
        .try_inverse()
        .ok_or(Error::Singular { cond: f64::INFINITY })?;
    let cond = norm1(a) * norm1(&inv);
    if !cond.is_finite() || cond > COND_LIMIT {
        return Err(Error::Singular { cond });
    }
    Ok(inv)
}

/// Solves `A X = B` by LU with partial pivoting, refusing ill-conditioned `A`.
pub fn linear_solve(a: &Matrix, b: &Matrix) -> Result<Matrix> {
    if a.nrows() != b.nrows() {
        return Err(Error::Dimension {
            expected: a.nrows(),
            found: b.nrows(),
        });
    }
    Ok(inverse(a)? * b)
}

/// Solves `X A = B` for `X`.
pub fn right_solve(b: &Matrix, a: &Matrix) -> Result<Matrix> {
    Ok(linear_solve(&a.transpose(), &b.transpose())?.transpose())
}

/// Integer matrix power by repeated squaring.
pub fn matpow(a: &Matrix, mut k: usize) -> Matrix {
    let mut result = Matrix::identity(a.nrows(), a.ncols());
    let mut base = a.clone();
    while k > 0 {
        if k & 1 == 1 {
            result = &result * &base;
        }
        k >>= 1;
        if k > 0 {
            base = &base * &base;
        }
    }
    result
}

/// Extracts the submatrix on the given rows and columns.
pub fn submatrix(a: &Matrix, rows: &[usize], cols: &[usize]) -> Matrix {
    Matrix::from_fn(rows.len(), cols.len(), |i, j| a[(rows[i], cols[j])])
}

pub fn subvector(v: &RowVector, idx: &[usize]) -> RowVector {
    RowVector::from_fn(idx.len(), |_, j| v[idx[j]])
}

pub fn diag(v: &[f64]) -> Matrix {
    Matrix::from_fn(v.len(), v.len(), |i, j| if i == j { v[i] } else { 0.0 })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solve_and_power() {
        let a = Matrix::from_row_slice(2, 2, &[4.0, 1.0, 2.0, 3.0]);
        let b = Matrix::from_row_slice(2, 1, &[1.0, 2.0]);
        let x = linear_solve(&a, &b).unwrap();
        assert!((&a * &x - &b).abs().max() < 1e-14);
        let p = matpow(&a, 5);
        let q = &a * &a * &a * &a * &a;
        assert!((p - q).abs().max() < 1e-9);
    }

    #[test]
    fn singular_is_reported() {
        let a = Matrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 4.0]);
        assert!(matches!(inverse(&a), Err(Error::Singular { .. })));
    }

    #[test]
    fn right_solve_matches() {
        let a = Matrix::from_row_slice(2, 2, &[2.0, 1.0, 0.5, 3.0]);
        let b = Matrix::from_row_slice(1, 2, &[1.0, -1.0]);
        let x = right_solve(&b, &a).unwrap();
        assert!((&x * &a - &b).abs().max() < 1e-14);
    }
}
