use alloc::vec::Vec;

use super::{inverse, Matrix};
use crate::{Error, Result};

const ZERO_TOL: f64 = 1e-9;

/// Limit of `exp(A y)` as `y → ∞`.
///
/// Exists when every eigenvalue other than zero has negative real part and
/// zero is semisimple. The limit is the spectral projector `R (L R)^{-1} L`
/// built from right and left null bases. Without a zero eigenvalue the limit
/// is the zero matrix.
pub fn zero_eigen_projection(a: &Matrix) -> Result<Matrix> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::Dimension { expected: n, found: a.ncols() });
    }
    if n == 0 {
        return Ok(Matrix::zeros(0, 0));
    }
    let scale = a.abs().max().max(1.0);
    let eig = a.clone().complex_eigenvalues();
    let mut zeros = 0;
    for z in eig.iter() {
        if libm::hypot(z.re, z.im) <= ZERO_TOL * scale {
            zeros += 1;
        } else if z.re > ZERO_TOL * scale {
            return Err(Error::LimitDiverges { re: z.re });
        } else if z.re >= -ZERO_TOL * scale {
            return Err(Error::LimitOscillates { im: z.im });
        }
    }
    if zeros == 0 {
        return Ok(Matrix::zeros(n, n));
    }
    let right = null_basis(a, scale);
    let left = null_basis(&a.transpose(), scale).transpose();
    if right.ncols() != zeros || left.nrows() != zeros {
        return Err(Error::LimitNotSemisimple);
    }
    let gram = &left * &right;
    let inv = inverse(&gram).map_err(|_| Error::LimitNotSemisimple)?;
    Ok(right * inv * left)
}

/// Orthonormal basis of the right null space, as columns.
fn null_basis(a: &Matrix, scale: f64) -> Matrix {
    let n = a.nrows();
    let svd = a.clone().svd(false, true);
    let v_t = svd.v_t.expect("requested");
    let cols: Vec<usize> = (0..n)
        .filter(|&i| svd.singular_values[i] <= 1e-8 * scale)
        .collect();
    Matrix::from_fn(n, cols.len(), |i, j| v_t[(cols[j], i)])
}
