//! Dense linear algebra for small systems: eigenvalues, polynomial roots,
//! Lyapunov and algebraic Riccati equations.
//!
//! Storage and LU factorisations come from `nalgebra`; the spectral and
//! Riccati solvers are implemented here.

mod care;
mod eigen;
mod poly;

pub use care::{care_residual, solve_care, solve_lyapunov, CareSolution};
pub use eigen::{eigenvalues, eigenvector, hessenberg, Spectrum};
pub use poly::{poly_add, poly_eval, poly_eval_complex, poly_from_roots, poly_mul, poly_scale, poly_trim, polynomial_roots};

use nalgebra::DMatrix;

use crate::error::{Result, SmibError};

pub type Matrix = DMatrix<f64>;
pub use nalgebra::Complex;
pub type C64 = Complex<f64>;

pub fn inf_norm(a: &Matrix) -> f64 {
    a.row_iter().map(|r| r.iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max)
}

pub fn max_abs(a: &Matrix) -> f64 {
    a.iter().fold(0.0, |m, v| m.max(v.abs()))
}

pub fn require_square(a: &Matrix, what: &str) -> Result<usize> {
    if a.nrows() != a.ncols() {
        return Err(SmibError::InvalidArgument(format!("{what} must be square, got {}x{}", a.nrows(), a.ncols())));
    }
    if a.iter().any(|v| !v.is_finite()) {
        return Err(SmibError::InvalidArgument(format!("{what} has non-finite entries")));
    }
    Ok(a.nrows())
}

pub fn diag(values: &[f64]) -> Matrix {
    Matrix::from_diagonal(&nalgebra::DVector::from_column_slice(values))
}

/// `[B, AB, ..., A^(n-1) B]`
pub fn controllability_matrix(a: &Matrix, b: &Matrix) -> Matrix {
    let n = a.nrows();
    let m = b.ncols();
    let mut out = Matrix::zeros(n, n * m);
    let mut block = b.clone();
    for i in 0..n {
        out.view_mut((0, i * m), (n, m)).copy_from(&block);
        block = a * &block;
    }
    out
}

/// Numerical rank from the singular values, relative to the largest one.
pub fn rank(a: &Matrix, rel_tol: f64) -> usize {
    let sv = a.clone().svd(false, false).singular_values;
    let top = sv.iter().cloned().fold(0.0, f64::max);
    sv.iter().filter(|s| **s > rel_tol * top).count()
}

/// Symmetric positive definite square root via the eigen-decomposition.
pub fn spd_sqrt(a: &Matrix) -> Result<Matrix> {
    let eig = a.clone().symmetric_eigen();
    if eig.eigenvalues.iter().any(|l| *l <= 0.0) {
        return Err(SmibError::InvalidArgument("matrix is not positive definite".into()));
    }
    let d = Matrix::from_diagonal(&eig.eigenvalues.map(f64::sqrt));
    Ok(&eig.eigenvectors * d * eig.eigenvectors.transpose())
}

pub fn is_symmetric(a: &Matrix, tol: f64) -> bool {
    a.nrows() == a.ncols() && (a - a.transpose()).iter().all(|v| v.abs() <= tol * (1.0 + max_abs(a)))
}

pub fn is_positive_definite(a: &Matrix) -> bool {
    is_symmetric(a, 1e-12) && a.clone().cholesky().is_some()
}

pub fn inverse(a: &Matrix) -> Result<Matrix> {
    a.clone()
        .try_inverse()
        .ok_or_else(|| SmibError::NumericalFailure("matrix is singular".into()))
}
