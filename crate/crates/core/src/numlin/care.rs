//! Continuous-time algebraic Riccati and Lyapunov equations.
//!
//! The Riccati solver integrates the Riccati differential equation forward in
//! reversed time from `P = Q` until it settles near the stabilising solution,
//! then finishes with Newton-Kleinman iterations (each a Lyapunov solve),
//! which converge quadratically once the gain is stabilising.

use nalgebra::DVector;

use super::{eigenvalues, inf_norm, inverse, is_positive_definite, is_symmetric, max_abs, Matrix, Spectrum};
use crate::error::{Result, SmibError};
use crate::ode::{Method, Solver};

#[derive(Debug, Clone)]
pub struct CareSolution {
    pub p: Matrix,
    /// `R^-1 B^T P`
    pub gain: Matrix,
    pub residual: f64,
    /// Bound the residual is checked against.
    pub tolerance: f64,
    pub closed_loop: Spectrum,
}

/// Solve `F^T X + X F + C = 0` through the Kronecker-product linear system.
pub fn solve_lyapunov(f: &Matrix, c: &Matrix) -> Result<Matrix> {
    let n = f.nrows();
    let ft = f.transpose();
    let eye = Matrix::identity(n, n);
    let m = eye.kronecker(&ft) + ft.kronecker(&eye);
    let rhs = DVector::from_column_slice((-c).as_slice());
    let x = m
        .lu()
        .solve(&rhs)
        .ok_or_else(|| SmibError::NumericalFailure("Lyapunov operator is singular".into()))?;
    let x = Matrix::from_column_slice(n, n, x.as_slice());
    Ok(0.5 * (&x + x.transpose()))
}

/// `A^T P + P A - P B R^-1 B^T P + Q`, measured in the max norm.
pub fn care_residual(a: &Matrix, b: &Matrix, q: &Matrix, r: &Matrix, p: &Matrix) -> Result<f64> {
    let s = b * inverse(r)? * b.transpose();
    Ok(max_abs(&riccati_rate(a, &s, q, p)))
}

fn riccati_rate(a: &Matrix, s: &Matrix, q: &Matrix, p: &Matrix) -> Matrix {
    a.transpose() * p + p * a - p * s * p + q
}

fn check_inputs(a: &Matrix, b: &Matrix, q: &Matrix, r: &Matrix) -> Result<()> {
    let n = super::require_square(a, "A")?;
    let m = b.ncols();
    if b.nrows() != n || q.shape() != (n, n) || r.shape() != (m, m) {
        return Err(SmibError::InvalidArgument(format!(
            "CARE dimension mismatch: A {n}x{n}, B {}x{}, Q {}x{}, R {}x{}",
            b.nrows(),
            b.ncols(),
            q.nrows(),
            q.ncols(),
            r.nrows(),
            r.ncols()
        )));
    }
    if !is_symmetric(q, 1e-12) {
        return Err(SmibError::InvalidArgument("Q must be symmetric".into()));
    }
    let qmin = q.clone().symmetric_eigen().eigenvalues.min();
    if qmin < -1e-12 * (1.0 + max_abs(q)) {
        return Err(SmibError::InvalidArgument("Q must be positive semidefinite".into()));
    }
    if !is_positive_definite(r) {
        return Err(SmibError::InvalidArgument("R must be symmetric positive definite".into()));
    }
    Ok(())
}

pub fn solve_care(a: &Matrix, b: &Matrix, q: &Matrix, r: &Matrix) -> Result<CareSolution> {
    check_inputs(a, b, q, r)?;
    let n = a.nrows();
    let r_inv = inverse(r)?;
    let s = b * &r_inv * b.transpose();

    let mut p = riccati_flow(a, &s, q)?;

    // Newton-Kleinman refinement from the flow's stabilising estimate
    let mut best = p.clone();
    let mut best_res = max_abs(&riccati_rate(a, &s, q, &p));
    for _ in 0..50 {
        let k = &r_inv * b.transpose() * &p;
        let acl = a - b * &k;
        if !eigenvalues(&acl)?.is_hurwitz() {
            break;
        }
        let c = q + k.transpose() * r * &k;
        let next = solve_lyapunov(&acl, &c)?;
        let change = max_abs(&(&next - &p));
        p = next;
        let res = max_abs(&riccati_rate(a, &s, q, &p));
        if res < best_res {
            best = p.clone();
            best_res = res;
        }
        if change <= 1e-14 * (1.0 + max_abs(&p)) {
            break;
        }
    }
    let p = 0.5 * (&best + best.transpose());
    let gain = &r_inv * b.transpose() * &p;
    let closed_loop = eigenvalues(&(a - b * &gain))?;
    let residual = max_abs(&riccati_rate(a, &s, q, &p));
    let rmin = r.clone().symmetric_eigen().eigenvalues.min();
    let bn = inf_norm(b);
    let pn = inf_norm(&p);
    let tolerance = 1e-7 * (inf_norm(q) + pn * pn * bn * bn / rmin);
    if !closed_loop.is_hurwitz() {
        return Err(SmibError::DesignFailure(format!(
            "Riccati solution is not stabilising (max real part {:.3e}, residual {residual:.3e})",
            closed_loop.max_real()
        )));
    }
    if !(residual <= tolerance) {
        return Err(SmibError::DesignFailure(format!(
            "Riccati residual {residual:.3e} exceeds {tolerance:.3e} (n = {n})"
        )));
    }
    Ok(CareSolution { p, gain, residual, tolerance, closed_loop })
}

/// Integrate `dP/dtau = A^T P + P A - P S P + Q` from `P = Q` until the rate
/// is negligible, or until the gain is stabilising and the rate small enough
/// for Newton's method to take over.
fn riccati_flow(a: &Matrix, s: &Matrix, q: &Matrix) -> Result<Matrix> {
    let n = a.nrows();
    let mut solver = Solver::new(Method::Rk45 { rtol: 1e-9, atol: 1e-12, max_step: 10.0 }, n * n)?;
    let mut rhs = |_t: f64, x: &[f64], dx: &mut [f64]| {
        let p = Matrix::from_column_slice(n, n, x);
        let rate = riccati_rate(a, s, q, &p);
        dx.copy_from_slice(rate.as_slice());
    };
    let mut state: Vec<f64> = q.as_slice().to_vec();
    let mut tau = 0.0;
    let mut chunk = 0.05;
    let max_evaluations = 2_000_000;
    loop {
        let target = tau + chunk;
        solver.advance(&mut rhs, &mut tau, &mut state, target, &mut |_| {})?;
        let p = Matrix::from_column_slice(n, n, &state);
        let p = 0.5 * (&p + p.transpose());
        let rate = max_abs(&riccati_rate(a, s, q, &p));
        let scale = 1.0 + max_abs(&p);
        if rate <= 1e-10 * scale {
            return Ok(p);
        }
        if rate <= 1e-3 * scale {
            let acl = a - s * &p;
            if eigenvalues(&acl)?.is_hurwitz() {
                return Ok(p);
            }
        }
        if solver.stats.evaluations > max_evaluations || !rate.is_finite() {
            return Err(SmibError::DesignFailure(format!(
                "Riccati flow did not settle (rate {rate:.3e} at tau = {tau:.3e})"
            )));
        }
        chunk = (chunk * 1.5).min(50.0);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numlin::diag;

    #[test]
    fn scalar_integrator() {
        let one = Matrix::from_element(1, 1, 1.0);
        let sol = solve_care(&Matrix::zeros(1, 1), &one, &one, &one).unwrap();
        assert!((sol.p[(0, 0)] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn unstable_scalar() {
        // 2ap - p^2 b^2/r + q = 0 with a = 1, b = 1, q = 1, r = 1 -> p = 1 + sqrt 2
        let one = Matrix::from_element(1, 1, 1.0);
        let sol = solve_care(&one, &one, &one, &one).unwrap();
        assert!((sol.p[(0, 0)] - (1.0 + 2f64.sqrt())).abs() < 1e-12);
    }

    #[test]
    fn double_integrator() {
        let a = Matrix::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 0.0]);
        let b = Matrix::from_row_slice(2, 1, &[0.0, 1.0]);
        let sol = solve_care(&a, &b, &diag(&[1.0, 1.0]), &Matrix::identity(1, 1)).unwrap();
        // known gain [1, sqrt 3]
        assert!((sol.gain[(0, 0)] - 1.0).abs() < 1e-10);
        assert!((sol.gain[(0, 1)] - 3f64.sqrt()).abs() < 1e-10);
    }

    #[test]
    fn lyapunov_scalar() {
        let f = Matrix::from_element(1, 1, -2.0);
        let c = Matrix::from_element(1, 1, 4.0);
        assert!((solve_lyapunov(&f, &c).unwrap()[(0, 0)] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_indefinite_r() {
        let one = Matrix::from_element(1, 1, 1.0);
        let err = solve_care(&one, &one, &one, &Matrix::from_element(1, 1, -1.0)).unwrap_err();
        assert!(matches!(err, SmibError::InvalidArgument(_)));
    }
}
