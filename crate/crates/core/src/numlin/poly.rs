//! Real polynomials as coefficient vectors in descending powers.

use super::{eigenvalues, Matrix, Spectrum, C64};
use crate::error::{Result, SmibError};

/// Drop leading (highest-power) zeros, keeping at least one coefficient.
pub fn poly_trim(p: &[f64]) -> Vec<f64> {
    let first = p.iter().position(|c| *c != 0.0).unwrap_or(p.len().saturating_sub(1));
    if p.is_empty() { vec![0.0] } else { p[first..].to_vec() }
}

pub fn poly_mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    if a.is_empty() || b.is_empty() {
        return vec![0.0];
    }
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

pub fn poly_add(a: &[f64], b: &[f64]) -> Vec<f64> {
    let n = a.len().max(b.len());
    let mut out = vec![0.0; n];
    for (i, x) in a.iter().enumerate() {
        out[n - a.len() + i] += x;
    }
    for (i, y) in b.iter().enumerate() {
        out[n - b.len() + i] += y;
    }
    out
}

pub fn poly_scale(a: &[f64], k: f64) -> Vec<f64> {
    a.iter().map(|c| c * k).collect()
}

pub fn poly_eval(p: &[f64], x: f64) -> f64 {
    p.iter().fold(0.0, |acc, c| acc * x + c)
}

pub fn poly_eval_complex(p: &[f64], z: C64) -> C64 {
    p.iter().fold(C64::new(0.0, 0.0), |acc, c| acc * z + c)
}

/// Monic real polynomial with the given roots (conjugates must be paired).
pub fn poly_from_roots(roots: &[C64]) -> Vec<f64> {
    let mut acc = vec![C64::new(1.0, 0.0)];
    for r in roots {
        let mut next = vec![C64::new(0.0, 0.0); acc.len() + 1];
        for (i, c) in acc.iter().enumerate() {
            next[i] += c;
            next[i + 1] -= c * r;
        }
        acc = next;
    }
    acc.into_iter().map(|c| c.re).collect()
}

fn poly_derivative(p: &[f64]) -> Vec<f64> {
    let n = p.len();
    if n <= 1 {
        return vec![0.0];
    }
    p[..n - 1].iter().enumerate().map(|(i, c)| c * (n - 1 - i) as f64).collect()
}

/// Roots from the companion-matrix eigenvalues, each polished by a few Newton
/// steps on the original polynomial.
pub fn polynomial_roots(coeffs: &[f64]) -> Result<Spectrum> {
    if coeffs.iter().any(|c| !c.is_finite()) {
        return Err(SmibError::InvalidArgument("polynomial has non-finite coefficients".into()));
    }
    let p = poly_trim(coeffs);
    if p.len() == 1 {
        return Err(SmibError::InvalidArgument(if p[0] == 0.0 {
            "zero polynomial has no well-defined roots".into()
        } else {
            "constant polynomial has no roots".into()
        }));
    }
    let n = p.len() - 1;
    let lead = p[0];
    // strip exact zero roots first; they are common (factors of s)
    let trailing = p.iter().rev().take_while(|c| **c == 0.0).count();
    let core = &p[..p.len() - trailing];
    let mut roots = vec![C64::new(0.0, 0.0); trailing];
    let m = core.len() - 1;
    if m > 0 {
        let mut comp = Matrix::zeros(m, m);
        for j in 0..m {
            comp[(0, j)] = -core[j + 1] / lead;
        }
        for i in 1..m {
            comp[(i, i - 1)] = 1.0;
        }
        let dp = poly_derivative(core);
        for z in eigenvalues(&comp)?.0 {
            roots.push(newton_polish(core, &dp, z));
        }
    }
    debug_assert_eq!(roots.len(), n);
    Ok(Spectrum::new(roots))
}

fn newton_polish(p: &[f64], dp: &[f64], mut z: C64) -> C64 {
    let mut best = z;
    let mut best_val = poly_eval_complex(p, z).norm();
    for _ in 0..8 {
        let d = poly_eval_complex(dp, z);
        if d.norm() == 0.0 {
            break;
        }
        let step = poly_eval_complex(p, z) / d;
        z -= step;
        let val = poly_eval_complex(p, z).norm();
        if !(val < best_val) {
            break;
        }
        best = z;
        best_val = val;
    }
    // keep real roots real
    if best.im.abs() < 1e-12 * (1.0 + best.re.abs()) {
        best.im = 0.0;
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_with_real_roots() {
        let r = polynomial_roots(&[1.0, 3.0, 2.0]).unwrap();
        assert!((r.0[0].re + 2.0).abs() < 1e-12);
        assert!((r.0[1].re + 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_polynomial_is_rejected() {
        assert!(polynomial_roots(&[0.0, 0.0]).is_err());
        assert!(polynomial_roots(&[]).is_err());
    }

    #[test]
    fn factor_of_s() {
        let r = polynomial_roots(&[1.0, 0.5517, 0.0]).unwrap();
        assert!((r.0[0].re + 0.5517).abs() < 1e-14);
        assert_eq!(r.0[1], C64::new(0.0, 0.0));
    }

    #[test]
    fn arithmetic() {
        assert_eq!(poly_mul(&[1.0, 1.0], &[1.0, 2.0]), vec![1.0, 3.0, 2.0]);
        assert_eq!(poly_add(&[1.0, 0.0, 0.0], &[2.0, 1.0]), vec![1.0, 2.0, 1.0]);
        assert_eq!(poly_trim(&[0.0, 0.0, 2.0]), vec![2.0]);
        assert_eq!(poly_eval(&[1.0, 0.0, -4.0], 2.0), 0.0);
        let p = poly_from_roots(&[C64::new(-1.0, 1.0), C64::new(-1.0, -1.0)]);
        assert_eq!(p, vec![1.0, 2.0, 2.0]);
    }
}
