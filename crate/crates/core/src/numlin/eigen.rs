//! Real nonsymmetric eigenvalues: balancing, Householder reduction to upper
//! Hessenberg form, then Francis double-shift QR with deflation.

use nalgebra::DMatrix;

use super::{require_square, Matrix, C64};
use crate::error::{Result, SmibError};

/// Eigenvalues sorted by ascending real part, then imaginary part.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum(pub Vec<C64>);

impl Spectrum {
    pub fn new(mut values: Vec<C64>) -> Self {
        values.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
        Spectrum(values)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, C64> {
        self.0.iter()
    }

    pub fn max_real(&self) -> f64 {
        self.0.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn is_hurwitz(&self) -> bool {
        self.max_real() < 0.0
    }

    /// Largest distance between the two spectra under the best one-to-one
    /// matching (greedy nearest neighbour, adequate for well separated sets).
    pub fn distance(&self, other: &[C64]) -> f64 {
        if self.0.len() != other.len() {
            return f64::INFINITY;
        }
        let mut used = vec![false; other.len()];
        let mut worst: f64 = 0.0;
        for z in &self.0 {
            let (j, d) = other
                .iter()
                .enumerate()
                .filter(|(j, _)| !used[*j])
                .map(|(j, w)| (j, (z - w).norm()))
                .min_by(|a, b| a.1.total_cmp(&b.1))
                .expect("equal lengths");
            used[j] = true;
            worst = worst.max(d);
        }
        worst
    }
}

pub fn eigenvalues(a: &Matrix) -> Result<Spectrum> {
    let n = require_square(a, "eigenvalue input")?;
    if n == 0 {
        return Ok(Spectrum(Vec::new()));
    }
    let mut h = a.clone();
    balance(&mut h);
    reduce_to_hessenberg(&mut h);
    let values = hessenberg_qr(&mut h)?;
    Ok(Spectrum::new(values))
}

/// Upper Hessenberg matrix orthogonally similar to `a`.
pub fn hessenberg(a: &Matrix) -> Matrix {
    let mut h = a.clone();
    reduce_to_hessenberg(&mut h);
    h
}

/// Eigenvector for a known eigenvalue by inverse iteration.
pub fn eigenvector(a: &Matrix, lambda: C64) -> Result<nalgebra::DVector<C64>> {
    let n = require_square(a, "eigenvector input")?;
    let scale = super::max_abs(a).max(1.0);
    // perturb the shift slightly so the shifted matrix is invertible
    let shift = lambda + C64::new(scale * 1e-10, scale * 1e-10);
    let m = DMatrix::<C64>::from_fn(n, n, |i, j| {
        let v = C64::new(a[(i, j)], 0.0);
        if i == j { v - shift } else { v }
    });
    let lu = m.lu();
    let mut v = nalgebra::DVector::<C64>::from_fn(n, |i, _| C64::new(1.0 / (1.0 + i as f64), 0.3));
    for _ in 0..3 {
        v = lu.solve(&v).ok_or_else(|| SmibError::NumericalFailure("inverse iteration failed".into()))?;
        let norm = v.norm();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(SmibError::NumericalFailure("inverse iteration failed".into()));
        }
        v /= C64::new(norm, 0.0);
    }
    Ok(v)
}

/// Diagonal similarity scaling by powers of two so rows and columns have
/// comparable norms.
fn balance(a: &mut Matrix) {
    const RADIX: f64 = 2.0;
    let n = a.nrows();
    let sqrdx = RADIX * RADIX;
    let mut done = false;
    while !done {
        done = true;
        for i in 0..n {
            let mut r = 0.0;
            let mut c = 0.0;
            for j in 0..n {
                if j != i {
                    c += a[(j, i)].abs();
                    r += a[(i, j)].abs();
                }
            }
            if c != 0.0 && r != 0.0 {
                let mut g = r / RADIX;
                let mut f = 1.0;
                let s = c + r;
                while c < g {
                    f *= RADIX;
                    c *= sqrdx;
                }
                g = r * RADIX;
                while c > g {
                    f /= RADIX;
                    c /= sqrdx;
                }
                if (c + r) / f < 0.95 * s {
                    done = false;
                    let g = 1.0 / f;
                    for j in 0..n {
                        a[(i, j)] *= g;
                    }
                    for j in 0..n {
                        a[(j, i)] *= f;
                    }
                }
            }
        }
    }
}

fn reduce_to_hessenberg(a: &mut Matrix) {
    let n = a.nrows();
    if n < 3 {
        return;
    }
    let mut v = vec![0.0; n];
    for k in 0..n - 2 {
        let norm: f64 = (k + 1..n).map(|i| a[(i, k)] * a[(i, k)]).sum::<f64>().sqrt();
        if norm == 0.0 {
            continue;
        }
        let x0 = a[(k + 1, k)];
        let alpha = if x0 >= 0.0 { -norm } else { norm };
        for i in k + 1..n {
            v[i] = a[(i, k)];
        }
        v[k + 1] -= alpha;
        let vnorm2: f64 = (k + 1..n).map(|i| v[i] * v[i]).sum();
        if vnorm2 == 0.0 {
            continue;
        }
        // H = I - 2 v v^T / (v^T v), applied on both sides
        for j in k..n {
            let s: f64 = (k + 1..n).map(|i| v[i] * a[(i, j)]).sum::<f64>() * 2.0 / vnorm2;
            for i in k + 1..n {
                a[(i, j)] -= s * v[i];
            }
        }
        for i in 0..n {
            let s: f64 = (k + 1..n).map(|j| a[(i, j)] * v[j]).sum::<f64>() * 2.0 / vnorm2;
            for j in k + 1..n {
                a[(i, j)] -= s * v[j];
            }
        }
        a[(k + 1, k)] = alpha;
        for i in k + 2..n {
            a[(i, k)] = 0.0;
        }
    }
}

fn sign(a: f64, b: f64) -> f64 {
    if b >= 0.0 { a.abs() } else { -a.abs() }
}

/// Francis double-shift QR on an upper Hessenberg matrix (destroyed).
fn hessenberg_qr(a: &mut Matrix) -> Result<Vec<C64>> {
    let n = a.nrows();
    let mut wr = vec![0.0; n];
    let mut wi = vec![0.0; n];
    let mut anorm = 0.0;
    for i in 0..n {
        for j in i.saturating_sub(1)..n {
            anorm += a[(i, j)].abs();
        }
    }
    let cap = 100 * n * n;
    let mut total_its = 0usize;
    let mut nn = n as isize - 1;
    let mut t = 0.0;
    while nn >= 0 {
        let mut its = 0usize;
        loop {
            let nu = nn as usize;
            // look for a single small subdiagonal element
            let mut l = nu;
            while l >= 1 {
                let mut s = a[(l - 1, l - 1)].abs() + a[(l, l)].abs();
                if s == 0.0 {
                    s = anorm;
                }
                if a[(l, l - 1)].abs() + s == s {
                    a[(l, l - 1)] = 0.0;
                    break;
                }
                l -= 1;
            }
            let mut x = a[(nu, nu)];
            if l == nu {
                wr[nu] = x + t;
                wi[nu] = 0.0;
                nn -= 1;
                break;
            }
            let mut y = a[(nu - 1, nu - 1)];
            let mut w = a[(nu, nu - 1)] * a[(nu - 1, nu)];
            if l == nu - 1 {
                let p = 0.5 * (y - x);
                let q = p * p + w;
                let z = q.abs().sqrt();
                x += t;
                if q >= 0.0 {
                    let z = p + sign(z, p);
                    wr[nu - 1] = x + z;
                    wr[nu] = if z != 0.0 { x - w / z } else { x + z };
                    wi[nu - 1] = 0.0;
                    wi[nu] = 0.0;
                } else {
                    wr[nu - 1] = x + p;
                    wr[nu] = x + p;
                    wi[nu - 1] = -z;
                    wi[nu] = z;
                }
                nn -= 2;
                break;
            }
            if total_its >= cap {
                return Err(SmibError::NumericalFailure(format!(
                    "QR iteration did not converge within {cap} sweeps"
                )));
            }
            if its > 0 && its % 10 == 0 {
                // exceptional shift
                t += x;
                for i in 0..=nu {
                    a[(i, i)] -= x;
                }
                let s = a[(nu, nu - 1)].abs() + a[(nu - 1, nu - 2)].abs();
                x = 0.75 * s;
                y = x;
                w = -0.4375 * s * s;
            }
            its += 1;
            total_its += 1;

            // form the shift and look for two consecutive small subdiagonals
            let mut m = nu - 2;
            let (mut p, mut q, mut r);
            loop {
                let z = a[(m, m)];
                let rr = x - z;
                let ss = y - z;
                p = (rr * ss - w) / a[(m + 1, m)] + a[(m, m + 1)];
                q = a[(m + 1, m + 1)] - z - rr - ss;
                r = a[(m + 2, m + 1)];
                let s = p.abs() + q.abs() + r.abs();
                p /= s;
                q /= s;
                r /= s;
                if m == l {
                    break;
                }
                let u = a[(m, m - 1)].abs() * (q.abs() + r.abs());
                let v = p.abs() * (a[(m - 1, m - 1)].abs() + z.abs() + a[(m + 1, m + 1)].abs());
                if u + v == v {
                    break;
                }
                m -= 1;
            }
            for i in m + 2..=nu {
                a[(i, i - 2)] = 0.0;
                if i != m + 2 {
                    a[(i, i - 3)] = 0.0;
                }
            }
            // double QR step on rows l..=nu and columns m..=nu
            let mut k = m;
            while k < nu {
                let mut xk = 0.0;
                if k != m {
                    p = a[(k, k - 1)];
                    q = a[(k + 1, k - 1)];
                    r = if k != nu - 1 { a[(k + 2, k - 1)] } else { 0.0 };
                    xk = p.abs() + q.abs() + r.abs();
                    if xk != 0.0 {
                        p /= xk;
                        q /= xk;
                        r /= xk;
                    }
                }
                let s = sign((p * p + q * q + r * r).sqrt(), p);
                if s != 0.0 {
                    if k == m {
                        if l != m {
                            a[(k, k - 1)] = -a[(k, k - 1)];
                        }
                    } else {
                        a[(k, k - 1)] = -s * xk;
                    }
                    p += s;
                    let xx = p / s;
                    let yy = q / s;
                    let zz = r / s;
                    q /= p;
                    r /= p;
                    for j in k..=nu {
                        let mut pp = a[(k, j)] + q * a[(k + 1, j)];
                        if k != nu - 1 {
                            pp += r * a[(k + 2, j)];
                            a[(k + 2, j)] -= pp * zz;
                        }
                        a[(k + 1, j)] -= pp * yy;
                        a[(k, j)] -= pp * xx;
                    }
                    let mmin = if nu < k + 3 { nu } else { k + 3 };
                    for i in l..=mmin {
                        let mut pp = xx * a[(i, k)] + yy * a[(i, k + 1)];
                        if k != nu - 1 {
                            pp += zz * a[(i, k + 2)];
                            a[(i, k + 2)] -= pp * r;
                        }
                        a[(i, k + 1)] -= pp * q;
                        a[(i, k)] -= pp;
                    }
                }
                k += 1;
            }
        }
    }
    Ok(wr.into_iter().zip(wi).map(|(re, im)| C64::new(re, im)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numlin::diag;

    #[test]
    fn diagonal() {
        let s = eigenvalues(&diag(&[3.0, 1.0, 2.0])).unwrap();
        let re: Vec<f64> = s.iter().map(|z| z.re).collect();
        assert_eq!(re, vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn rotation_block() {
        let a = Matrix::from_row_slice(2, 2, &[0.0, -2.0, 2.0, 0.0]);
        let s = eigenvalues(&a).unwrap();
        assert!((s.0[0] - C64::new(0.0, -2.0)).norm() < 1e-14);
        assert!((s.0[1] - C64::new(0.0, 2.0)).norm() < 1e-14);
    }

    #[test]
    fn companion_of_known_cubic() {
        // (s+1)(s+2)(s+3) = s^3 + 6 s^2 + 11 s + 6
        let a = Matrix::from_row_slice(3, 3, &[-6.0, -11.0, -6.0, 1.0, 0.0, 0.0, 0.0, 1.0, 0.0]);
        let s = eigenvalues(&a).unwrap();
        for (z, want) in s.iter().zip([-3.0, -2.0, -1.0]) {
            assert!((z.re - want).abs() < 1e-12 && z.im.abs() < 1e-12);
        }
    }

    #[test]
    fn hessenberg_is_similar() {
        let a = Matrix::from_fn(6, 6, |i, j| ((i * 7 + j * 3) % 5) as f64 - 2.0 + 0.1 * i as f64);
        let h = hessenberg(&a);
        for i in 2..6 {
            for j in 0..i - 1 {
                assert_eq!(h[(i, j)], 0.0);
            }
        }
        assert!((h.trace() - a.trace()).abs() < 1e-12);
    }

    #[test]
    fn eigenvector_residual() {
        let a = Matrix::from_row_slice(3, 3, &[1.0, 2.0, 0.0, -3.0, 0.5, 1.0, 0.2, 0.0, -1.0]);
        for &l in eigenvalues(&a).unwrap().iter() {
            let v = eigenvector(&a, l).unwrap();
            let ac = a.map(|x| C64::new(x, 0.0));
            let r = &ac * &v - &v * l;
            assert!(r.norm() < 1e-8 * a.norm());
        }
    }
}
