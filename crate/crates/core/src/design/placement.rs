//! Multi-input pole placement.
//!
//! Distinct poles go through Heymann's reduction: a random input direction
//! `v` and preliminary feedback `F0` make `(A + B F0, B v)` controllable from
//! one input, and Ackermann's formula finishes the job. Repeated poles would
//! come out as a defective Jordan block that way, so when a pole repeats (at
//! most `m` times) the gain is built from independent closed-loop
//! eigenvectors instead. Either way the result is checked against the
//! requested spectrum.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{DesignMethod, GainMatrix};
use crate::error::{Result, SmibError};
use crate::numlin::{controllability_matrix, eigenvalues, inf_norm, poly_from_roots, rank, require_square, Matrix, C64};

pub const DEFAULT_SEED: u64 = 20_140_917;

const ATTEMPTS: u64 = 5;
const MAX_CONDITION: f64 = 1e12;
const SPECTRUM_TOL: f64 = 1e-6;

pub fn place_poles(a: &Matrix, b: &Matrix, poles: &[C64]) -> Result<GainMatrix> {
    place_poles_seeded(a, b, poles, DEFAULT_SEED)
}

/// Gain `K` with `eig(A - B K)` equal to `poles`. The random directions are
/// drawn from a ChaCha stream seeded by `seed`.
pub fn place_poles_seeded(a: &Matrix, b: &Matrix, poles: &[C64], seed: u64) -> Result<GainMatrix> {
    let n = require_square(a, "A")?;
    let m = b.ncols();
    if b.nrows() != n || m == 0 {
        return Err(SmibError::InvalidArgument(format!("B must be {n}xm, got {}x{}", b.nrows(), m)));
    }
    if poles.len() != n {
        return Err(SmibError::InvalidArgument(format!("{} poles requested for {n} states", poles.len())));
    }
    if poles.iter().any(|p| !(p.re.is_finite() && p.im.is_finite())) {
        return Err(SmibError::InvalidArgument("requested poles must be finite".into()));
    }
    check_conjugates(poles)?;
    let r = rank(&controllability_matrix(a, b), 1e-9);
    if r < n {
        return Err(SmibError::DesignFailure(format!(
            "(A, B) is not controllable: controllability rank {r} < {n} (defect {})",
            n - r
        )));
    }
    let mult = max_multiplicity(poles);
    if mult > m {
        return Err(SmibError::Unsupported(format!(
            "pole repeated {mult} times but only {m} input(s) are available"
        )));
    }

    let mut best: Option<(f64, Matrix)> = None;
    for attempt in 0..ATTEMPTS {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(attempt));
        let candidate =
            if mult > 1 { eigenvector_gain(a, b, poles, &mut rng) } else { heymann_gain(a, b, poles, &mut rng, attempt) };
        let Some(k) = candidate else { continue };
        let got = eigenvalues(&(a - b * &k))?;
        let gap = got.distance(poles);
        if gap <= SPECTRUM_TOL {
            return Ok(GainMatrix { k, method: DesignMethod::Placement { poles: poles.to_vec(), seed }, closed_loop: got });
        }
        if best.as_ref().is_none_or(|(g, _)| gap < *g) {
            best = Some((gap, k));
        }
    }
    Err(SmibError::DesignFailure(match best {
        Some((gap, _)) => format!("placed spectrum misses the request by {gap:.3e} after {ATTEMPTS} attempts"),
        None => format!("reduced single-input problem stayed ill-conditioned over {ATTEMPTS} attempts"),
    }))
}

fn same(p: C64, q: C64) -> bool {
    (p - q).norm() <= 1e-9 * (1.0 + p.norm())
}

fn check_conjugates(poles: &[C64]) -> Result<()> {
    let mut used = vec![false; poles.len()];
    for i in 0..poles.len() {
        if poles[i].im == 0.0 || used[i] {
            continue;
        }
        used[i] = true;
        let partner = (0..poles.len()).find(|&j| !used[j] && same(poles[j], poles[i].conj()));
        match partner {
            Some(j) => used[j] = true,
            None => {
                return Err(SmibError::InvalidArgument(format!(
                    "pole {}{:+}i has no conjugate partner",
                    poles[i].re, poles[i].im
                )))
            }
        }
    }
    Ok(())
}

fn max_multiplicity(poles: &[C64]) -> usize {
    poles.iter().map(|p| poles.iter().filter(|q| same(*p, **q)).count()).max().unwrap_or(0)
}

fn condition(m: &Matrix) -> f64 {
    let sv = m.clone().svd(false, false).singular_values;
    let hi = sv.iter().cloned().fold(0.0, f64::max);
    let lo = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    if lo == 0.0 { f64::INFINITY } else { hi / lo }
}

fn heymann_gain(a: &Matrix, b: &Matrix, poles: &[C64], rng: &mut ChaCha8Rng, attempt: u64) -> Option<Matrix> {
    let n = a.nrows();
    let m = b.ncols();
    let (v, f0) = if m == 1 {
        if attempt > 0 {
            return None;
        }
        (DVector::from_element(1, 1.0), Matrix::zeros(1, n))
    } else {
        let mut v = DVector::from_fn(m, |_, _| rng.random_range(-1.0..1.0));
        v /= v.norm();
        let scale = inf_norm(a).max(1.0) / inf_norm(b).max(f64::MIN_POSITIVE);
        let f0 = Matrix::from_fn(m, n, |_, _| scale * rng.random_range(-1.0..1.0));
        (v, f0)
    };
    let a_red = a + b * &f0;
    let b_red = b * &v;
    let k1 = ackermann(&a_red, &Matrix::from_column_slice(n, 1, b_red.as_slice()), poles)?;
    Some(Matrix::from_column_slice(m, 1, v.as_slice()) * k1 - f0)
}

/// Single-input Ackermann formula `k = e_n^T C^-1 phi(A)`.
fn ackermann(a: &Matrix, b: &Matrix, poles: &[C64]) -> Option<Matrix> {
    let n = a.nrows();
    let ctrb = controllability_matrix(a, b);
    if condition(&ctrb) > MAX_CONDITION {
        return None;
    }
    let coeffs = poly_from_roots(poles);
    let mut phi = Matrix::zeros(n, n);
    for c in &coeffs {
        phi = &phi * a + Matrix::identity(n, n) * *c;
    }
    let mut e_n = DVector::zeros(n);
    e_n[n - 1] = 1.0;
    let y = ctrb.transpose().lu().solve(&e_n)?;
    let k = y.transpose() * phi;
    Some(Matrix::from_row_slice(1, n, k.as_slice()))
}

type CMatrix = DMatrix<C64>;

/// Null-space basis of `[A - lambda I, B]`, one column per input.
fn eigen_null_space(a: &Matrix, b: &Matrix, lambda: C64) -> CMatrix {
    let n = a.nrows();
    let m = b.ncols();
    let mut pencil = CMatrix::zeros(n + m, n + m);
    for i in 0..n {
        for j in 0..n {
            pencil[(i, j)] = C64::new(a[(i, j)], 0.0) - if i == j { lambda } else { C64::new(0.0, 0.0) };
        }
        for j in 0..m {
            pencil[(i, n + j)] = C64::new(b[(i, j)], 0.0);
        }
    }
    let svd = pencil.svd(false, true);
    let v_t = svd.v_t.expect("requested right singular vectors");
    let mut order: Vec<usize> = (0..n + m).collect();
    order.sort_by(|&i, &j| svd.singular_values[i].total_cmp(&svd.singular_values[j]));
    CMatrix::from_fn(n + m, m, |r, c| v_t[(order[c], r)].conj())
}

fn eigenvector_gain(a: &Matrix, b: &Matrix, poles: &[C64], rng: &mut ChaCha8Rng) -> Option<Matrix> {
    let n = a.nrows();
    let m = b.ncols();
    let mut vecs = CMatrix::zeros(n, n);
    let mut ins = CMatrix::zeros(m, n);
    let mut col = 0;
    let mut done = vec![false; n];
    for i in 0..n {
        if done[i] || poles[i].im < 0.0 {
            continue;
        }
        done[i] = true;
        let basis = eigen_null_space(a, b, poles[i]);
        let real = poles[i].im == 0.0;
        let g = DVector::from_fn(m, |_, _| {
            C64::new(rng.random_range(-1.0..1.0), if real { 0.0 } else { rng.random_range(-1.0..1.0) })
        });
        let mut z = &basis * g;
        if real {
            // a real eigenvector keeps the gain real
            let pivot = z.iter().cloned().max_by(|p, q| p.norm().total_cmp(&q.norm()))?;
            let phase = pivot.conj() / pivot.norm();
            z.iter_mut().for_each(|e| *e = C64::new((*e * phase).re, 0.0));
        }
        vecs.set_column(col, &z.rows(0, n));
        ins.set_column(col, &z.rows(n, m));
        col += 1;
        if !real {
            let j = (0..n).find(|&j| !done[j] && same(poles[j], poles[i].conj()))?;
            done[j] = true;
            vecs.set_column(col, &z.rows(0, n).map(|e| e.conj()));
            ins.set_column(col, &z.rows(n, m).map(|e| e.conj()));
            col += 1;
        }
    }
    for (i, p) in poles.iter().enumerate() {
        if !done[i] && p.im < 0.0 {
            return None;
        }
    }
    let sv = vecs.clone().svd(false, false).singular_values;
    let hi = sv.iter().cloned().fold(0.0, f64::max);
    let lo = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    if !(lo > 0.0 && hi / lo <= MAX_CONDITION) {
        return None;
    }
    // (A - lambda I) v + B w = 0 gives A V + B W = V Lambda, so K = -W V^-1
    let f = ins * vecs.try_inverse()?;
    Some(Matrix::from_fn(m, n, |i, j| -f[(i, j)].re))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn re(v: &[f64]) -> Vec<C64> {
        v.iter().map(|x| C64::new(*x, 0.0)).collect()
    }

    #[test]
    fn ackermann_companion_pair() {
        let a = Matrix::from_row_slice(2, 2, &[0.0, 1.0, -2.0, -3.0]);
        let b = Matrix::from_row_slice(2, 1, &[0.0, 1.0]);
        let g = place_poles(&a, &b, &re(&[-5.0, -6.0])).unwrap();
        // companion form: K = [30 - 2, 11 - 3]
        assert!((g.k[(0, 0)] - 28.0).abs() < 1e-10);
        assert!((g.k[(0, 1)] - 8.0).abs() < 1e-10);
    }

    #[test]
    fn repeated_pole_with_two_inputs() {
        let a = Matrix::from_row_slice(3, 3, &[0.0, 1.0, 0.0, 0.0, 0.0, 1.0, 1.0, 0.0, 0.0]);
        let b = Matrix::from_row_slice(3, 2, &[0.0, 0.0, 1.0, 0.0, 0.0, 1.0]);
        let want = re(&[-1.0, -1.0, -2.0]);
        let g = place_poles(&a, &b, &want).unwrap();
        assert!(g.closed_loop.distance(&want) < 1e-9);
    }

    #[test]
    fn repeated_pole_beyond_inputs_is_unsupported() {
        let a = Matrix::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 0.0]);
        let b = Matrix::from_row_slice(2, 1, &[0.0, 1.0]);
        assert!(matches!(place_poles(&a, &b, &re(&[-1.0, -1.0])), Err(SmibError::Unsupported(_))));
    }

    #[test]
    fn lonely_complex_pole_is_rejected() {
        let a = Matrix::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 0.0]);
        let b = Matrix::from_row_slice(2, 1, &[0.0, 1.0]);
        let poles = [C64::new(-1.0, 1.0), C64::new(-1.0, 2.0)];
        assert!(matches!(place_poles(&a, &b, &poles), Err(SmibError::InvalidArgument(_))));
    }

    #[test]
    fn uncontrollable_pair_names_rank() {
        let a = Matrix::from_row_slice(2, 2, &[-1.0, 0.0, 0.0, -2.0]);
        let b = Matrix::from_row_slice(2, 1, &[1.0, 0.0]);
        let err = place_poles(&a, &b, &re(&[-3.0, -4.0])).unwrap_err();
        assert!(err.to_string().contains("rank 1 < 2"), "{err}");
    }

    #[test]
    fn complex_pair_with_two_inputs() {
        let a = Matrix::from_row_slice(3, 3, &[0.0, 1.0, 0.0, -1.0, 0.0, 0.0, 0.0, 0.0, 2.0]);
        let b = Matrix::from_row_slice(3, 2, &[0.0, 0.0, 1.0, 0.0, 0.0, 1.0]);
        let want = vec![C64::new(-1.0, 2.0), C64::new(-1.0, -2.0), C64::new(-3.0, 0.0)];
        let g = place_poles(&a, &b, &want).unwrap();
        assert!(g.closed_loop.distance(&want) < 1e-9);
    }
}
