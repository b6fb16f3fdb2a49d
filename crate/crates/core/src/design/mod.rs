//! Controller synthesis: LQR, pole placement, full-order observers, the
//! LTR-scheduled Kalman gain, PID compensators and root loci.

mod pid;
mod placement;

use std::fmt::Write as _;

pub use pid::{pid_controller, root_locus, LoopTag, PidController, PidGains, PidRealization, DERIVATIVE_FILTER};
pub use placement::{place_poles, place_poles_seeded, DEFAULT_SEED};

use crate::error::{Result, SmibError};
use crate::linearize::StateSpaceModel;
use crate::numlin::{eigenvalues, inverse, is_positive_definite, rank, solve_care, Matrix, Spectrum, C64};

/// How a gain was obtained, kept for provenance in `gains.txt`.
#[derive(Debug, Clone, PartialEq)]
pub enum DesignMethod {
    Lqr { q: Matrix, r: Matrix },
    Placement { poles: Vec<C64>, seed: u64 },
    /// Supplied directly, e.g. from a config file.
    Given,
}

impl DesignMethod {
    pub fn tag(&self) -> &'static str {
        match self {
            DesignMethod::Lqr { .. } => "lqr",
            DesignMethod::Placement { .. } => "placement",
            DesignMethod::Given => "given",
        }
    }
}

/// State-feedback gain `u = -K x`.
#[derive(Debug, Clone, PartialEq)]
pub struct GainMatrix {
    pub k: Matrix,
    pub method: DesignMethod,
    /// Spectrum of `A - B K` at design time.
    pub closed_loop: Spectrum,
}

impl GainMatrix {
    pub fn inputs(&self) -> usize {
        self.k.nrows()
    }

    pub fn states(&self) -> usize {
        self.k.ncols()
    }

    /// `[gain.<name>]` section with one comma-separated row per input.
    pub fn to_config_text(&self, name: &str) -> String {
        let mut s = format!("[gain.{name}]\nmethod = {}\n", self.method.tag());
        match &self.method {
            DesignMethod::Lqr { q, r } => {
                let _ = writeln!(s, "Q_diag = {}", join(q.diagonal().iter()));
                let _ = writeln!(s, "R_diag = {}", join(r.diagonal().iter()));
            }
            DesignMethod::Placement { poles, seed } => {
                let _ = writeln!(s, "poles = {}", join_complex(poles));
                let _ = writeln!(s, "seed = {seed}");
            }
            DesignMethod::Given => {}
        }
        for (i, row) in self.k.row_iter().enumerate() {
            let _ = writeln!(s, "row{i} = {}", join(row.iter()));
        }
        let _ = writeln!(s, "closed_loop = {}", join_complex(&self.closed_loop.0));
        s
    }
}

fn join<'a>(values: impl Iterator<Item = &'a f64>) -> String {
    values.map(|v| format!("{v:.12e}")).collect::<Vec<_>>().join(", ")
}

fn join_complex(values: &[C64]) -> String {
    values
        .iter()
        .map(|z| if z.im == 0.0 { format!("{:.9e}", z.re) } else { format!("{:.9e}{:+.9e}i", z.re, z.im) })
        .collect::<Vec<_>>()
        .join(", ")
}

/// LQR gain `K = R^-1 B^T P` for the model's `(A, B)`.
pub fn lqr_gain(ss: &StateSpaceModel, q: &Matrix, r: &Matrix) -> Result<GainMatrix> {
    lqr_gain_for(&ss.a, &ss.b, q, r)
}

pub fn lqr_gain_for(a: &Matrix, b: &Matrix, q: &Matrix, r: &Matrix) -> Result<GainMatrix> {
    let sol = solve_care(a, b, q, r).map_err(|e| match e {
        SmibError::DesignFailure(msg) => SmibError::DesignFailure(format!("LQR: {msg}")),
        other => other,
    })?;
    Ok(GainMatrix {
        k: sol.gain,
        method: DesignMethod::Lqr { q: q.clone(), r: r.clone() },
        closed_loop: sol.closed_loop,
    })
}

/// Full-order observer gain `L` (or Kalman gain `H`) with the measured
/// outputs it was designed for.
#[derive(Debug, Clone, PartialEq)]
pub struct ObserverGain {
    pub l: Matrix,
    pub outputs: Vec<String>,
    /// Spectrum of `A - L C` at design time.
    pub estimator: Spectrum,
}

/// Requested observer poles.
#[derive(Debug, Clone, PartialEq)]
pub enum ObserverPoles {
    Explicit(Vec<C64>),
    /// Each controller pole multiplied by `rho`, real and imaginary parts
    /// alike, so complex pairs also move up in frequency.
    Scaled { controller: Spectrum, rho: f64 },
}

impl ObserverPoles {
    pub fn resolve(&self) -> Result<Vec<C64>> {
        match self {
            ObserverPoles::Explicit(p) => Ok(p.clone()),
            ObserverPoles::Scaled { controller, rho } => {
                if !(rho.is_finite() && *rho > 0.0) {
                    return Err(SmibError::InvalidArgument(format!("observer scale {rho} must be positive")));
                }
                if !controller.is_hurwitz() {
                    return Err(SmibError::InvalidArgument("controller spectrum to scale is not stable".into()));
                }
                Ok(controller.iter().map(|p| p * *rho).collect())
            }
        }
    }
}

/// Observer gain by duality: `L = place(A^T, C^T, poles)^T`.
pub fn observer_gain(ss: &StateSpaceModel, poles: &ObserverPoles, seed: u64) -> Result<ObserverGain> {
    let n = ss.states();
    let obs = crate::numlin::controllability_matrix(&ss.a.transpose(), &ss.c.transpose());
    let r = rank(&obs, 1e-9);
    if r < n {
        return Err(SmibError::DesignFailure(format!(
            "(C, A) is not observable: observability rank {r} < {n}"
        )));
    }
    let p = poles.resolve()?;
    let dual = place_poles_seeded(&ss.a.transpose(), &ss.c.transpose(), &p, seed)?;
    let l = dual.k.transpose();
    let estimator = eigenvalues(&(&ss.a - &l * &ss.c))?;
    Ok(ObserverGain { l, outputs: ss.output_labels.clone(), estimator })
}

/// Noise intensities of the loop-transfer-recovery schedule.
#[derive(Debug, Clone, PartialEq)]
pub struct LtrSchedule {
    /// Nominal process noise intensity, `n x n`.
    pub v10: Matrix,
    /// Measurement noise intensity, `p x p`.
    pub v20: Matrix,
    /// Fictitious input noise intensity, `m x m`.
    pub v: Matrix,
    pub q: f64,
}

impl LtrSchedule {
    pub fn identity(n: usize, p: usize, m: usize, q: f64) -> Self {
        Self { v10: Matrix::identity(n, n), v20: Matrix::identity(p, p), v: Matrix::identity(m, m), q }
    }

    /// `V10 + q^2 B V B^T`
    pub fn process_noise(&self, b: &Matrix) -> Matrix {
        &self.v10 + self.q * self.q * b * &self.v * b.transpose()
    }

    fn validate(&self, n: usize, p: usize, m: usize) -> Result<()> {
        if !(self.q.is_finite() && self.q >= 0.0) {
            return Err(SmibError::InvalidArgument(format!("LTR parameter q = {} must be >= 0", self.q)));
        }
        for (name, mat, dim) in [("V10", &self.v10, n), ("V20", &self.v20, p), ("V", &self.v, m)] {
            if mat.shape() != (dim, dim) {
                return Err(SmibError::InvalidArgument(format!("{name} must be {dim}x{dim}")));
            }
            if !is_positive_definite(mat) {
                return Err(SmibError::InvalidArgument(format!("{name} must be symmetric positive definite")));
            }
        }
        Ok(())
    }
}

/// Kalman gain `H(q) = Sigma C^T V20^-1` with `Sigma` from the filter
/// Riccati equation under the process noise `V1(q)`.
pub fn kalman_ltr_gain(ss: &StateSpaceModel, sched: &LtrSchedule) -> Result<ObserverGain> {
    let (n, m, p) = (ss.states(), ss.inputs(), ss.outputs());
    sched.validate(n, p, m)?;
    let v1 = sched.process_noise(&ss.b);
    let v1 = 0.5 * (&v1 + v1.transpose());
    let sol = solve_care(&ss.a.transpose(), &ss.c.transpose(), &v1, &sched.v20).map_err(|e| match e {
        SmibError::DesignFailure(msg) => SmibError::DesignFailure(format!("Kalman filter at q = {}: {msg}", sched.q)),
        other => other,
    })?;
    let h = &sol.p * ss.c.transpose() * inverse(&sched.v20)?;
    let estimator = eigenvalues(&(&ss.a - &h * &ss.c))?;
    if !estimator.is_hurwitz() {
        return Err(SmibError::DesignFailure(format!("Kalman estimator unstable at q = {}", sched.q)));
    }
    Ok(ObserverGain { l: h, outputs: ss.output_labels.clone(), estimator })
}

/// LQR gain for two decoupled integrator chains of lengths `first` and
/// `n - first`, each driven by its own input. The chains are solved
/// separately so the off-chain blocks of `K` are exactly zero.
pub fn chain_lqr_gain(first: usize, q_diag: &[f64], r_diag: [f64; 2]) -> Result<GainMatrix> {
    let n = q_diag.len();
    if first == 0 || first >= n {
        return Err(SmibError::InvalidArgument(format!("chain split {first} invalid for {n} states")));
    }
    let mut k = Matrix::zeros(2, n);
    for (input, range) in [(0usize, 0..first), (1, first..n)] {
        let len = range.len();
        let a = Matrix::from_fn(len, len, |i, j| if j == i + 1 { 1.0 } else { 0.0 });
        let mut b = Matrix::zeros(len, 1);
        b[(len - 1, 0)] = 1.0;
        let q = crate::numlin::diag(&q_diag[range.clone()]);
        let r = Matrix::from_element(1, 1, r_diag[input]);
        let g = lqr_gain_for(&a, &b, &q, &r)?;
        for (j, col) in range.enumerate() {
            k[(input, col)] = g.k[(0, j)];
        }
    }
    let (a, b) = brunovsky_pair(first, n);
    let closed_loop = eigenvalues(&(&a - &b * &k))?;
    Ok(GainMatrix {
        k,
        method: DesignMethod::Lqr {
            q: crate::numlin::diag(q_diag),
            r: crate::numlin::diag(&r_diag),
        },
        closed_loop,
    })
}

/// Two integrator chains in Brunovsky form.
pub fn brunovsky_pair(first: usize, n: usize) -> (Matrix, Matrix) {
    let mut a = Matrix::zeros(n, n);
    for i in 0..n - 1 {
        if i + 1 != first {
            a[(i, i + 1)] = 1.0;
        }
    }
    let mut b = Matrix::zeros(n, 2);
    b[(first - 1, 0)] = 1.0;
    b[(n - 1, 1)] = 1.0;
    (a, b)
}

/// Closed-loop matrix of plant, observer and estimated-state feedback in
/// `(x, x - x_hat)` coordinates.
pub fn separation_matrix(a: &Matrix, b: &Matrix, c: &Matrix, k: &Matrix, l: &Matrix) -> Matrix {
    let n = a.nrows();
    let mut m = Matrix::zeros(2 * n, 2 * n);
    m.view_mut((0, 0), (n, n)).copy_from(&(a - b * k));
    m.view_mut((0, n), (n, n)).copy_from(&(b * k));
    m.view_mut((n, n), (n, n)).copy_from(&(a - l * c));
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numlin::diag;

    fn double_integrator() -> StateSpaceModel {
        let a = Matrix::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 0.0]);
        let b = Matrix::from_row_slice(2, 1, &[0.0, 1.0]);
        let c = Matrix::from_row_slice(1, 2, &[1.0, 0.0]);
        StateSpaceModel::new(a, b, c, Matrix::zeros(1, 1)).unwrap()
    }

    #[test]
    fn lqr_on_double_integrator() {
        let g = lqr_gain(&double_integrator(), &diag(&[1.0, 1.0]), &diag(&[1.0])).unwrap();
        assert!((g.k[(0, 0)] - 1.0).abs() < 1e-10);
        assert!((g.k[(0, 1)] - 3f64.sqrt()).abs() < 1e-10);
        assert!(g.closed_loop.is_hurwitz());
    }

    #[test]
    fn observer_places_estimator_poles() {
        let ss = double_integrator();
        let want = vec![C64::new(-3.0, 0.0), C64::new(-4.0, 0.0)];
        let obs = observer_gain(&ss, &ObserverPoles::Explicit(want.clone()), 1).unwrap();
        assert!(obs.estimator.distance(&want) < 1e-9);
    }

    #[test]
    fn unobservable_pair_is_a_design_failure() {
        let mut ss = double_integrator();
        ss.c = Matrix::from_row_slice(1, 2, &[0.0, 1.0]);
        let poles = ObserverPoles::Explicit(vec![C64::new(-1.0, 0.0), C64::new(-2.0, 0.0)]);
        assert!(matches!(observer_gain(&ss, &poles, 1), Err(SmibError::DesignFailure(_))));
    }

    #[test]
    fn chain_gain_has_zero_blocks() {
        let g = chain_lqr_gain(3, &[300.0, 250.0, 200.0, 200.0, 250.0], [0.07, 0.07]).unwrap();
        for (i, j) in [(0, 3), (0, 4), (1, 0), (1, 1), (1, 2)] {
            assert_eq!(g.k[(i, j)], 0.0);
        }
        assert!(g.closed_loop.is_hurwitz());
    }

    #[test]
    fn ltr_schedule_rejects_bad_noise() {
        let ss = double_integrator();
        let mut s = LtrSchedule::identity(2, 1, 1, 1.0);
        s.v20 = Matrix::from_element(1, 1, -1.0);
        assert!(kalman_ltr_gain(&ss, &s).is_err());
    }

    #[test]
    fn gain_text_lists_rows() {
        let g = lqr_gain(&double_integrator(), &diag(&[1.0, 1.0]), &diag(&[1.0])).unwrap();
        let text = g.to_config_text("K");
        assert!(text.starts_with("[gain.K]\nmethod = lqr\n"));
        assert!(text.contains("row0 = "));
    }
}
