//! Equilibria of both plants and linear state-space models about them.

use std::fmt::Write as _;

use crate::error::{Result, SmibError};
use crate::numlin::{max_abs, Matrix};
use crate::params::{ReducedCoefficients, TruthCoefficients};
use crate::reduced_model::{self, reduced_output, reduced_rhs, ReducedState};
use crate::truth_model::{self, truth_output, truth_rhs, TruthState};

pub use crate::tf::final_value;

#[derive(Debug, Clone, PartialEq)]
pub struct StateSpaceModel {
    pub a: Matrix,
    pub b: Matrix,
    pub c: Matrix,
    pub d: Matrix,
    pub state_labels: Vec<String>,
    pub input_labels: Vec<String>,
    pub output_labels: Vec<String>,
    pub x0: Vec<f64>,
    pub u0: Vec<f64>,
}

impl StateSpaceModel {
    pub fn new(a: Matrix, b: Matrix, c: Matrix, d: Matrix) -> Result<Self> {
        let n = a.nrows();
        if a.ncols() != n || b.nrows() != n || c.ncols() != n || d.nrows() != c.nrows() || d.ncols() != b.ncols() {
            return Err(SmibError::InvalidArgument("state-space dimensions are inconsistent".into()));
        }
        if [&a, &b, &c, &d].iter().any(|m| m.iter().any(|v| !v.is_finite())) {
            return Err(SmibError::InvalidArgument("state-space model has non-finite entries".into()));
        }
        let labels = |prefix: &str, k: usize| (0..k).map(|i| format!("{prefix}{i}")).collect();
        Ok(Self {
            state_labels: labels("x", n),
            input_labels: labels("u", b.ncols()),
            output_labels: labels("y", c.nrows()),
            x0: vec![0.0; n],
            u0: vec![0.0; b.ncols()],
            a,
            b,
            c,
            d,
        })
    }

    pub fn states(&self) -> usize {
        self.a.nrows()
    }

    pub fn inputs(&self) -> usize {
        self.b.ncols()
    }

    pub fn outputs(&self) -> usize {
        self.c.nrows()
    }

    /// Keep only the listed output rows.
    pub fn select_outputs(&self, rows: &[usize]) -> Self {
        let mut out = self.clone();
        out.c = Matrix::from_fn(rows.len(), self.states(), |i, j| self.c[(rows[i], j)]);
        out.d = Matrix::from_fn(rows.len(), self.inputs(), |i, j| self.d[(rows[i], j)]);
        out.output_labels = rows.iter().map(|r| self.output_labels[*r].clone()).collect();
        out
    }

    /// `# A`, `# B`, `# C`, `# D` blocks of comma-separated rows at full
    /// precision, preceded by label lines.
    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# states,{}", self.state_labels.join(","));
        let _ = writeln!(s, "# inputs,{}", self.input_labels.join(","));
        let _ = writeln!(s, "# outputs,{}", self.output_labels.join(","));
        let _ = writeln!(s, "# x0,{}", join(&self.x0));
        let _ = writeln!(s, "# u0,{}", join(&self.u0));
        for (name, m) in [("A", &self.a), ("B", &self.b), ("C", &self.c), ("D", &self.d)] {
            let _ = writeln!(s, "# {name}");
            for row in m.row_iter() {
                let _ = writeln!(s, "{}", join(&row.iter().cloned().collect::<Vec<_>>()));
            }
        }
        s
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut blocks: Vec<(String, Vec<Vec<f64>>)> = Vec::new();
        let mut labels: [Vec<String>; 3] = Default::default();
        let mut op: [Vec<f64>; 2] = Default::default();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix("# ") {
                let mut parts = rest.split(',');
                let key = parts.next().unwrap_or("");
                let vals: Vec<&str> = parts.collect();
                match key {
                    "states" => labels[0] = vals.iter().map(|s| s.to_string()).collect(),
                    "inputs" => labels[1] = vals.iter().map(|s| s.to_string()).collect(),
                    "outputs" => labels[2] = vals.iter().map(|s| s.to_string()).collect(),
                    "x0" | "u0" => {
                        let v = parse_row(&vals.join(","), i + 1)?;
                        op[usize::from(key == "u0")] = v;
                    }
                    name => blocks.push((name.to_string(), Vec::new())),
                }
                continue;
            }
            let block = blocks.last_mut().ok_or_else(|| SmibError::Config {
                line: i + 1,
                reason: "matrix row before any block header".into(),
            })?;
            block.1.push(parse_row(line, i + 1)?);
        }
        let get = |name: &str| -> Result<Matrix> {
            let rows = &blocks
                .iter()
                .find(|(n, _)| n == name)
                .ok_or_else(|| SmibError::Config { line: 0, reason: format!("missing block {name}") })?
                .1;
            let cols = rows.first().map_or(0, |r| r.len());
            Ok(Matrix::from_fn(rows.len(), cols, |i, j| rows[i][j]))
        };
        let mut ss = Self::new(get("A")?, get("B")?, get("C")?, get("D")?)?;
        let [sl, il, ol] = labels;
        if !sl.is_empty() {
            ss.state_labels = sl;
        }
        if !il.is_empty() {
            ss.input_labels = il;
        }
        if !ol.is_empty() {
            ss.output_labels = ol;
        }
        let [x0, u0] = op;
        if !x0.is_empty() {
            ss.x0 = x0;
        }
        if !u0.is_empty() {
            ss.u0 = u0;
        }
        Ok(ss)
    }
}

fn join(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x:e}")).collect::<Vec<_>>().join(",")
}

fn parse_row(line: &str, line_no: usize) -> Result<Vec<f64>> {
    line.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| {
            s.trim().parse::<f64>().map_err(|_| SmibError::Config { line: line_no, reason: format!("bad number `{s}`") })
        })
        .collect()
}

/// Which plant an equilibrium belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Plant {
    Truth,
    Reduced,
}

/// Rotor angle and mechanical torque that pin down a steady state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Anchors {
    pub delta: f64,
    pub t_m: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Equilibrium {
    pub plant: Plant,
    pub x0: Vec<f64>,
    pub u0: Vec<f64>,
    pub residual: f64,
    pub anchors: Anchors,
}

impl Equilibrium {
    pub fn reduced_state(&self) -> Result<ReducedState> {
        self.x0
            .as_slice()
            .try_into()
            .map_err(|_| SmibError::InvalidArgument("not a reduced-model equilibrium".into()))
    }

    pub fn truth_state(&self) -> Result<TruthState> {
        self.x0
            .as_slice()
            .try_into()
            .map_err(|_| SmibError::InvalidArgument("not a truth-model equilibrium".into()))
    }
}

fn check_anchors(a: Anchors) -> Result<()> {
    if !(a.delta.is_finite() && a.t_m.is_finite()) {
        return Err(SmibError::InvalidArgument("anchors must be finite".into()));
    }
    if !(a.delta > 0.0 && a.delta < std::f64::consts::PI) {
        return Err(SmibError::InfeasibleAnchor(format!("rotor angle {} is outside (0, pi)", a.delta)));
    }
    Ok(())
}

const RESIDUAL_LIMIT: f64 = 1e-9;

/// Reduced-model steady state: the swing row is a quadratic in `E'_q` once
/// the angle and torque are fixed; the physical root is the larger positive
/// one. The remaining states and inputs follow linearly.
pub fn reduced_equilibrium(anchors: Anchors, c: &ReducedCoefficients) -> Result<Equilibrium> {
    check_anchors(anchors)?;
    let (sin, cos) = (anchors.delta - c.alpha).sin_cos();
    let t = &c.torque;
    let qa = t[0];
    let qb = t[1] * cos + t[2] * sin;
    let qc = t[3] * sin * cos + t[4] * cos * cos + t[5] * sin * sin + c.damping + c.inertia_inv * anchors.t_m;
    let e_q = if qa == 0.0 {
        -qc / qb
    } else {
        let disc = qb * qb - 4.0 * qa * qc;
        if disc < 0.0 {
            return Err(SmibError::InfeasibleAnchor(format!(
                "no real flux solves the swing balance (discriminant {disc:e})"
            )));
        }
        let s = disc.sqrt();
        // numerically stable pair of roots
        let q = -0.5 * (qb + qb.signum() * s);
        let r1 = q / qa;
        let r2 = if q != 0.0 { qc / q } else { r1 };
        r1.max(r2)
    };
    if !(e_q > 0.0) {
        return Err(SmibError::InfeasibleAnchor(format!("flux solution {e_q} is not positive")));
    }
    let e_fd = -(c.flux[0] * e_q + c.flux[1] * cos + c.flux[2] * sin) / c.field_gain;
    let g_v = -c.turbine[0] * anchors.t_m / c.turbine[1];
    let u_t = -(c.governor[0] + c.governor[1] * g_v) / c.valve_gain;
    let x0 = [e_q, 1.0, anchors.delta, anchors.t_m, g_v];
    let u0 = [e_fd, u_t];
    let residual = inf(&reduced_rhs(&x0, &u0, c));
    if !(residual <= RESIDUAL_LIMIT) {
        return Err(SmibError::NoEquilibrium { iterations: 0, residual });
    }
    Ok(Equilibrium { plant: Plant::Reduced, x0: x0.to_vec(), u0: u0.to_vec(), residual, anchors })
}

/// Truth-model steady state by damped Newton on the five current rows and
/// the swing row, unknowns `[I_d, I_F, I_D, I_q, I_Q, V_F]`. The turbine and
/// governor rows are linear and solved directly.
pub fn truth_equilibrium(anchors: Anchors, c: &TruthCoefficients) -> Result<Equilibrium> {
    truth_equilibrium_from(anchors, c, [-0.9, 1.6, 0.0, 0.4, 0.0, 0.0012])
}

pub fn truth_equilibrium_from(anchors: Anchors, c: &TruthCoefficients, guess: [f64; 6]) -> Result<Equilibrium> {
    check_anchors(anchors)?;
    let g_v = -c.turbine[0] * anchors.t_m / c.turbine[1];
    let u_t = -(c.governor[0] + c.governor[1] * g_v) / c.valve_gain;
    let assemble = |z: &[f64; 6]| -> (TruthState, [f64; 2]) {
        ([z[0], z[1], z[2], z[3], z[4], 1.0, anchors.delta, anchors.t_m, g_v], [z[5], u_t])
    };
    let residual_of = |z: &[f64; 6]| -> [f64; 6] {
        let (x, u) = assemble(z);
        let dx = truth_rhs(&x, &u, c);
        [dx[0], dx[1], dx[2], dx[3], dx[4], dx[5]]
    };
    let norm = |r: &[f64; 6]| r.iter().fold(0.0f64, |m, v| m.max(v.abs()));

    let mut z = guess;
    let mut res = residual_of(&z);
    let mut iterations = 0;
    while iterations < 200 && norm(&res) > 1e-14 {
        iterations += 1;
        let mut jac = Matrix::zeros(6, 6);
        for j in 0..6 {
            let h = 1e-7 * z[j].abs().max(1e-3);
            let mut zp = z;
            let mut zm = z;
            zp[j] += h;
            zm[j] -= h;
            let (rp, rm) = (residual_of(&zp), residual_of(&zm));
            for i in 0..6 {
                jac[(i, j)] = (rp[i] - rm[i]) / (2.0 * h);
            }
        }
        let rhs = nalgebra::DVector::from_iterator(6, res.iter().map(|v| -v));
        let Some(step) = jac.lu().solve(&rhs) else {
            return Err(SmibError::NoEquilibrium { iterations, residual: norm(&res) });
        };
        let mut lambda = 1.0;
        let mut improved = false;
        for _ in 0..30 {
            let mut trial = z;
            for i in 0..6 {
                trial[i] += lambda * step[i];
            }
            let r = residual_of(&trial);
            if norm(&r) < norm(&res) {
                z = trial;
                res = r;
                improved = true;
                break;
            }
            lambda *= 0.5;
        }
        if !improved {
            break;
        }
    }
    let residual = norm(&res);
    if !(residual <= RESIDUAL_LIMIT) {
        return Err(SmibError::NoEquilibrium { iterations, residual });
    }
    let (x0, u0) = assemble(&z);
    let residual = inf(&truth_rhs(&x0, &u0, c));
    Ok(Equilibrium { plant: Plant::Truth, x0: x0.to_vec(), u0: u0.to_vec(), residual, anchors })
}

fn inf(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

/// Sensitivities of the terminal voltage to flux and angle, `(T1, T2)`.
pub fn voltage_sensitivities(x0: &ReducedState, c: &ReducedCoefficients) -> Result<(f64, f64)> {
    let y = reduced_output(x0, c);
    if y.v_t == 0.0 {
        return Err(SmibError::NumericalFailure("terminal voltage is zero; sensitivities undefined".into()));
    }
    let (sin, cos) = (x0[reduced_model::DELTA] - c.alpha).sin_cos();
    let dvd_de = c.vd[0];
    let dvq_de = c.vq[0] + 1.0;
    let dvd_dd = -c.vd[1] * sin + c.vd[2] * cos;
    let dvq_dd = -c.vq[1] * sin + c.vq[2] * cos;
    Ok(((y.v_d * dvd_de + y.v_q * dvq_de) / y.v_t, (y.v_d * dvd_dd + y.v_q * dvq_dd) / y.v_t))
}

/// Analytic linearisation of the reduced plant.
pub fn linearize_reduced(eq: &Equilibrium, c: &ReducedCoefficients) -> Result<StateSpaceModel> {
    let x0 = eq.reduced_state()?;
    if !(eq.residual <= 1e-6) {
        return Err(SmibError::InvalidArgument(format!("equilibrium residual {:e} is too large", eq.residual)));
    }
    let (sin, cos) = (x0[reduced_model::DELTA] - c.alpha).sin_cos();
    let e = x0[reduced_model::E_Q];
    let t = &c.torque;
    let mut a = Matrix::zeros(5, 5);
    a[(0, 0)] = c.flux[0];
    a[(0, 2)] = -c.flux[1] * sin + c.flux[2] * cos;
    a[(1, 0)] = 2.0 * t[0] * e + t[1] * cos + t[2] * sin;
    a[(1, 1)] = c.damping;
    a[(1, 2)] = -t[1] * e * sin + t[2] * e * cos + t[3] * (cos * cos - sin * sin) - 2.0 * t[4] * sin * cos
        + 2.0 * t[5] * sin * cos;
    a[(1, 3)] = c.inertia_inv;
    a[(2, 1)] = 1.0;
    a[(3, 3)] = c.turbine[0];
    a[(3, 4)] = c.turbine[1];
    a[(4, 1)] = c.governor[0];
    a[(4, 4)] = c.governor[1];
    let mut b = Matrix::zeros(5, 2);
    b[(0, 0)] = c.field_gain;
    b[(4, 1)] = c.valve_gain;
    let (t1, t2) = voltage_sensitivities(&x0, c)?;
    let mut cm = Matrix::zeros(2, 5);
    cm[(0, 0)] = t1;
    cm[(0, 2)] = t2;
    cm[(1, 1)] = 1.0;
    let mut ss = StateSpaceModel::new(a, b, cm, Matrix::zeros(2, 2))?;
    label(&mut ss, &reduced_model::STATE_LABELS, &reduced_model::INPUT_LABELS, &reduced_model::OUTPUT_LABELS);
    ss.x0 = eq.x0.clone();
    ss.u0 = eq.u0.clone();
    Ok(ss)
}

/// Central-difference Jacobian of `f` at `x`, step `1e-6 max(1, |x_i|)`.
pub fn numeric_jacobian<F>(f: F, x: &[f64], rows: usize) -> Matrix
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    let mut j = Matrix::zeros(rows, x.len());
    let mut xp = x.to_vec();
    for col in 0..x.len() {
        let h = 1e-6 * x[col].abs().max(1.0);
        xp[col] = x[col] + h;
        let fp = f(&xp);
        xp[col] = x[col] - h;
        let fm = f(&xp);
        xp[col] = x[col];
        for row in 0..rows {
            j[(row, col)] = (fp[row] - fm[row]) / (2.0 * h);
        }
    }
    j
}

/// Finite-difference linearisation of the truth plant, outputs `[V_t, w]`.
pub fn linearize_truth(eq: &Equilibrium, c: &TruthCoefficients) -> Result<StateSpaceModel> {
    let x0 = eq.truth_state()?;
    if !(eq.residual <= 1e-6) {
        return Err(SmibError::InvalidArgument(format!("equilibrium residual {:e} is too large", eq.residual)));
    }
    let u0: [f64; 2] = [eq.u0[0], eq.u0[1]];
    let y0 = truth_output(&x0, &u0, c);
    if y0.v_t == 0.0 {
        return Err(SmibError::NumericalFailure("terminal voltage is zero; output Jacobian undefined".into()));
    }
    let as_state = |x: &[f64]| -> TruthState { x.try_into().expect("nine states") };
    let as_input = |u: &[f64]| -> [f64; 2] { [u[0], u[1]] };
    let a = numeric_jacobian(|x| truth_rhs(&as_state(x), &u0, c).to_vec(), &x0, 9);
    let b = numeric_jacobian(|u| truth_rhs(&x0, &as_input(u), c).to_vec(), &u0, 9);
    let out = |y: truth_model::TerminalVoltage| vec![y.v_t, y.omega];
    let cm = numeric_jacobian(|x| out(truth_output(&as_state(x), &u0, c)), &x0, 2);
    let d = numeric_jacobian(|u| out(truth_output(&x0, &as_input(u), c)), &u0, 2);
    let mut ss = StateSpaceModel::new(a, b, cm, d)?;
    label(&mut ss, &truth_model::STATE_LABELS, &truth_model::INPUT_LABELS, &truth_model::OUTPUT_LABELS);
    ss.x0 = eq.x0.clone();
    ss.u0 = eq.u0.clone();
    Ok(ss)
}

fn label(ss: &mut StateSpaceModel, s: &[&str], i: &[&str], o: &[&str]) {
    ss.state_labels = s.iter().map(|v| v.to_string()).collect();
    ss.input_labels = i.iter().map(|v| v.to_string()).collect();
    ss.output_labels = o.iter().map(|v| v.to_string()).collect();
}

/// Largest absolute entry difference between two matrices of equal shape.
pub fn max_entry_gap(a: &Matrix, b: &Matrix) -> f64 {
    if a.shape() != b.shape() {
        return f64::INFINITY;
    }
    max_abs(&(a - b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::{derive_reduced_coefficients, derive_truth_coefficients, MachineParams};

    #[test]
    fn csv_round_trip() {
        let p = MachineParams::default();
        let c = derive_reduced_coefficients(&p).unwrap();
        let eq = reduced_equilibrium(Anchors { delta: 1.0, t_m: 1.0012 }, &c).unwrap();
        let ss = linearize_reduced(&eq, &c).unwrap();
        let back = StateSpaceModel::from_csv(&ss.to_csv()).unwrap();
        assert_eq!(back, ss);
    }

    #[test]
    fn anchors_outside_range_are_rejected() {
        let c = derive_reduced_coefficients(&MachineParams::default()).unwrap();
        assert!(matches!(
            reduced_equilibrium(Anchors { delta: 3.5, t_m: 1.0 }, &c),
            Err(SmibError::InfeasibleAnchor(_))
        ));
    }

    #[test]
    fn heavier_load_needs_more_flux() {
        let c = derive_reduced_coefficients(&MachineParams::default()).unwrap();
        let light = reduced_equilibrium(Anchors { delta: 1.0, t_m: 0.5 }, &c).unwrap();
        let heavy = reduced_equilibrium(Anchors { delta: 1.0, t_m: 1.5 }, &c).unwrap();
        assert!(heavy.x0[0] > light.x0[0]);
        assert!(heavy.u0[0] > light.u0[0]);
    }

    #[test]
    fn truth_b_column_one_only_feeds_currents() {
        let c = derive_truth_coefficients(&MachineParams::default()).unwrap();
        let eq = truth_equilibrium(Anchors { delta: 1.0, t_m: 1.0012 }, &c).unwrap();
        let ss = linearize_truth(&eq, &c).unwrap();
        for row in 3..8 {
            assert_eq!(ss.b[(row, 0)], 0.0);
        }
    }
}
