//! Ninth-order generator + turbine-governor plant on an infinite bus.
//!
//! State `[I_d, I_F, I_D, I_q, I_Q, w, delta, T_m, G_V]`, input `[V_F, u_T]`.

use crate::params::TruthCoefficients;

pub const STATE_DIM: usize = 9;
pub const INPUT_DIM: usize = 2;

pub const STATE_LABELS: [&str; STATE_DIM] =
    ["I_d", "I_F", "I_D", "I_q", "I_Q", "omega", "delta", "T_m", "G_V"];
pub const INPUT_LABELS: [&str; INPUT_DIM] = ["V_F", "u_T"];
pub const OUTPUT_LABELS: [&str; 2] = ["V_t", "omega"];

pub const I_D: usize = 0;
pub const I_F: usize = 1;
pub const I_KD: usize = 2;
pub const I_Q: usize = 3;
pub const I_KQ: usize = 4;
pub const OMEGA: usize = 5;
pub const DELTA: usize = 6;
pub const T_M: usize = 7;
pub const G_V: usize = 8;

pub type TruthState = [f64; STATE_DIM];
/// `[V_F, u_T]`
pub type TruthInput = [f64; INPUT_DIM];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TerminalVoltage {
    pub v_d: f64,
    pub v_q: f64,
    pub v_t: f64,
    pub omega: f64,
}

fn d_axis_terms(x: &TruthState, sin: f64) -> [f64; 6] {
    let w = x[OMEGA];
    [x[I_D], x[I_F], x[I_KD], x[I_Q] * w, x[I_KQ] * w, sin]
}

fn q_axis_terms(x: &TruthState, cos: f64) -> [f64; 6] {
    let w = x[OMEGA];
    [x[I_D] * w, x[I_F] * w, x[I_KD] * w, x[I_Q], x[I_KQ], cos]
}

fn dot6(a: &[f64; 6], b: &[f64; 6]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn truth_rhs(x: &TruthState, u: &TruthInput, c: &TruthCoefficients) -> TruthState {
    let angle = x[DELTA] - c.alpha;
    let (sin, cos) = angle.sin_cos();
    let d_terms = d_axis_terms(x, sin);
    let q_terms = q_axis_terms(x, cos);
    let v_f = u[0];

    let mut dx = [0.0; STATE_DIM];
    for row in 0..3 {
        dx[row] = dot6(&c.electrical[row], &d_terms) + c.field_input[row] * v_f;
    }
    for row in 3..5 {
        dx[row] = dot6(&c.electrical[row], &q_terms);
    }
    let s = &c.swing;
    dx[OMEGA] = s[0] * x[I_D] * x[I_Q]
        + s[1] * x[I_F] * x[I_Q]
        + s[2] * x[I_KD] * x[I_Q]
        + s[3] * x[I_D] * x[I_KQ]
        + s[4] * x[OMEGA]
        + s[5] * x[T_M];
    dx[DELTA] = x[OMEGA] - 1.0;
    dx[T_M] = c.turbine[0] * x[T_M] + c.turbine[1] * x[G_V];
    dx[G_V] = c.governor[0] * x[OMEGA] + c.governor[1] * x[G_V] + c.valve_gain * u[1];
    dx
}

/// Terminal voltage including the instantaneous field-voltage feedthrough.
pub fn truth_output(x: &TruthState, u: &TruthInput, c: &TruthCoefficients) -> TerminalVoltage {
    let angle = x[DELTA] - c.alpha;
    let (sin, cos) = angle.sin_cos();
    let v_d = dot6(&c.vd, &d_axis_terms(x, sin)) + c.vd_field * u[0];
    let v_q = dot6(&c.vq, &q_axis_terms(x, cos));
    TerminalVoltage {
        v_d,
        v_q,
        v_t: v_d.hypot(v_q),
        omega: x[OMEGA],
    }
}

/// Electrical torque `(L_d - L_q) I_d I_q + kM_F I_F I_q + kM_D I_D I_q - kM_Q I_d I_Q`
/// recovered from the swing coefficients.
pub fn electrical_torque(x: &TruthState, c: &TruthCoefficients) -> f64 {
    let s = &c.swing;
    let tj = 1.0 / s[5];
    -tj * (s[0] * x[I_D] * x[I_Q] + s[1] * x[I_F] * x[I_Q] + s[2] * x[I_KD] * x[I_Q] + s[3] * x[I_D] * x[I_KQ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::{derive_truth_coefficients, MachineParams, OperatingPoint};

    fn coeffs() -> TruthCoefficients {
        derive_truth_coefficients(&MachineParams::default()).unwrap()
    }

    #[test]
    fn synchronous_speed_freezes_angle() {
        let c = coeffs();
        let mut x = OperatingPoint::op1().truth_state();
        x[DELTA] = 2.2;
        assert_eq!(truth_rhs(&x, &[0.3, 0.1], &c)[DELTA], 0.0);
    }

    #[test]
    fn dead_machine_governor_rate() {
        let c = coeffs();
        let mut x = [0.0; STATE_DIM];
        x[OMEGA] = 1.0;
        let dx = truth_rhs(&x, &[0.0, 0.0], &c);
        assert_eq!(dx[T_M], 0.0);
        assert!((dx[G_V] + 0.25).abs() < 1e-15);
    }

    #[test]
    fn zero_state_output() {
        let c = coeffs();
        let x = [0.0; STATE_DIM];
        let y = truth_output(&x, &[0.0, 0.0], &c);
        assert!((y.v_d - c.vd[5] * (-c.alpha).sin()).abs() < 1e-15);
        assert!((y.v_q - c.vq[5] * (-c.alpha).cos()).abs() < 1e-15);
    }

    #[test]
    fn damping_slows_rotor() {
        let mut p = MachineParams::default();
        let x = OperatingPoint::op1().truth_state();
        let base = truth_rhs(&x, &[0.0012, 1.05], &derive_truth_coefficients(&p).unwrap())[OMEGA];
        p.damping = 2.0;
        let damped = truth_rhs(&x, &[0.0012, 1.05], &derive_truth_coefficients(&p).unwrap())[OMEGA];
        assert!(damped < base);
    }
}
