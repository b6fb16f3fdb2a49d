//! Fifth-order one-axis plant: field-flux decay, swing pair and the
//! turbine-governor chain, with stator currents solved algebraically.
//!
//! State `[E'_q, w, delta, T_m, G_V]`, input `[E_FD, u_T]`.

use crate::error::{Result, SmibError};
use crate::linearize::StateSpaceModel;
use crate::params::ReducedCoefficients;
use crate::tf::TransferFunction;

pub const STATE_DIM: usize = 5;
pub const INPUT_DIM: usize = 2;

pub const STATE_LABELS: [&str; STATE_DIM] = ["E_q_prime", "omega", "delta", "T_m", "G_V"];
pub const INPUT_LABELS: [&str; INPUT_DIM] = ["E_FD", "u_T"];
pub const OUTPUT_LABELS: [&str; 2] = ["V_t", "omega"];

pub const E_Q: usize = 0;
pub const OMEGA: usize = 1;
pub const DELTA: usize = 2;
pub const T_M: usize = 3;
pub const G_V: usize = 4;

pub type ReducedState = [f64; STATE_DIM];
/// `[E_FD, u_T]`
pub type ReducedInput = [f64; INPUT_DIM];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StatorCurrents {
    pub i_d: f64,
    pub i_q: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReducedOutput {
    pub v_d: f64,
    pub v_q: f64,
    pub v_t: f64,
    pub omega: f64,
}

/// Stator currents from the two network equations with the stator
/// transients neglected.
pub fn algebraic_currents(e_q: f64, delta: f64, c: &ReducedCoefficients) -> StatorCurrents {
    let (sin, cos) = (delta - c.alpha).sin_cos();
    let v_inf_d = -c.v_inf * sin;
    let v_inf_q = c.v_inf * cos;
    let behind = e_q - v_inf_q;
    StatorCurrents {
        i_d: (-behind * c.l1 - v_inf_d * c.r1) / c.m1,
        i_q: (behind * c.r1 - v_inf_d * c.l3) / c.m1,
    }
}

/// `E'_q I_q - (L_q - L'_d) I_d I_q`
pub fn electrical_torque(e_q: f64, delta: f64, c: &ReducedCoefficients) -> f64 {
    let i = algebraic_currents(e_q, delta, c);
    e_q * i.i_q - c.l4 * i.i_d * i.i_q
}

/// Swing-row electrical term written with the expanded torque coefficients.
pub fn torque_terms(e_q: f64, sin: f64, cos: f64, c: &ReducedCoefficients) -> f64 {
    let t = &c.torque;
    t[0] * e_q * e_q + t[1] * e_q * cos + t[2] * e_q * sin + t[3] * sin * cos + t[4] * cos * cos + t[5] * sin * sin
}

pub fn reduced_rhs(x: &ReducedState, u: &ReducedInput, c: &ReducedCoefficients) -> ReducedState {
    let (sin, cos) = (x[DELTA] - c.alpha).sin_cos();
    let e = x[E_Q];
    [
        c.flux[0] * e + c.flux[1] * cos + c.flux[2] * sin + c.field_gain * u[0],
        torque_terms(e, sin, cos, c) + c.damping * x[OMEGA] + c.inertia_inv * x[T_M],
        x[OMEGA] - 1.0,
        c.turbine[0] * x[T_M] + c.turbine[1] * x[G_V],
        c.governor[0] * x[OMEGA] + c.governor[1] * x[G_V] + c.valve_gain * u[1],
    ]
}

pub fn reduced_output(x: &ReducedState, c: &ReducedCoefficients) -> ReducedOutput {
    let (sin, cos) = (x[DELTA] - c.alpha).sin_cos();
    let e = x[E_Q];
    let v_d = c.vd[0] * e + c.vd[1] * cos + c.vd[2] * sin;
    let v_q = c.vq[0] * e + c.vq[1] * cos + c.vq[2] * sin + e;
    ReducedOutput { v_d, v_q, v_t: v_d.hypot(v_q), omega: x[OMEGA] }
}

/// Decoupled single-loop models of the linearised reduced plant.
#[derive(Debug, Clone, PartialEq)]
pub struct LoopModels {
    /// Valve command to speed with the droop path opened.
    pub lfc_forward: TransferFunction,
    /// Droop path gain, closed as negative feedback around `lfc_forward`.
    pub lfc_feedback: f64,
    /// `dV_t / dE_FD` with the angle coupling dropped.
    pub avr: TransferFunction,
}

impl LoopModels {
    /// Valve command to speed with the droop loop closed.
    pub fn lfc_speed(&self) -> Result<TransferFunction> {
        self.lfc_forward.feedback(&TransferFunction::gain(self.lfc_feedback))
    }

    /// Valve command to rotor angle with the droop loop closed.
    pub fn lfc_angle(&self) -> Result<TransferFunction> {
        Ok(self.lfc_speed()?.series(&TransferFunction::integrator()))
    }

    /// Unity-feedback AVR with no compensator.
    pub fn avr_closed(&self) -> Result<TransferFunction> {
        self.avr.feedback(&TransferFunction::gain(1.0))
    }
}

/// LFC and AVR loop transfer functions at a linearisation point.
pub fn lfc_avr_transfer_functions(lin: &StateSpaceModel, c: &ReducedCoefficients) -> Result<LoopModels> {
    if lin.a.nrows() != STATE_DIM || lin.c.nrows() < 1 {
        return Err(SmibError::InvalidArgument("expected a linearised reduced model".into()));
    }
    let a23 = lin.a[(OMEGA, DELTA)];
    let t1 = lin.c[(0, E_Q)];
    let swing = [1.0, -c.damping, -a23];
    let den = crate::numlin::poly_mul(
        &crate::numlin::poly_mul(&[1.0, -c.governor[1]], &[1.0, -c.turbine[0]]),
        &swing,
    );
    let lfc_forward = TransferFunction::new(&[c.valve_gain * c.turbine[1] * c.inertia_inv, 0.0], &den)?;
    let avr = TransferFunction::new(&[t1 * c.field_gain], &[1.0, -c.flux[0]])?;
    Ok(LoopModels { lfc_forward, lfc_feedback: -c.governor[0] / c.valve_gain, avr })
}
