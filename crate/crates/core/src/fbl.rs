//! Input-state feedback linearisation of the reduced plant.
//!
//! The coordinates `z = [delta, w - 1, w', T_m, T_m']` turn the plant into
//! two integrator chains, `z3' = sigma1 + gamma1 E_FD` and
//! `z5' = sigma2 + gamma2 u_T`. The controller inverts those relations for a
//! linear outer law `v = -K (z - z_d)`.

use crate::design::GainMatrix;
use crate::error::{Result, SmibError};
use crate::params::{MachineParams, ReducedCoefficients};
use crate::reduced_model::{torque_terms, ReducedState, DELTA, E_Q, G_V, OMEGA, T_M};
use crate::truth_model::{self, TruthState};

/// Smallest `|gamma1|` the controller will divide by.
pub const GAMMA_GUARD: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct FblCoefficients {
    /// Multiply `[E^2, E cos, E sin, cos^2, sin^2, sin cos, w, T_m, G_V]`.
    pub p3: [f64; 9],
    /// Multiply `[E w cos, E w sin, w cos^2, w sin^2, w sin cos]`.
    pub q3: [f64; 5],
    /// `gamma1 = r3 . [E, cos, sin]`
    pub r3: [f64; 3],
    /// `sigma2 = p5 . [w, T_m, G_V]`
    pub p5: [f64; 3],
    pub r51: f64,
    /// `e11..e15`: flux reconstruction from truth currents, then the field
    /// voltage per unit of `E_FD`.
    pub recon: [f64; 5],
    pub plant: ReducedCoefficients,
}

pub fn derive_fbl_coefficients(c: &ReducedCoefficients, p: &MachineParams) -> Result<FblCoefficients> {
    let [f11, f12, f13] = c.flux;
    let g11 = c.field_gain;
    let [f21, f22, f23, f24, f25, f26] = c.torque;
    let (f27, f28) = (c.damping, c.inertia_inv);
    let [f41, f42] = c.turbine;
    let [f51, f52] = c.governor;
    let g55 = c.valve_gain;

    let p3 = [
        2.0 * f11 * f21 + f27 * f21,
        2.0 * f21 * f12 + f22 * f11 - f23 + f27 * f22,
        2.0 * f21 * f13 + f22 + f23 * f11 + f27 * f23,
        f22 * f12 - f24 + f27 * f25,
        f23 * f13 + f24 + f27 * f26,
        f22 * f13 + f23 * f12 + 2.0 * f25 - 2.0 * f26 + f27 * f24,
        f27 * f27,
        f27 * f28 + f28 * f41,
        f28 * f42,
    ];
    let q3 = [f23, -f22, f24, -f24, -2.0 * f25 + 2.0 * f26];
    let r3 = [2.0 * f21 * g11, f22 * g11, f23 * g11];
    let p5 = [f42 * f51, f41 * f41, f41 * f42 + f42 * f52];
    let r51 = f42 * g55;
    if r51 == 0.0 {
        return Err(SmibError::InvalidParameter { name: "r51".into(), reason: "valve chain gain is zero".into() });
    }
    if p.km_f == 0.0 {
        return Err(SmibError::InvalidParameter { name: "kM_F".into(), reason: "must be nonzero".into() });
    }
    let ratio = c.l2 / c.m1;
    let e11 = 1.0 + c.l1 * ratio;
    if e11 == 0.0 {
        return Err(SmibError::InvalidParameter { name: "e11".into(), reason: "flux reconstruction is singular".into() });
    }
    let recon = [e11, c.l1 * ratio * c.v_inf, c.r1 * ratio * c.v_inf, p.km_f, p.r_f / p.km_f];
    Ok(FblCoefficients { p3, q3, r3, p5, r51, recon, plant: c.clone() })
}

/// Desired rotor angle and mechanical torque; the other targets are zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FblSetpoint {
    pub delta: f64,
    pub t_m: f64,
}

impl FblSetpoint {
    pub fn new(delta: f64, t_m: f64) -> Result<Self> {
        if !(delta > 0.0 && delta < std::f64::consts::PI) || !t_m.is_finite() {
            return Err(SmibError::InvalidArgument(format!("FBL setpoint delta = {delta} must lie in (0, pi)")));
        }
        Ok(Self { delta, t_m })
    }

    pub fn target(&self) -> [f64; 5] {
        [self.delta, 0.0, 0.0, self.t_m, 0.0]
    }
}

pub fn fbl_transform(x: &ReducedState, c: &ReducedCoefficients) -> [f64; 5] {
    let (sin, cos) = (x[DELTA] - c.alpha).sin_cos();
    let accel = torque_terms(x[E_Q], sin, cos, c) + c.damping * x[OMEGA] + c.inertia_inv * x[T_M];
    [x[DELTA], x[OMEGA] - 1.0, accel, x[T_M], c.turbine[0] * x[T_M] + c.turbine[1] * x[G_V]]
}

/// `(sigma1, gamma1, sigma2, gamma2)` at `x`.
pub fn decoupling_terms(x: &ReducedState, f: &FblCoefficients) -> (f64, f64, f64, f64) {
    let (s, c) = (x[DELTA] - f.plant.alpha).sin_cos();
    let (e, w) = (x[E_Q], x[OMEGA]);
    let p = &f.p3;
    let q = &f.q3;
    let sigma1 = p[0] * e * e
        + p[1] * e * c
        + p[2] * e * s
        + p[3] * c * c
        + p[4] * s * s
        + p[5] * s * c
        + p[6] * w
        + p[7] * x[T_M]
        + p[8] * x[G_V]
        + q[0] * e * w * c
        + q[1] * e * w * s
        + q[2] * w * c * c
        + q[3] * w * s * s
        + q[4] * w * s * c;
    let gamma1 = f.r3[0] * e + f.r3[1] * c + f.r3[2] * s;
    let sigma2 = f.p5[0] * w + f.p5[1] * x[T_M] + f.p5[2] * x[G_V];
    (sigma1, gamma1, sigma2, f.r51)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FblCommand {
    pub e_fd: f64,
    pub u_t: f64,
    /// Outer-loop inputs `[v1, v2]`.
    pub v: [f64; 2],
    pub z: [f64; 5],
}

pub fn fbl_control(x: &ReducedState, sp: &FblSetpoint, k: &GainMatrix, f: &FblCoefficients) -> Result<FblCommand> {
    if k.k.shape() != (2, 5) {
        return Err(SmibError::InvalidArgument(format!("FBL gain must be 2x5, got {:?}", k.k.shape())));
    }
    let z = fbl_transform(x, &f.plant);
    let zd = sp.target();
    let mut v = [0.0; 2];
    for (i, vi) in v.iter_mut().enumerate() {
        *vi = -(0..5).map(|j| k.k[(i, j)] * (z[j] - zd[j])).sum::<f64>();
    }
    let (sigma1, gamma1, sigma2, gamma2) = decoupling_terms(x, f);
    if !(gamma1.abs() > GAMMA_GUARD) {
        return Err(SmibError::SingularDecoupling { gamma: gamma1, state: x.to_vec() });
    }
    Ok(FblCommand { e_fd: (v[0] - sigma1) / gamma1, u_t: (v[1] - sigma2) / gamma2, v, z })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Reconstruction {
    /// From field current and rotor angle.
    #[default]
    FieldAndAngle,
    /// From field current and direct-axis stator current.
    FieldAndDirectCurrent,
}

/// `E'_q` estimated from a truth-model state.
pub fn reconstruct_eq_prime(xt: &TruthState, f: &FblCoefficients, form: Reconstruction) -> f64 {
    let [e11, e12, e13, e14, _] = f.recon;
    let i_f = xt[truth_model::I_F];
    match form {
        Reconstruction::FieldAndAngle => {
            let (s, c) = (xt[truth_model::DELTA] - f.plant.alpha).sin_cos();
            (e14 * i_f + e12 * c + e13 * s) / e11
        }
        Reconstruction::FieldAndDirectCurrent => e14 * i_f + f.plant.l2 * xt[truth_model::I_D],
    }
}

/// Reduced-plant state assembled from a truth state.
pub fn reduced_view(xt: &TruthState, f: &FblCoefficients, form: Reconstruction) -> ReducedState {
    [
        reconstruct_eq_prime(xt, f, form),
        xt[truth_model::OMEGA],
        xt[truth_model::DELTA],
        xt[truth_model::T_M],
        xt[truth_model::G_V],
    ]
}

/// Field winding voltage for a given excitation EMF, at rated speed.
pub fn efd_to_vf(e_fd: f64, p: &MachineParams) -> f64 {
    p.r_f / p.km_f * e_fd
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::design::chain_lqr_gain;
    use crate::params::derive_reduced_coefficients;
    use crate::reduced_model::reduced_rhs;

    fn coeffs() -> FblCoefficients {
        let p = MachineParams::default();
        derive_fbl_coefficients(&derive_reduced_coefficients(&p).unwrap(), &p).unwrap()
    }

    #[test]
    fn third_coordinate_is_the_swing_rate() {
        let f = coeffs();
        let x = [1.1, 1.01, 0.9, 0.8, 0.7];
        let z = fbl_transform(&x, &f.plant);
        let dx = reduced_rhs(&x, &[0.0, 0.0], &f.plant);
        assert!((z[2] - dx[OMEGA]).abs() < 1e-12);
        assert!((z[4] - dx[T_M]).abs() < 1e-12);
    }

    #[test]
    fn idle_machine_coordinates() {
        let f = coeffs();
        let z = fbl_transform(&[0.0, 1.0, f.plant.alpha + 0.3, 0.0, 0.0], &f.plant);
        assert_eq!(z[1], 0.0);
        assert_eq!(z[4], 0.0);
    }

    #[test]
    fn zero_turbine_state_gives_pure_valve_gain() {
        let f = coeffs();
        let (_, _, sigma2, gamma2) = decoupling_terms(&[1.0, 0.0, 1.0, 0.0, 0.0], &f);
        assert_eq!(sigma2, 0.0);
        assert_eq!(gamma2, f.r51);
    }

    #[test]
    fn vanishing_gamma_aborts() {
        let f = coeffs();
        let k = chain_lqr_gain(3, &[1.0; 5], [1.0, 1.0]).unwrap();
        // angle at which r32 cos + r33 sin = -r31 for unit flux
        let [r31, r32, r33] = f.r3;
        let theta = r33.atan2(r32) + (-r31 / r32.hypot(r33)).acos();
        let x = [1.0, 1.0, theta + f.plant.alpha, 1.0, 1.0];
        let sp = FblSetpoint::new(1.0, 1.0).unwrap();
        assert!(matches!(fbl_control(&x, &sp, &k, &f), Err(SmibError::SingularDecoupling { .. })));
    }

    #[test]
    fn field_conversion_is_linear() {
        let p = MachineParams::default();
        assert_eq!(efd_to_vf(0.0, &p), 0.0);
        assert!((efd_to_vf(2.0, &p) - 2.0 * efd_to_vf(1.0, &p)).abs() < 1e-18);
    }

    #[test]
    fn reconstruction_at_bus_angle_without_field() {
        let f = coeffs();
        let mut xt = [0.0; 9];
        xt[truth_model::DELTA] = f.plant.alpha;
        let e = reconstruct_eq_prime(&xt, &f, Reconstruction::FieldAndAngle);
        assert!((e - f.recon[1] / f.recon[0]).abs() < 1e-15);
    }
}
