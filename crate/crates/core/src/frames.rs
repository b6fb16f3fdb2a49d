//! Park (0dq) transformation and the machine inductance matrices in the
//! stator and rotor frames.
//!
//! Nothing in the plant models depends on this module; it documents how the
//! constant dq inductances arise and backs them with numerical checks.

use std::f64::consts::PI;

use nalgebra::{Matrix3, Matrix6};

use crate::params::MachineParams;

const TWO_PI_3: f64 = 2.0 * PI / 3.0;

/// Power-invariant Park matrix. Rows are the 0, d and q projections.
pub fn park_matrix(theta: f64) -> Matrix3<f64> {
    let s = (2.0f64 / 3.0).sqrt();
    let z = 1.0 / 2f64.sqrt();
    s * Matrix3::new(
        z,
        z,
        z,
        theta.cos(),
        (theta - TWO_PI_3).cos(),
        (theta + TWO_PI_3).cos(),
        theta.sin(),
        (theta - TWO_PI_3).sin(),
        (theta + TWO_PI_3).sin(),
    )
}

/// Derivative of the inverse Park matrix with respect to the rotor angle.
pub fn park_inverse_derivative(theta: f64) -> Matrix3<f64> {
    let s = (2.0f64 / 3.0).sqrt();
    // P^-1 = P^T, so differentiate the transposed rows column by column.
    s * Matrix3::new(
        0.0,
        -theta.sin(),
        theta.cos(),
        0.0,
        -(theta - TWO_PI_3).sin(),
        (theta - TWO_PI_3).cos(),
        0.0,
        -(theta + TWO_PI_3).sin(),
        (theta + TWO_PI_3).cos(),
    )
}

/// Stator self/mutual inductance parameters of a salient-pole machine.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StatorInductances {
    /// Self inductance average.
    pub l_s: f64,
    /// Mutual inductance average.
    pub m_s: f64,
    /// Saliency amplitude.
    pub l_m: f64,
}

impl StatorInductances {
    /// Split that reproduces the machine's `L_d` and `L_q` with a chosen
    /// stator mutual `m_s`.
    pub fn from_machine(p: &MachineParams, m_s: f64) -> Self {
        let l_m = (p.l_d - p.l_q) / 3.0;
        let l_s = 0.5 * (p.l_d + p.l_q) - m_s;
        Self { l_s, m_s, l_m }
    }

    pub fn zero_sequence(&self) -> f64 {
        self.l_s - 2.0 * self.m_s
    }

    pub fn direct(&self) -> f64 {
        self.l_s + self.m_s + 1.5 * self.l_m
    }

    pub fn quadrature(&self) -> f64 {
        self.l_s + self.m_s - 1.5 * self.l_m
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InductanceMatrices {
    /// Stator-frame matrix ordered `[a, b, c, F, D, Q]`.
    pub stator_frame: Matrix6<f64>,
    /// Rotor-frame matrix ordered `[0, d, q, F, D, Q]`.
    pub rotor_frame: Matrix6<f64>,
    pub l0: f64,
    pub ld: f64,
    pub lq: f64,
}

/// Rotor-frame inductance matrix, independent of the rotor angle.
pub fn rotor_frame_inductance(p: &MachineParams, s: &StatorInductances) -> Matrix6<f64> {
    let mut lb = Matrix6::zeros();
    lb[(0, 0)] = s.zero_sequence();
    lb[(1, 1)] = s.direct();
    lb[(2, 2)] = s.quadrature();
    lb[(3, 3)] = p.l_f;
    lb[(4, 4)] = p.l_kd;
    lb[(5, 5)] = p.l_kq;
    lb[(1, 3)] = p.km_f;
    lb[(3, 1)] = p.km_f;
    lb[(1, 4)] = p.km_d;
    lb[(4, 1)] = p.km_d;
    lb[(3, 4)] = p.m_r;
    lb[(4, 3)] = p.m_r;
    lb[(2, 5)] = p.km_q;
    lb[(5, 2)] = p.km_q;
    lb
}

/// Stator-frame inductance matrix at rotor angle `theta`.
pub fn stator_frame_inductance(p: &MachineParams, s: &StatorInductances, theta: f64) -> Matrix6<f64> {
    let mut l = Matrix6::zeros();
    let angles = [theta, theta - TWO_PI_3, theta + TWO_PI_3];
    for i in 0..3 {
        for j in 0..3 {
            l[(i, j)] = if i == j {
                s.l_s + s.l_m * (2.0 * angles[i]).cos()
            } else {
                -s.m_s + s.l_m * (angles[i] + angles[j]).cos()
            };
        }
    }
    let k = p.park_k;
    let (mf, md, mq) = (p.km_f / k, p.km_d / k, p.km_q / k);
    for (i, a) in angles.iter().enumerate() {
        let stator_rotor = [mf * a.cos(), md * a.cos(), mq * a.sin()];
        for (j, m) in stator_rotor.iter().enumerate() {
            l[(i, 3 + j)] = *m;
            l[(3 + j, i)] = *m;
        }
    }
    l[(3, 3)] = p.l_f;
    l[(4, 4)] = p.l_kd;
    l[(5, 5)] = p.l_kq;
    l[(3, 4)] = p.m_r;
    l[(4, 3)] = p.m_r;
    l
}

/// Block transform `diag(P(theta), I3)` taking stator-frame quantities to the
/// rotor frame.
pub fn block_transform(theta: f64) -> Matrix6<f64> {
    let mut b = Matrix6::identity();
    b.fixed_view_mut::<3, 3>(0, 0).copy_from(&park_matrix(theta));
    b
}

pub fn blocked_inductance(p: &MachineParams, s: &StatorInductances, theta: f64) -> InductanceMatrices {
    InductanceMatrices {
        stator_frame: stator_frame_inductance(p, s, theta),
        rotor_frame: rotor_frame_inductance(p, s),
        l0: s.zero_sequence(),
        ld: s.direct(),
        lq: s.quadrature(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn d_row_at_zero_angle() {
        let p = park_matrix(0.0);
        let s = (2.0f64 / 3.0).sqrt();
        assert_abs_diff_eq!(p[(1, 0)], s, epsilon = 1e-15);
        assert_abs_diff_eq!(p[(1, 1)], -0.5 * s, epsilon = 1e-15);
        assert_abs_diff_eq!(p[(1, 2)], -0.5 * s, epsilon = 1e-15);
    }

    #[test]
    fn balanced_set_has_no_zero_sequence() {
        for i in 0..12 {
            let th = 0.5 * i as f64;
            let abc = nalgebra::Vector3::new(th.cos(), (th - TWO_PI_3).cos(), (th + TWO_PI_3).cos());
            let odq = park_matrix(1.3) * abc;
            assert_abs_diff_eq!(odq[0], 0.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn round_rotor_degenerates() {
        let s = StatorInductances { l_s: 1.0, m_s: 0.3, l_m: 0.0 };
        assert_eq!(s.direct(), s.quadrature());
        assert_abs_diff_eq!(s.direct(), 1.3, epsilon = 1e-15);
    }

    #[test]
    fn split_reproduces_machine_axes() {
        let p = MachineParams::default();
        let s = StatorInductances::from_machine(&p, 0.1);
        assert_abs_diff_eq!(s.direct(), p.l_d, epsilon = 1e-14);
        assert_abs_diff_eq!(s.quadrature(), p.l_q, epsilon = 1e-14);
    }
}
