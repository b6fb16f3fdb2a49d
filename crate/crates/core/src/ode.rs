//! Explicit Runge-Kutta integrators: classic fixed-step RK4 and the adaptive
//! Dormand-Prince 5(4) pair.
//!
//! The solver advances to caller-chosen target times, so output grids are hit
//! exactly without dense interpolation. A projection hook runs after every
//! accepted step (used to keep bounded states inside their limits).

use crate::error::{Result, SmibError};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Method {
    Rk4 { dt: f64 },
    Rk45 { rtol: f64, atol: f64, max_step: f64 },
}

impl Method {
    pub fn rk45_default() -> Self {
        Method::Rk45 { rtol: 1e-8, atol: 1e-10, max_step: 0.5 }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Method::Rk4 { .. } => "rk4",
            Method::Rk45 { .. } => "rk45",
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Stats {
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
}

// Dormand-Prince tableau
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// fifth-order minus embedded fourth-order weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

pub struct Solver {
    method: Method,
    h: f64,
    k: [Vec<f64>; 7],
    tmp: Vec<f64>,
    // first-stage derivative of the next step, valid while `fsal` is set
    fsal: bool,
    pub stats: Stats,
}

impl Solver {
    pub fn new(method: Method, dim: usize) -> Result<Self> {
        match method {
            Method::Rk4 { dt } if !(dt > 0.0 && dt.is_finite()) => {
                return Err(SmibError::InvalidArgument(format!("rk4 step must be > 0, got {dt}")));
            }
            Method::Rk45 { rtol, atol, max_step } if !(rtol > 0.0 && atol > 0.0 && max_step > 0.0) => {
                return Err(SmibError::InvalidArgument("rk45 tolerances and max step must be > 0".into()));
            }
            _ => {}
        }
        let h = match method {
            Method::Rk4 { dt } => dt,
            Method::Rk45 { max_step, .. } => max_step.min(1e-3),
        };
        Ok(Self {
            method,
            h,
            k: std::array::from_fn(|_| vec![0.0; dim]),
            tmp: vec![0.0; dim],
            fsal: false,
            stats: Stats::default(),
        })
    }

    pub fn method(&self) -> Method {
        self.method
    }

    /// Discard cached derivative information, e.g. after the caller changed
    /// the state or the right-hand side discontinuously.
    pub fn reset(&mut self) {
        self.fsal = false;
    }

    /// Advance `(t, x)` to `t_target`, calling `project` after every accepted
    /// step.
    pub fn advance<F, P>(&mut self, f: &mut F, t: &mut f64, x: &mut [f64], t_target: f64, project: &mut P) -> Result<()>
    where
        F: FnMut(f64, &[f64], &mut [f64]),
        P: FnMut(&mut [f64]),
    {
        if t_target < *t {
            return Err(SmibError::InvalidArgument("cannot integrate backwards".into()));
        }
        match self.method {
            Method::Rk4 { dt } => {
                while *t < t_target {
                    let remaining = t_target - *t;
                    // snap onto the target when the leftover is a rounding residue
                    let h = if remaining <= dt * (1.0 + 1e-9) { remaining } else { dt };
                    self.rk4_step(f, *t, x, h);
                    *t = if h == remaining { t_target } else { *t + h };
                    project(x);
                    self.stats.accepted += 1;
                    check_finite(*t, x)?;
                }
                Ok(())
            }
            Method::Rk45 { rtol, atol, max_step } => {
                let h_min = 1e-12 * (1.0 + t_target.abs());
                while *t < t_target {
                    let remaining = t_target - *t;
                    let mut h = self.h.min(max_step);
                    let hits_target = h >= remaining * (1.0 - 1e-12);
                    if hits_target {
                        h = remaining;
                    }
                    let err = self.dopri_step(f, *t, x, h, rtol, atol);
                    if err <= 1.0 {
                        *t = if hits_target { t_target } else { *t + h };
                        x.copy_from_slice(&self.tmp);
                        project(x);
                        // projection may move the state; keep FSAL only if it did not
                        if x.iter().zip(&self.tmp).any(|(a, b)| a != b) {
                            self.fsal = false;
                        } else {
                            self.k.swap(0, 6);
                            self.fsal = true;
                        }
                        self.stats.accepted += 1;
                        check_finite(*t, x)?;
                        let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
                        // only grow from a full step so target clipping does not shrink h
                        if !hits_target || factor < 1.0 {
                            self.h = h * factor;
                        }
                    } else {
                        self.stats.rejected += 1;
                        self.fsal = false;
                        let factor = (0.9 * err.powf(-0.2)).clamp(0.1, 0.9);
                        self.h = h * factor;
                        if !err.is_finite() {
                            self.h = h * 0.1;
                        }
                        if self.h < h_min {
                            return Err(SmibError::Divergence {
                                time: *t,
                                reason: format!("step size underflow (h = {:e})", self.h),
                            });
                        }
                    }
                }
                Ok(())
            }
        }
    }

    fn rk4_step<F>(&mut self, f: &mut F, t: f64, x: &mut [f64], h: f64)
    where
        F: FnMut(f64, &[f64], &mut [f64]),
    {
        let n = x.len();
        let [k1, k2, k3, k4, ..] = &mut self.k;
        let tmp = &mut self.tmp;
        f(t, x, k1);
        for i in 0..n {
            tmp[i] = x[i] + 0.5 * h * k1[i];
        }
        f(t + 0.5 * h, tmp, k2);
        for i in 0..n {
            tmp[i] = x[i] + 0.5 * h * k2[i];
        }
        f(t + 0.5 * h, tmp, k3);
        for i in 0..n {
            tmp[i] = x[i] + h * k3[i];
        }
        f(t + h, tmp, k4);
        for i in 0..n {
            x[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        self.stats.evaluations += 4;
    }

    /// One Dormand-Prince attempt. The candidate state is left in `self.tmp`,
    /// its derivative in `self.k[6]`; returns the scaled error norm.
    fn dopri_step<F>(&mut self, f: &mut F, t: f64, x: &[f64], h: f64, rtol: f64, atol: f64) -> f64
    where
        F: FnMut(f64, &[f64], &mut [f64]),
    {
        let n = x.len();
        let [k1, k2, k3, k4, k5, k6, k7] = &mut self.k;
        let y = &mut self.tmp;
        if !self.fsal {
            f(t, x, k1);
            self.stats.evaluations += 1;
        }
        for i in 0..n {
            y[i] = x[i] + h * A21 * k1[i];
        }
        f(t + C2 * h, y, k2);
        for i in 0..n {
            y[i] = x[i] + h * (A31 * k1[i] + A32 * k2[i]);
        }
        f(t + C3 * h, y, k3);
        for i in 0..n {
            y[i] = x[i] + h * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i]);
        }
        f(t + C4 * h, y, k4);
        for i in 0..n {
            y[i] = x[i] + h * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i]);
        }
        f(t + C5 * h, y, k5);
        for i in 0..n {
            y[i] = x[i] + h * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i]);
        }
        f(t + h, y, k6);
        for i in 0..n {
            y[i] = x[i] + h * (B1 * k1[i] + B3 * k3[i] + B4 * k4[i] + B5 * k5[i] + B6 * k6[i]);
        }
        f(t + h, y, k7);
        self.stats.evaluations += 6;

        let mut acc = 0.0;
        for i in 0..n {
            let e = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            let scale = atol + rtol * x[i].abs().max(y[i].abs());
            acc += (e / scale).powi(2);
        }
        let err = (acc / n.max(1) as f64).sqrt();
        if err.is_nan() { f64::INFINITY } else { err }
    }
}

fn check_finite(t: f64, x: &[f64]) -> Result<()> {
    if let Some(i) = x.iter().position(|v| !v.is_finite()) {
        return Err(SmibError::Divergence { time: t, reason: format!("state component {i} is not finite") });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn decay(_t: f64, x: &[f64], dx: &mut [f64]) {
        dx[0] = -x[0];
        dx[1] = x[0] - 0.5 * x[1];
    }

    fn exact(t: f64) -> [f64; 2] {
        // x1 = e^-t, x2 from x2' = x1 - x2/2 with x2(0) = 0
        [(-t).exp(), 2.0 * ((-0.5 * t).exp() - (-t).exp())]
    }

    #[test]
    fn rk45_matches_closed_form() {
        let mut s = Solver::new(Method::Rk45 { rtol: 1e-10, atol: 1e-12, max_step: 1.0 }, 2).unwrap();
        let mut x = [1.0, 0.0];
        let mut t = 0.0;
        for target in [0.5, 1.0, 3.0, 7.0] {
            s.advance(&mut decay, &mut t, &mut x, target, &mut |_| {}).unwrap();
            assert_eq!(t, target);
            let e = exact(target);
            assert!((x[0] - e[0]).abs() < 1e-9 && (x[1] - e[1]).abs() < 1e-9);
        }
    }

    #[test]
    fn rk4_hits_targets_exactly() {
        let mut s = Solver::new(Method::Rk4 { dt: 0.3 }, 2).unwrap();
        let mut x = [1.0, 0.0];
        let mut t = 0.0;
        s.advance(&mut decay, &mut t, &mut x, 1.0, &mut |_| {}).unwrap();
        assert_eq!(t, 1.0);
        assert!((x[0] - (-1.0f64).exp()).abs() < 1e-3);
    }

    #[test]
    fn projection_is_applied() {
        let mut s = Solver::new(Method::rk45_default(), 1).unwrap();
        let mut x = [0.0];
        let mut t = 0.0;
        let mut grow = |_t: f64, _x: &[f64], dx: &mut [f64]| dx[0] = 1.0;
        s.advance(&mut grow, &mut t, &mut x, 5.0, &mut |x| x[0] = x[0].min(1.2)).unwrap();
        assert_eq!(x[0], 1.2);
    }

    #[test]
    fn blow_up_is_reported() {
        let mut s = Solver::new(Method::Rk4 { dt: 0.1 }, 1).unwrap();
        let mut x = [1.0];
        let mut t = 0.0;
        let mut f = |_t: f64, x: &[f64], dx: &mut [f64]| dx[0] = x[0] * x[0] * 1e3;
        let err = s.advance(&mut f, &mut t, &mut x, 10.0, &mut |_| {}).unwrap_err();
        assert!(matches!(err, SmibError::Divergence { .. }));
    }

    #[test]
    fn rejects_bad_options() {
        assert!(Solver::new(Method::Rk4 { dt: 0.0 }, 1).is_err());
        assert!(Solver::new(Method::Rk45 { rtol: -1.0, atol: 1e-9, max_step: 1.0 }, 1).is_err());
    }
}
