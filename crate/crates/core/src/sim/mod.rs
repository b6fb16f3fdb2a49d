//! Closed-loop simulation: a plant and a controller co-integrated as one ODE,
//! sampled onto a fixed output grid.

mod controllers;
mod metrics;
mod plants;
mod signal;
mod trajectory;

use std::cell::RefCell;

pub use controllers::{Controller, FblLaw, ObserverFeedback, OpenLoop, PidLoops, StateFeedback};
pub use metrics::{metrics, ChannelMetrics, Metrics};
pub use plants::{LinearPlant, Plant, PlantKind, ReducedPlant, TruthPlant};
pub use signal::{staircase, SignalTag, TestSignal};
pub use trajectory::{format_g, Trajectory, TrajectoryMeta};

use crate::error::{Result, SmibError};
use crate::ode::{Method, Solver};
use crate::params::MachineParams;

/// Actuator and governor bounds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Limits {
    pub efd_min: f64,
    pub efd_max: f64,
    pub gv_min: f64,
    pub gv_max: f64,
}

impl Limits {
    pub fn from_params(p: &MachineParams) -> Self {
        Self { efd_min: p.efd_min, efd_max: p.efd_max, gv_min: p.gv_min, gv_max: p.gv_max }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimOptions {
    pub method: Method,
    pub horizon: f64,
    /// Output sampling interval.
    pub sample: f64,
    /// `None` runs without actuator limits.
    pub limits: Option<Limits>,
}

impl SimOptions {
    pub fn new(horizon: f64, sample: f64) -> Self {
        Self { method: Method::rk45_default(), horizon, sample, limits: None }
    }

    pub fn with_limits(mut self, limits: Limits) -> Self {
        self.limits = Some(limits);
        self
    }

    pub fn with_method(mut self, method: Method) -> Self {
        self.method = method;
        self
    }

    fn validate(&self) -> Result<()> {
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return Err(SmibError::InvalidArgument(format!("horizon {} must be positive", self.horizon)));
        }
        if !(self.sample > 0.0 && self.sample <= self.horizon) {
            return Err(SmibError::InvalidArgument(format!("sample interval {} is invalid", self.sample)));
        }
        match self.method {
            Method::Rk4 { dt } if !(dt > 0.0 && dt <= self.sample) => {
                Err(SmibError::InvalidArgument(format!("rk4 step {dt} must be positive and <= the sample interval")))
            }
            _ => Ok(()),
        }
    }
}

/// Controller command with limits applied.
fn applied_command(
    plant: &dyn Plant,
    ctrl: &dyn Controller,
    t: f64,
    x: &[f64],
    xc: &[f64],
    limits: Option<&Limits>,
) -> Result<Vec<f64>> {
    let mut cmd = ctrl.command(t, x, xc, plant)?;
    if let Some(l) = limits {
        plant.clamp_command(&mut cmd, l);
    }
    Ok(cmd)
}

/// Integrate plant and controller from `x0` over the horizon. A non-finite
/// state ends the run early; the trajectory keeps the samples up to that
/// point and records the reason.
pub fn integrate(plant: &dyn Plant, ctrl: &dyn Controller, x0: &[f64], opts: &SimOptions) -> Result<Trajectory> {
    opts.validate()?;
    let n = plant.state_labels().len();
    if x0.len() != n || x0.iter().any(|v| !v.is_finite()) {
        return Err(SmibError::InvalidArgument(format!("initial state must be {n} finite values")));
    }
    let xc0 = ctrl.initial_state(x0, plant)?;
    let nc = xc0.len();
    let mut z: Vec<f64> = x0.iter().cloned().chain(xc0).collect();
    if let Some(l) = &opts.limits {
        plant.project(&mut z[..n], l);
    }

    let mut state_labels = plant.state_labels();
    state_labels.extend(ctrl.state_labels());
    let mut tr = Trajectory::new(
        TrajectoryMeta {
            plant: plant.kind().name().into(),
            controller: ctrl.name(),
            operating_point: String::new(),
            integrator: opts.method.name().into(),
            dt: match opts.method {
                Method::Rk4 { dt } => dt,
                Method::Rk45 { .. } => 0.0,
            },
            horizon: opts.horizon,
        },
        state_labels,
        plant.command_labels(),
        plant.output_labels(),
    );

    let failure: RefCell<Option<SmibError>> = RefCell::new(None);
    let limits = opts.limits.as_ref();
    let mut rhs = |t: f64, s: &[f64], ds: &mut [f64]| {
        let (x, xc) = s.split_at(n);
        match applied_command(plant, ctrl, t, x, xc, limits) {
            Ok(cmd) => {
                let (dx, dxc) = ds.split_at_mut(n);
                plant.rhs(x, &cmd, dx);
                ctrl.rates(t, x, xc, &cmd, plant, dxc);
            }
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                ds.iter_mut().for_each(|d| *d = f64::NAN);
            }
        }
    };
    let mut project = |s: &mut [f64]| {
        if let Some(l) = limits {
            plant.project(&mut s[..n], l);
        }
    };

    let record = |tr: &mut Trajectory, t: f64, s: &[f64]| -> Result<()> {
        let (x, xc) = s.split_at(n);
        let cmd = applied_command(plant, ctrl, t, x, xc, limits)?;
        let y = plant.outputs(x, &cmd);
        tr.push(t, s.to_vec(), cmd, y);
        Ok(())
    };

    let mut solver = Solver::new(opts.method, n + nc)?;
    let mut t = 0.0;
    record(&mut tr, t, &z)?;
    let steps = (opts.horizon / opts.sample).round().max(1.0) as usize;
    for k in 1..=steps {
        let target = if k == steps { opts.horizon } else { k as f64 * opts.sample };
        let result = solver.advance(&mut rhs, &mut t, &mut z, target, &mut project);
        if let Some(e) = failure.borrow_mut().take() {
            return Err(e);
        }
        match result {
            Ok(()) => record(&mut tr, t, &z)?,
            Err(SmibError::Divergence { time, reason }) => {
                tr.termination = Some(format!("diverged at t = {time}: {reason}"));
                break;
            }
            Err(e) => return Err(e),
        }
    }
    Ok(tr)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linearize::StateSpaceModel;
    use crate::numlin::Matrix;

    fn decay() -> LinearPlant {
        let ss = StateSpaceModel::new(
            Matrix::from_element(1, 1, -1.0),
            Matrix::from_element(1, 1, 1.0),
            Matrix::from_element(1, 1, 1.0),
            Matrix::zeros(1, 1),
        )
        .unwrap();
        LinearPlant::new(ss)
    }

    #[test]
    fn exponential_decay() {
        let p = decay();
        let c = OpenLoop::constant(vec![0.0]);
        let tr = integrate(&p, &c, &[1.0], &SimOptions::new(2.0, 0.5)).unwrap();
        assert_eq!(tr.t, vec![0.0, 0.5, 1.0, 1.5, 2.0]);
        assert!((tr.x[4][0] - (-2.0f64).exp()).abs() < 1e-8);
    }

    #[test]
    fn bad_options_are_rejected() {
        let p = decay();
        let c = OpenLoop::constant(vec![0.0]);
        assert!(integrate(&p, &c, &[1.0], &SimOptions::new(-1.0, 0.5)).is_err());
        let o = SimOptions::new(1.0, 0.1).with_method(Method::Rk4 { dt: 0.5 });
        assert!(integrate(&p, &c, &[1.0], &o).is_err());
    }

    #[test]
    fn blow_up_keeps_last_good_samples() {
        let ss = StateSpaceModel::new(
            Matrix::from_element(1, 1, 0.0),
            Matrix::from_element(1, 1, 1.0),
            Matrix::from_element(1, 1, 1.0),
            Matrix::zeros(1, 1),
        )
        .unwrap();
        let p = LinearPlant::new(ss);
        // positive feedback x' = 1000 x overflows within the first second
        let c = StateFeedback::new(Matrix::from_element(1, 1, -1e3), vec![0.0], vec![0.0]);
        let tr = integrate(&p, &c, &[1.0], &SimOptions::new(10.0, 1.0)).unwrap();
        assert!(tr.termination.is_some());
        assert!(tr.t.len() < 11);
        assert!(tr.x.iter().flatten().all(|v| v.is_finite()));
    }
}
