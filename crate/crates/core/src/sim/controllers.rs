//! Control laws evaluated inside the integrator stages.

use super::plants::Plant;
use super::signal::TestSignal;
use crate::design::{GainMatrix, PidRealization};
use crate::error::{Result, SmibError};
use crate::fbl::{fbl_control, FblCoefficients, FblSetpoint};
use crate::numlin::Matrix;

pub trait Controller: Sync {
    fn name(&self) -> String;

    /// Labels of the controller's own states, appended to the plant states.
    fn state_labels(&self) -> Vec<String> {
        Vec::new()
    }

    fn initial_state(&self, _x0: &[f64], _plant: &dyn Plant) -> Result<Vec<f64>> {
        Ok(Vec::new())
    }

    fn command(&self, t: f64, x: &[f64], xc: &[f64], plant: &dyn Plant) -> Result<Vec<f64>>;

    fn rates(&self, _t: f64, _x: &[f64], _xc: &[f64], _cmd: &[f64], _plant: &dyn Plant, _dxc: &mut [f64]) {}
}

fn mat_vec(m: &Matrix, v: &[f64]) -> Vec<f64> {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| m[(i, j)] * v[j]).sum()).collect()
}

/// Fixed inputs plus optional test signals per channel.
#[derive(Debug, Clone)]
pub struct OpenLoop {
    pub base: Vec<f64>,
    pub signals: Vec<Option<TestSignal>>,
}

impl OpenLoop {
    pub fn constant(base: Vec<f64>) -> Self {
        let signals = vec![None; base.len()];
        Self { base, signals }
    }

    pub fn with_signal(mut self, channel: usize, signal: TestSignal) -> Self {
        self.signals[channel] = Some(signal);
        self
    }
}

impl Controller for OpenLoop {
    fn name(&self) -> String {
        "open-loop".into()
    }

    fn command(&self, t: f64, _x: &[f64], _xc: &[f64], _plant: &dyn Plant) -> Result<Vec<f64>> {
        Ok(self
            .base
            .iter()
            .zip(&self.signals)
            .map(|(b, s)| b + s.as_ref().map_or(0.0, |s| s.value(t)))
            .collect())
    }
}

/// `u = u_ref - K (x - x_ref)` on the plant's feedback state.
#[derive(Debug, Clone)]
pub struct StateFeedback {
    pub k: Matrix,
    pub x_ref: Vec<f64>,
    pub u_ref: Vec<f64>,
}

impl StateFeedback {
    pub fn new(k: Matrix, x_ref: Vec<f64>, u_ref: Vec<f64>) -> Self {
        Self { k, x_ref, u_ref }
    }
}

impl Controller for StateFeedback {
    fn name(&self) -> String {
        "state-feedback".into()
    }

    fn command(&self, _t: f64, x: &[f64], _xc: &[f64], plant: &dyn Plant) -> Result<Vec<f64>> {
        let view = plant.feedback_state(x);
        if view.len() != self.k.ncols() {
            return Err(SmibError::InvalidArgument(format!(
                "gain has {} columns but the plant exposes {} feedback states",
                self.k.ncols(),
                view.len()
            )));
        }
        let dev: Vec<f64> = view.iter().zip(&self.x_ref).map(|(a, b)| a - b).collect();
        Ok(self.u_ref.iter().zip(mat_vec(&self.k, &dev)).map(|(u, k)| u - k).collect())
    }
}

/// Full-order observer in deviation coordinates driving `u = u_ref - K x_hat`:
/// `x_hat' = A x_hat + B (u - u_ref) + L ((y - y_ref) - C x_hat)`.
#[derive(Debug, Clone)]
pub struct ObserverFeedback {
    pub a: Matrix,
    pub b: Matrix,
    /// Measurement rows used by the observer.
    pub c: Matrix,
    pub l: Matrix,
    pub k: Matrix,
    /// Indices into the plant's measurement vector.
    pub rows: Vec<usize>,
    pub u_ref: Vec<f64>,
    pub y_ref: Vec<f64>,
    pub x_hat0: Vec<f64>,
    pub labels: Vec<String>,
}

impl ObserverFeedback {
    pub fn measurement_error(&self, x: &[f64], cmd: &[f64], plant: &dyn Plant) -> Vec<f64> {
        let y = plant.measured(x, cmd);
        self.rows.iter().zip(&self.y_ref).map(|(r, yr)| y[*r] - yr).collect()
    }
}

impl Controller for ObserverFeedback {
    fn name(&self) -> String {
        "observer-feedback".into()
    }

    fn state_labels(&self) -> Vec<String> {
        self.labels.iter().map(|l| format!("hat_{l}")).collect()
    }

    fn initial_state(&self, _x0: &[f64], _plant: &dyn Plant) -> Result<Vec<f64>> {
        let n = self.a.nrows();
        let shapes_ok = self.a.ncols() == n
            && self.b.nrows() == n
            && self.c.ncols() == n
            && self.l.shape() == (n, self.c.nrows())
            && self.k.shape() == (self.b.ncols(), n)
            && self.rows.len() == self.c.nrows()
            && self.y_ref.len() == self.rows.len()
            && self.u_ref.len() == self.b.ncols()
            && self.x_hat0.len() == n;
        if !shapes_ok {
            return Err(SmibError::InvalidArgument("observer-feedback dimensions are inconsistent".into()));
        }
        Ok(self.x_hat0.clone())
    }

    fn command(&self, _t: f64, _x: &[f64], xc: &[f64], _plant: &dyn Plant) -> Result<Vec<f64>> {
        Ok(self.u_ref.iter().zip(mat_vec(&self.k, xc)).map(|(u, k)| u - k).collect())
    }

    fn rates(&self, _t: f64, x: &[f64], xc: &[f64], cmd: &[f64], plant: &dyn Plant, dxc: &mut [f64]) {
        let du: Vec<f64> = cmd.iter().zip(&self.u_ref).map(|(u, r)| u - r).collect();
        let dy = self.measurement_error(x, cmd, plant);
        let cx = mat_vec(&self.c, xc);
        let innov: Vec<f64> = dy.iter().zip(&cx).map(|(a, b)| a - b).collect();
        let ax = mat_vec(&self.a, xc);
        let bu = mat_vec(&self.b, &du);
        let li = mat_vec(&self.l, &innov);
        for i in 0..dxc.len() {
            dxc[i] = ax[i] + bu[i] + li[i];
        }
    }
}

/// Independent AVR and LFC PID loops around fixed base inputs. The AVR acts
/// on `V_ref - V_t`, the LFC on `w_ref - w`.
#[derive(Debug, Clone)]
pub struct PidLoops {
    pub avr: Option<PidRealization>,
    pub lfc: Option<PidRealization>,
    pub base: [f64; 2],
    pub v_ref: f64,
    pub omega_ref: f64,
    /// Initial integrator contents `[AVR, LFC]`.
    pub preload: [f64; 2],
}

impl PidLoops {
    fn errors(&self, y: &[f64]) -> (f64, f64) {
        (self.v_ref - y[0], self.omega_ref - y[1])
    }

    fn from_errors(&self, xc: &[f64], e: (f64, f64)) -> Vec<f64> {
        let avr = self.avr.map_or(0.0, |p| p.output(&xc[0..2], e.0));
        let lfc = self.lfc.map_or(0.0, |p| p.output(&xc[2..4], e.1));
        vec![self.base[0] + avr, self.base[1] + lfc]
    }

    /// With feedthrough the measurement depends on the command, so solve
    /// `cmd = base + pid(y(cmd))` by Newton iteration. Large loop gains make
    /// plain substitution diverge.
    fn solve(&self, x: &[f64], xc: &[f64], plant: &dyn Plant) -> Result<(Vec<f64>, (f64, f64))> {
        let eval = |cmd: &[f64]| {
            let e = self.errors(&plant.measured(x, cmd));
            (self.from_errors(xc, e), e)
        };
        let (mut cmd, mut e) = eval(&self.base);
        if !plant.has_feedthrough() {
            return Ok((cmd, e));
        }
        for _ in 0..30 {
            let (next, next_e) = eval(&cmd);
            let g = [next[0] - cmd[0], next[1] - cmd[1]];
            let scale = 1.0 + cmd[0].abs().max(cmd[1].abs());
            // non-finite commands are left for the integrator to flag
            if !(g[0].abs().max(g[1].abs()) > 1e-12 * scale) {
                return Ok((next, next_e));
            }
            // Jacobian of g by forward differences
            let mut jac = [[0.0; 2]; 2];
            for j in 0..2 {
                let h = 1e-7 * (1.0 + cmd[j].abs());
                let mut probe = cmd.clone();
                probe[j] += h;
                let (pn, _) = eval(&probe);
                for i in 0..2 {
                    jac[i][j] = ((pn[i] - probe[i]) - g[i]) / h;
                }
            }
            let det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
            if !(det.abs() > 1e-300) {
                break;
            }
            let step = [
                (jac[1][1] * g[0] - jac[0][1] * g[1]) / det,
                (jac[0][0] * g[1] - jac[1][0] * g[0]) / det,
            ];
            cmd = vec![cmd[0] - step[0], cmd[1] - step[1]];
            e = next_e;
        }
        // no fixed point here: hand back a non-finite command so a trial
        // stage gets rejected and a persistent failure reads as divergence
        Ok((vec![f64::NAN; cmd.len()], e))
    }
}

impl Controller for PidLoops {
    fn name(&self) -> String {
        "pid".into()
    }

    fn state_labels(&self) -> Vec<String> {
        ["avr_integral", "avr_filter", "lfc_integral", "lfc_filter"].map(String::from).to_vec()
    }

    fn initial_state(&self, x0: &[f64], plant: &dyn Plant) -> Result<Vec<f64>> {
        let (ea, el) = self.errors(&plant.measured(x0, &self.base));
        Ok(vec![self.preload[0], ea, self.preload[1], el])
    }

    fn command(&self, _t: f64, x: &[f64], xc: &[f64], plant: &dyn Plant) -> Result<Vec<f64>> {
        Ok(self.solve(x, xc, plant)?.0)
    }

    fn rates(&self, _t: f64, x: &[f64], xc: &[f64], cmd: &[f64], plant: &dyn Plant, dxc: &mut [f64]) {
        let (ea, el) = self.errors(&plant.measured(x, cmd));
        match self.avr {
            Some(p) => p.rates(&xc[0..2], ea, &mut dxc[0..2]),
            None => dxc[0..2].fill(0.0),
        }
        match self.lfc {
            Some(p) => p.rates(&xc[2..4], el, &mut dxc[2..4]),
            None => dxc[2..4].fill(0.0),
        }
    }
}

/// Feedback-linearising law on the plant's reduced-model view.
#[derive(Debug, Clone)]
pub struct FblLaw {
    pub coeffs: FblCoefficients,
    pub gain: GainMatrix,
    pub setpoint: FblSetpoint,
}

impl Controller for FblLaw {
    fn name(&self) -> String {
        "feedback-linearisation".into()
    }

    fn command(&self, _t: f64, x: &[f64], _xc: &[f64], plant: &dyn Plant) -> Result<Vec<f64>> {
        let view: [f64; 5] = plant
            .feedback_state(x)
            .try_into()
            .map_err(|_| SmibError::InvalidArgument("FBL needs a five-state reduced view".into()))?;
        let c = fbl_control(&view, &self.setpoint, &self.gain, &self.coeffs)?;
        Ok(vec![c.e_fd, c.u_t])
    }
}
