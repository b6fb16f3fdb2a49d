//! Plants the harness can drive. Controllers always speak in reduced-model
//! terms, `[E_FD, u_T]` (or their deviations for linear models); each plant
//! maps that command onto its own inputs.

use super::Limits;
use crate::fbl::{reduced_view, FblCoefficients, Reconstruction};
use crate::linearize::StateSpaceModel;
use crate::params::{ReducedCoefficients, TruthCoefficients};
use crate::reduced_model::{self, reduced_output, reduced_rhs};
use crate::truth_model::{self, truth_output, truth_rhs};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlantKind {
    Truth,
    Reduced,
    Linear,
}

impl PlantKind {
    pub fn name(&self) -> &'static str {
        match self {
            PlantKind::Truth => "truth",
            PlantKind::Reduced => "reduced",
            PlantKind::Linear => "linear",
        }
    }
}

pub trait Plant: Sync {
    fn kind(&self) -> PlantKind;
    fn state_labels(&self) -> Vec<String>;
    fn command_labels(&self) -> Vec<String>;
    /// Logged output channels.
    fn output_labels(&self) -> Vec<String>;
    fn rhs(&self, x: &[f64], cmd: &[f64], dx: &mut [f64]);
    fn outputs(&self, x: &[f64], cmd: &[f64]) -> Vec<f64>;
    /// Sensor readings: `[V_t, w]` for nonlinear plants, the `C x + D u`
    /// rows for linear ones.
    fn measured(&self, x: &[f64], cmd: &[f64]) -> Vec<f64>;
    /// State as seen by a reduced-model state-feedback law.
    fn feedback_state(&self, x: &[f64]) -> Vec<f64>;
    fn clamp_command(&self, cmd: &mut [f64], limits: &Limits);
    /// Keep bounded states (the governor valve) inside their limits.
    fn project(&self, x: &mut [f64], limits: &Limits);
    /// Whether the measurement depends on the command directly.
    fn has_feedthrough(&self) -> bool {
        false
    }
}

fn labels(v: &[&str]) -> Vec<String> {
    v.iter().map(|s| s.to_string()).collect()
}

fn clamp_efd(cmd: &mut [f64], l: &Limits) {
    cmd[0] = cmd[0].clamp(l.efd_min, l.efd_max);
}

#[derive(Debug, Clone)]
pub struct ReducedPlant {
    pub coeffs: ReducedCoefficients,
}

impl ReducedPlant {
    pub fn new(coeffs: ReducedCoefficients) -> Self {
        Self { coeffs }
    }
}

impl Plant for ReducedPlant {
    fn kind(&self) -> PlantKind {
        PlantKind::Reduced
    }

    fn state_labels(&self) -> Vec<String> {
        labels(&reduced_model::STATE_LABELS)
    }

    fn command_labels(&self) -> Vec<String> {
        labels(&reduced_model::INPUT_LABELS)
    }

    fn output_labels(&self) -> Vec<String> {
        labels(&["V_t", "V_d", "V_q", "T_e"])
    }

    fn rhs(&self, x: &[f64], cmd: &[f64], dx: &mut [f64]) {
        let d = reduced_rhs(&as5(x), &[cmd[0], cmd[1]], &self.coeffs);
        dx.copy_from_slice(&d);
    }

    fn outputs(&self, x: &[f64], _cmd: &[f64]) -> Vec<f64> {
        let y = reduced_output(&as5(x), &self.coeffs);
        let te = reduced_model::electrical_torque(x[0], x[reduced_model::DELTA], &self.coeffs);
        vec![y.v_t, y.v_d, y.v_q, te]
    }

    fn measured(&self, x: &[f64], _cmd: &[f64]) -> Vec<f64> {
        vec![reduced_output(&as5(x), &self.coeffs).v_t, x[reduced_model::OMEGA]]
    }

    fn feedback_state(&self, x: &[f64]) -> Vec<f64> {
        x.to_vec()
    }

    fn clamp_command(&self, cmd: &mut [f64], limits: &Limits) {
        clamp_efd(cmd, limits);
    }

    fn project(&self, x: &mut [f64], l: &Limits) {
        let g = &mut x[reduced_model::G_V];
        *g = g.clamp(l.gv_min, l.gv_max);
    }
}

fn as5(x: &[f64]) -> [f64; 5] {
    x.try_into().expect("five reduced states")
}

fn as9(x: &[f64]) -> [f64; 9] {
    x.try_into().expect("nine truth states")
}

/// Ninth-order plant. The excitation command is converted to field voltage,
/// and state feedback sees `E'_q` reconstructed from the currents.
#[derive(Debug, Clone)]
pub struct TruthPlant {
    pub coeffs: TruthCoefficients,
    pub fbl: FblCoefficients,
    pub reconstruction: Reconstruction,
}

impl TruthPlant {
    pub fn new(coeffs: TruthCoefficients, fbl: FblCoefficients) -> Self {
        Self { coeffs, fbl, reconstruction: Reconstruction::default() }
    }

    /// Plant inputs `[V_F, u_T]` for a command `[E_FD, u_T]`.
    pub fn inputs(&self, cmd: &[f64]) -> [f64; 2] {
        [self.fbl.recon[4] * cmd[0], cmd[1]]
    }
}

impl Plant for TruthPlant {
    fn kind(&self) -> PlantKind {
        PlantKind::Truth
    }

    fn state_labels(&self) -> Vec<String> {
        labels(&truth_model::STATE_LABELS)
    }

    fn command_labels(&self) -> Vec<String> {
        labels(&reduced_model::INPUT_LABELS)
    }

    fn output_labels(&self) -> Vec<String> {
        labels(&["V_t", "V_d", "V_q", "T_e", "V_F", "E_q_prime_est"])
    }

    fn rhs(&self, x: &[f64], cmd: &[f64], dx: &mut [f64]) {
        dx.copy_from_slice(&truth_rhs(&as9(x), &self.inputs(cmd), &self.coeffs));
    }

    fn outputs(&self, x: &[f64], cmd: &[f64]) -> Vec<f64> {
        let xs = as9(x);
        let u = self.inputs(cmd);
        let y = truth_output(&xs, &u, &self.coeffs);
        let te = truth_model::electrical_torque(&xs, &self.coeffs);
        let e = crate::fbl::reconstruct_eq_prime(&xs, &self.fbl, self.reconstruction);
        vec![y.v_t, y.v_d, y.v_q, te, u[0], e]
    }

    fn measured(&self, x: &[f64], cmd: &[f64]) -> Vec<f64> {
        let y = truth_output(&as9(x), &self.inputs(cmd), &self.coeffs);
        vec![y.v_t, y.omega]
    }

    fn feedback_state(&self, x: &[f64]) -> Vec<f64> {
        reduced_view(&as9(x), &self.fbl, self.reconstruction).to_vec()
    }

    fn clamp_command(&self, cmd: &mut [f64], limits: &Limits) {
        clamp_efd(cmd, limits);
    }

    fn project(&self, x: &mut [f64], l: &Limits) {
        let g = &mut x[truth_model::G_V];
        *g = g.clamp(l.gv_min, l.gv_max);
    }

    fn has_feedthrough(&self) -> bool {
        true
    }
}

/// Deviation model `dx' = A dx + B du`, `dy = C dx + D du` about the
/// operating point stored in the model.
#[derive(Debug, Clone)]
pub struct LinearPlant {
    pub model: StateSpaceModel,
    efd_input: Option<usize>,
    gv_state: Option<usize>,
}

impl LinearPlant {
    pub fn new(model: StateSpaceModel) -> Self {
        let efd_input = model.input_labels.iter().position(|l| l == "E_FD");
        let gv_state = model.state_labels.iter().position(|l| l == "G_V");
        Self { model, efd_input, gv_state }
    }
}

impl Plant for LinearPlant {
    fn kind(&self) -> PlantKind {
        PlantKind::Linear
    }

    fn state_labels(&self) -> Vec<String> {
        self.model.state_labels.iter().map(|l| format!("d_{l}")).collect()
    }

    fn command_labels(&self) -> Vec<String> {
        self.model.input_labels.iter().map(|l| format!("d_{l}")).collect()
    }

    fn output_labels(&self) -> Vec<String> {
        self.model.output_labels.iter().map(|l| format!("d_{l}")).collect()
    }

    fn rhs(&self, x: &[f64], cmd: &[f64], dx: &mut [f64]) {
        let m = &self.model;
        for (i, d) in dx.iter_mut().enumerate() {
            *d = (0..x.len()).map(|j| m.a[(i, j)] * x[j]).sum::<f64>()
                + (0..cmd.len()).map(|j| m.b[(i, j)] * cmd[j]).sum::<f64>();
        }
    }

    fn outputs(&self, x: &[f64], cmd: &[f64]) -> Vec<f64> {
        let m = &self.model;
        (0..m.outputs())
            .map(|i| {
                (0..x.len()).map(|j| m.c[(i, j)] * x[j]).sum::<f64>()
                    + (0..cmd.len()).map(|j| m.d[(i, j)] * cmd[j]).sum::<f64>()
            })
            .collect()
    }

    fn measured(&self, x: &[f64], cmd: &[f64]) -> Vec<f64> {
        self.outputs(x, cmd)
    }

    fn feedback_state(&self, x: &[f64]) -> Vec<f64> {
        x.to_vec()
    }

    fn clamp_command(&self, cmd: &mut [f64], limits: &Limits) {
        if let Some(i) = self.efd_input {
            let offset = self.model.u0[i];
            cmd[i] = (cmd[i] + offset).clamp(limits.efd_min, limits.efd_max) - offset;
        }
    }

    fn project(&self, x: &mut [f64], l: &Limits) {
        if let Some(i) = self.gv_state {
            let offset = self.model.x0[i];
            x[i] = (x[i] + offset).clamp(l.gv_min, l.gv_max) - offset;
        }
    }

    fn has_feedthrough(&self) -> bool {
        self.model.d.iter().any(|v| *v != 0.0)
    }
}
