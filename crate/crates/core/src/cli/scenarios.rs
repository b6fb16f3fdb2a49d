//! Bundled scenarios: which plant, which controller, where it starts and how
//! long it runs. Gains and weights are the published design values.

use crate::config::Config;
use crate::design::{
    chain_lqr_gain, kalman_ltr_gain, lqr_gain, observer_gain, pid_controller, place_poles_seeded, GainMatrix,
    LoopTag, LtrSchedule, ObserverGain, ObserverPoles, PidGains,
};
use crate::error::{Result, SmibError};
use crate::fbl::{derive_fbl_coefficients, FblCoefficients, FblSetpoint};
use crate::linearize::{
    linearize_reduced, linearize_truth, reduced_equilibrium, truth_equilibrium_from, Anchors, Equilibrium,
    StateSpaceModel,
};
use crate::numlin::{diag, Matrix, C64};
use crate::params::{
    derive_reduced_coefficients, derive_truth_coefficients, MachineParams, ReducedCoefficients, TruthCoefficients,
};
use crate::reduced_model::{self, lfc_avr_transfer_functions, reduced_output};
use crate::sim::{
    staircase, Controller, FblLaw, Limits, LinearPlant, ObserverFeedback, OpenLoop, PidLoops, Plant, ReducedPlant,
    SignalTag, StateFeedback, TruthPlant,
};

/// Config section whose keys replace derived reduced-model coefficients.
pub const COEFFICIENT_SECTION: &str = "reduced_coefficients";

/// Parameters and derived tables shared by every scenario.
#[derive(Debug, Clone)]
pub struct Workbench {
    pub config: Config,
    pub params: MachineParams,
    pub reduced: ReducedCoefficients,
    pub truth: TruthCoefficients,
    pub fbl: FblCoefficients,
}

impl Workbench {
    pub fn new(config: Config) -> Result<Self> {
        let params = config.machine.clone();
        let mut reduced = derive_reduced_coefficients(&params)?;
        if let Some(overrides) = config.extra.get(COEFFICIENT_SECTION) {
            for (key, value) in overrides {
                let v = value.parse::<f64>().map_err(|_| SmibError::Config {
                    line: 0,
                    reason: format!("[{COEFFICIENT_SECTION}] {key} = `{value}` is not a number"),
                })?;
                reduced.set(key, v)?;
            }
        }
        let truth = derive_truth_coefficients(&params)?;
        let fbl = derive_fbl_coefficients(&reduced, &params)?;
        Ok(Self { config, params, reduced, truth, fbl })
    }

    fn anchors(&self, op: &str) -> Result<Anchors> {
        let p = self.config.operating_point(op)?;
        Ok(Anchors { delta: p.delta, t_m: p.t_m })
    }

    pub fn reduced_equilibrium(&self, op: &str) -> Result<Equilibrium> {
        reduced_equilibrium(self.anchors(op)?, &self.reduced)
    }

    /// Truth steady state, seeded from the tabulated currents of the point.
    pub fn truth_equilibrium(&self, op: &str) -> Result<Equilibrium> {
        let p = self.config.operating_point(op)?;
        let vf_guess = self.fbl.recon[4] * 2.5 * p.i_f.max(0.1) / 1.63;
        let guess = [p.i_d, p.i_f, p.i_kd, p.i_q, p.i_kq, vf_guess];
        truth_equilibrium_from(self.anchors(op)?, &self.truth, guess)
    }

    /// Reduced-model linearisation at `op`.
    pub fn reduced_linear(&self, op: &str) -> Result<StateSpaceModel> {
        linearize_reduced(&self.reduced_equilibrium(op)?, &self.reduced)
    }

    pub fn truth_linear(&self, op: &str) -> Result<StateSpaceModel> {
        linearize_truth(&self.truth_equilibrium(op)?, &self.truth)
    }

    pub fn limits(&self) -> Limits {
        Limits::from_params(&self.params)
    }

    /// Per-scenario override from a `[scenario.<name>]` config section.
    fn scenario_value(&self, scenario: &str, key: &str) -> Result<Option<f64>> {
        let Some(section) = self.config.extra.get(&format!("scenario.{scenario}")) else {
            return Ok(None);
        };
        section
            .get(key)
            .map(|v| {
                v.parse::<f64>().map_err(|_| SmibError::Config {
                    line: 0,
                    reason: format!("[scenario.{scenario}] {key} = `{v}` is not a number"),
                })
            })
            .transpose()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlantChoice {
    Truth,
    Reduced,
    /// Reduced linearisation about the nominal point.
    Linear,
    /// As `Linear` with the angle term dropped from the voltage row.
    LinearDecoupled,
    /// Truth linearisation about the nominal point.
    LinearTruth,
    /// Uncompensated LFC loop, valve step to rotor angle.
    LfcLoop,
    /// Uncompensated unity-feedback AVR loop, reference step to voltage.
    AvrLoop,
}

impl PlantChoice {
    pub fn name(&self) -> &'static str {
        match self {
            PlantChoice::Truth => "truth",
            PlantChoice::Reduced => "reduced",
            PlantChoice::Linear | PlantChoice::LinearDecoupled | PlantChoice::LinearTruth => "linear",
            PlantChoice::LfcLoop | PlantChoice::AvrLoop => "loop",
        }
    }

    fn is_linear(&self) -> bool {
        !matches!(self, PlantChoice::Truth | PlantChoice::Reduced)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeasuredOutputs {
    VoltageOnly,
    VoltageAndSpeed,
}

impl MeasuredOutputs {
    fn rows(&self) -> Vec<usize> {
        match self {
            MeasuredOutputs::VoltageOnly => vec![0],
            MeasuredOutputs::VoltageAndSpeed => vec![0, 1],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ControllerSpec {
    /// Equilibrium inputs, optionally with a staircase on both channels.
    OpenLoop { signal: Option<SignalTag> },
    /// Unit step on the single loop input.
    UnitStep,
    Pid { lfc: PidGains, avr: PidGains },
    Lqr { q: Vec<f64>, r: Vec<f64> },
    Place { poles: Vec<C64> },
    ObserverLqr { q: Vec<f64>, r: Vec<f64>, outputs: MeasuredOutputs, rho: f64 },
    ObserverPlace { poles: Vec<C64>, rho: f64 },
    Ltr { q: Vec<f64>, r: Vec<f64>, v20: f64, recovery: f64 },
    Fbl { q: Vec<f64>, r: [f64; 2] },
}

impl ControllerSpec {
    pub fn name(&self) -> &'static str {
        match self {
            ControllerSpec::OpenLoop { .. } | ControllerSpec::UnitStep => "open-loop",
            ControllerSpec::Pid { .. } => "pid",
            ControllerSpec::Lqr { .. } => "lqr",
            ControllerSpec::Place { .. } => "place",
            ControllerSpec::ObserverLqr { .. } => "observer-lqr",
            ControllerSpec::ObserverPlace { .. } => "observer-place",
            ControllerSpec::Ltr { .. } => "ltr-lqg",
            ControllerSpec::Fbl { .. } => "fbl",
        }
    }
}

/// Where a run starts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Start {
    /// The plant's own equilibrium at the scenario's operating point.
    Equilibrium,
    /// Equilibrium with the rotor angle displaced (rad).
    AngleOffset(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub summary: String,
    pub plant: PlantChoice,
    pub controller: ControllerSpec,
    /// Operating point the controller regulates to.
    pub operating_point: &'static str,
    pub start: Start,
    pub horizon: f64,
    pub sample: f64,
    /// Produce `statespace.csv`.
    pub linearization: bool,
    /// Clamp commands to the actuator ranges. Off for the published gain
    /// sets whose transients run far outside them.
    pub actuator_limits: bool,
}

/// Rotor-angle displacement used by the regulation runs on the reduced and
/// linear plants.
pub const DEFAULT_ANGLE_OFFSET: f64 = 0.05;
/// Per-step height of the staircase test signals.
pub const DEFAULT_STEP_HEIGHT: f64 = 0.05;
/// Upper governor limit used when the operating point sits above the
/// tabulated one.
pub const RAISED_GV_MAX: f64 = 1.5;

const Q_NOMINAL: [f64; 5] = [300.0, 250.0, 200.0, 200.0, 250.0];
const Q_RECOVERY: [f64; 5] = [1254.75, 1500.0, 544.5, 142.5, 1500.0];
const Q_TRUTH: [f64; 5] = [40000.0, 10000.0, 250000.0, 500.0, 500.0];
const Q_TRUTH_LTR: [f64; 5] = [7500.0, 15000.0, 16500.0, 7500.0, 7500.0];

fn real(v: &[f64]) -> Vec<C64> {
    v.iter().map(|x| C64::new(*x, 0.0)).collect()
}

fn pid_linear() -> ControllerSpec {
    ControllerSpec::Pid {
        lfc: PidGains::new(200.0, 150.0, 100.0, LoopTag::Lfc),
        avr: PidGains::new(10.0, 10.0, 4.0, LoopTag::Avr),
    }
}

fn lqr_truth() -> ControllerSpec {
    ControllerSpec::Lqr { q: Q_TRUTH.to_vec(), r: vec![0.07, 0.07] }
}

fn ltr_truth() -> ControllerSpec {
    ControllerSpec::Ltr { q: Q_TRUTH_LTR.to_vec(), r: vec![1.0, 1.0], v20: 0.65, recovery: 5.25 }
}

fn fbl_truth() -> ControllerSpec {
    ControllerSpec::Fbl { q: vec![250.0; 5], r: [30000.0, 30000.0] }
}

/// Every bundled scenario, in registry order.
pub fn registry() -> Vec<Scenario> {
    let s = |name: &str, summary: &str, plant, controller, operating_point, start, horizon, sample| Scenario {
        name: name.to_string(),
        summary: summary.to_string(),
        plant,
        controller,
        operating_point,
        start,
        horizon,
        sample,
        linearization: false,
        actuator_limits: true,
    };
    let offset = Start::AngleOffset(DEFAULT_ANGLE_OFFSET);
    let eq = Start::Equilibrium;
    use ControllerSpec as C;
    use PlantChoice as P;
    let mut out = vec![
        Scenario {
            linearization: true,
            ..s("sec3.4-linearize-op1", "reduced linearisation at OP I, free response", P::Linear,
                C::OpenLoop { signal: None }, "op1", offset, 30.0, 0.01)
        },
        Scenario {
            linearization: true,
            ..s("sec3.4-linearize-truth-op1", "truth linearisation at OP I, free response", P::LinearTruth,
                C::OpenLoop { signal: None }, "op1", offset, 30.0, 0.01)
        },
        s("sec5-gamma1-reduced", "reduced plant under staircase 1 on both inputs", P::Reduced,
            C::OpenLoop { signal: Some(SignalTag::Gamma1) }, "op1", eq, 800.0, 0.5),
        s("sec5-gamma2-reduced", "reduced plant under staircase 2 on both inputs", P::Reduced,
            C::OpenLoop { signal: Some(SignalTag::Gamma2) }, "op1", eq, 800.0, 0.5),
        s("sec5-gamma1-truth", "truth plant under staircase 1 on both inputs", P::Truth,
            C::OpenLoop { signal: Some(SignalTag::Gamma1) }, "op1", eq, 800.0, 0.5),
        s("sec5-gamma2-truth", "truth plant under staircase 2 on both inputs", P::Truth,
            C::OpenLoop { signal: Some(SignalTag::Gamma2) }, "op1", eq, 800.0, 0.5),
        s("sec6.1-lfc-step", "uncompensated LFC loop, unit valve step", P::LfcLoop, C::UnitStep, "op1", eq,
            2000.0, 0.1),
        s("sec6.2-avr-step", "uncompensated AVR loop, unit reference step", P::AvrLoop, C::UnitStep, "op1", eq,
            20.0, 0.01),
        s("sec6.4-pid-decoupled", "PID loops on the decoupled linear model", P::LinearDecoupled, pid_linear(),
            "op1", offset, 30.0, 0.01),
        s("sec6.4-pid-coupled", "PID loops on the coupled linear model", P::Linear, pid_linear(), "op1", offset,
            30.0, 0.01),
        s("sec6.5-pid-reduced", "PID loops on the reduced nonlinear plant", P::Reduced, pid_linear(), "op1",
            offset, 30.0, 0.01),
        Scenario {
            actuator_limits: false,
            ..s("sec6.6-pid-truth", "retuned PID loops on the truth plant", P::Truth,
                C::Pid {
                    lfc: PidGains::new(2000.0, 1500.0, 1000.0, LoopTag::Lfc),
                    avr: PidGains::new(2000.0, 15000.0, 4.0, LoopTag::Avr),
                },
                "op1", offset, 30.0, 0.01)
        },
        s("sec7.1.1-lqr-linear", "LQR on the linear model", P::Linear,
            C::Lqr { q: Q_NOMINAL.to_vec(), r: vec![0.5, 0.5] }, "op1", offset, 30.0, 0.01),
        s("sec7.1.2-lqr-reduced", "LQR on the reduced nonlinear plant", P::Reduced,
            C::Lqr { q: Q_NOMINAL.to_vec(), r: vec![0.5, 0.5] }, "op1", offset, 30.0, 0.01),
        s("sec7.1.3-lqr-truth", "LQR on the truth plant", P::Truth, lqr_truth(), "op1", eq, 300.0, 0.1),
        s("sec7.2.1-place-linear", "pole placement on the linear model", P::Linear,
            C::Place { poles: real(&[-0.8, -0.9, -0.7, -1.1, -1.0]) }, "op1", offset, 30.0, 0.01),
        Scenario {
            actuator_limits: false,
            ..s("sec7.2.2-place-reduced", "pole placement on the reduced nonlinear plant", P::Reduced,
                C::Place { poles: real(&[-300.0, -0.9, -280.0, -5.0, -70.0]) }, "op1", offset, 30.0, 0.01)
        },
        s("sec7.2.3-place-truth", "pole placement on the truth plant", P::Truth,
            C::Place {
                poles: vec![
                    C64::new(-8.0, 0.05),
                    C64::new(-8.0, -0.05),
                    C64::new(-200.0, 0.0),
                    C64::new(-250.0, 0.0),
                    C64::new(-0.1, 0.0),
                ],
            },
            "op1", eq, 300.0, 0.1),
        s("sec7.3.1-observer-lqr-vt", "LQR with a voltage-only observer, linear model", P::Linear,
            C::ObserverLqr { q: vec![1.0; 5], r: vec![20.0, 20.0], outputs: MeasuredOutputs::VoltageOnly, rho: 12.0 },
            "op1", offset, 60.0, 0.01),
        s("sec7.3.1-observer-lqr-linear", "LQR with a voltage and speed observer, linear model", P::Linear,
            C::ObserverLqr { q: vec![1.0; 5], r: vec![1.0, 1.0], outputs: MeasuredOutputs::VoltageAndSpeed, rho: 12.0 },
            "op1", offset, 60.0, 0.01),
        s("sec7.3.2-observer-place-linear", "pole placement with an observer, linear model", P::Linear,
            C::ObserverPlace { poles: real(&[-0.7, -0.8, -0.5, -0.9, -0.8]), rho: 12.0 }, "op1", offset, 60.0,
            0.01),
        s("sec7.3.3-observer-lqr-reduced", "observer-based LQR on the reduced nonlinear plant", P::Reduced,
            C::ObserverLqr {
                q: vec![5.0, 5.0, 0.5, 0.05, 5.0],
                r: vec![1000.0, 1000.0],
                outputs: MeasuredOutputs::VoltageAndSpeed,
                rho: 12.0,
            },
            "op1", offset, 60.0, 0.01),
        s("sec7.3.4-ltr-reduced", "LTR-tuned LQG on the reduced nonlinear plant", P::Reduced,
            C::Ltr { q: Q_RECOVERY.to_vec(), r: vec![1.0, 1.0], v20: 1.0, recovery: 9.0005 }, "op1", offset,
            60.0, 0.01),
        s("sec7.3.5-ltr-truth", "LTR-tuned LQG on the truth plant", P::Truth, ltr_truth(), "op1", eq, 300.0, 0.1),
        s("sec8.1-fbl-reduced", "feedback linearisation on the reduced nonlinear plant", P::Reduced,
            C::Fbl { q: Q_NOMINAL.to_vec(), r: [0.07, 0.07] }, "op1", offset, 20.0, 0.005),
        s("sec8.2-fbl-truth", "feedback linearisation on the truth plant", P::Truth, fbl_truth(), "op1", eq,
            300.0, 0.1),
    ];
    for (op, tag) in [("op2", "II"), ("op3", "III")] {
        out.push(s(&format!("sec9-lqr-{op}"), &format!("truth-plant LQR at OP {tag}"), P::Truth, lqr_truth(), op,
            eq, 300.0, 0.1));
        out.push(s(&format!("sec9-ltr-{op}"), &format!("truth-plant LTR-tuned LQG at OP {tag}"), P::Truth,
            ltr_truth(), op, eq, 300.0, 0.1));
        out.push(s(&format!("sec9-fbl-{op}"), &format!("truth-plant feedback linearisation at OP {tag}"),
            P::Truth, fbl_truth(), op, eq, 300.0, 0.1));
    }
    out
}

pub fn names() -> Vec<String> {
    registry().into_iter().map(|s| s.name).collect()
}

pub fn find(name: &str) -> Result<Scenario> {
    registry().into_iter().find(|s| s.name == name).ok_or_else(|| {
        SmibError::InvalidArgument(format!(
            "unknown scenario `{name}`; known scenarios: {}",
            names().join(", ")
        ))
    })
}

/// A scenario resolved into runnable pieces.
pub struct Prepared {
    pub plant: Box<dyn Plant>,
    pub controller: Box<dyn Controller>,
    pub x0: Vec<f64>,
    pub limits: Limits,
    /// Channel references for the metrics.
    pub refs: Vec<(String, f64)>,
    pub statespace: Option<StateSpaceModel>,
    /// `gains.txt` body when a synthesis ran.
    pub gains: Option<String>,
}

/// Resolve gains, plant and initial state. Every design step runs here, so a
/// scenario that cannot be designed fails before any simulation starts.
pub fn prepare(wb: &Workbench, sc: &Scenario, seed: u64) -> Result<Prepared> {
    let op = sc.operating_point;
    let target = wb.reduced_equilibrium(op)?;
    let nominal = wb.reduced_linear("op1")?;
    let mut limits = wb.limits();
    if target.x0[reduced_model::G_V] > limits.gv_max {
        limits.gv_max = RAISED_GV_MAX.max(limits.gv_max);
    }

    let angle_offset = match sc.start {
        Start::Equilibrium => 0.0,
        Start::AngleOffset(d) => wb.scenario_value(&sc.name, "angle_offset")?.unwrap_or(d),
    };

    // plant, its initial state, and the controller's reference point in the
    // plant's command and feedback coordinates
    let mut statespace = None;
    let (plant, x0, x_ref, u_ref, y_ref): (Box<dyn Plant>, Vec<f64>, Vec<f64>, Vec<f64>, Vec<f64>) = match sc.plant {
        PlantChoice::Reduced => {
            let mut x0 = wb.reduced_equilibrium(op)?.x0;
            x0[reduced_model::DELTA] += angle_offset;
            let vt = reduced_output(&target.reduced_state()?, &wb.reduced).v_t;
            (Box::new(ReducedPlant::new(wb.reduced.clone())), x0, target.x0.clone(), target.u0.clone(), vec![vt, 1.0])
        }
        PlantChoice::Truth => {
            let mut x0 = wb.truth_equilibrium(op)?.x0;
            x0[crate::truth_model::DELTA] += angle_offset;
            let vt = reduced_output(&target.reduced_state()?, &wb.reduced).v_t;
            let plant = TruthPlant::new(wb.truth.clone(), wb.fbl.clone());
            (Box::new(plant), x0, target.x0.clone(), target.u0.clone(), vec![vt, 1.0])
        }
        PlantChoice::Linear | PlantChoice::LinearDecoupled => {
            let mut model = nominal.clone();
            if sc.plant == PlantChoice::LinearDecoupled {
                model.c[(0, reduced_model::DELTA)] = 0.0;
            }
            if sc.linearization {
                statespace = Some(model.clone());
            }
            let mut x0 = vec![0.0; 5];
            x0[reduced_model::DELTA] = angle_offset;
            (Box::new(LinearPlant::new(model)), x0, vec![0.0; 5], vec![0.0; 2], vec![0.0; 2])
        }
        PlantChoice::LinearTruth => {
            let model = wb.truth_linear(op)?;
            statespace = Some(model.clone());
            let mut x0 = vec![0.0; 9];
            x0[crate::truth_model::DELTA] = angle_offset;
            (Box::new(LinearPlant::new(model)), x0, vec![0.0; 9], vec![0.0; 2], vec![0.0; 2])
        }
        PlantChoice::LfcLoop | PlantChoice::AvrLoop => {
            let loops = lfc_avr_transfer_functions(&nominal, &wb.reduced)?;
            let (tf, input, output) = if sc.plant == PlantChoice::LfcLoop {
                (loops.lfc_angle()?, "u_T", "delta")
            } else {
                (loops.avr_closed()?, "V_ref", "V_t")
            };
            let mut model = tf.to_state_space()?;
            model.input_labels = vec![input.into()];
            model.output_labels = vec![output.into()];
            let n = model.states();
            (Box::new(LinearPlant::new(model)), vec![0.0; n], vec![0.0; n], vec![0.0], vec![0.0])
        }
    };

    let open_loop = matches!(sc.controller, ControllerSpec::OpenLoop { .. } | ControllerSpec::UnitStep);
    let loop_plant = matches!(sc.plant, PlantChoice::LinearTruth | PlantChoice::LfcLoop | PlantChoice::AvrLoop);
    if loop_plant && !open_loop {
        return Err(SmibError::Unsupported(format!(
            "{} controllers need a plant with the five-state reduced view",
            sc.controller.name()
        )));
    }

    let mut gains = None;
    let controller: Box<dyn Controller> = match &sc.controller {
        ControllerSpec::OpenLoop { signal } => {
            let mut ol = OpenLoop::constant(u_ref.clone());
            if let Some(tag) = signal {
                let h = wb.scenario_value(&sc.name, "step_height")?.unwrap_or(DEFAULT_STEP_HEIGHT);
                let g = staircase(*tag, h);
                ol = ol.with_signal(0, g.clone()).with_signal(1, g);
            }
            Box::new(ol)
        }
        ControllerSpec::UnitStep => Box::new(OpenLoop::constant(vec![1.0])),
        ControllerSpec::Pid { lfc, avr } => {
            let lfc_c = pid_controller(*lfc)?;
            let avr_c = pid_controller(*avr)?;
            gains = Some(format!(
                "[gain.pid_lfc]\nKp = {}\nKi = {}\nKd = {}\nN = {}\n\n[gain.pid_avr]\nKp = {}\nKi = {}\nKd = {}\nN = {}\n",
                lfc.kp, lfc.ki, lfc.kd, lfc_c.realization.filter, avr.kp, avr.ki, avr.kd, avr_c.realization.filter
            ));
            // the speed integral is the angle deviation, so preload it with
            // the initial angle error
            let delta_err = -angle_offset;
            Box::new(PidLoops {
                avr: Some(avr_c.realization),
                lfc: Some(lfc_c.realization),
                base: [u_ref[0], u_ref[1]],
                v_ref: y_ref[0],
                omega_ref: y_ref[1],
                preload: [0.0, delta_err],
            })
        }
        ControllerSpec::Lqr { .. } | ControllerSpec::Place { .. } => {
            let d = feedback_design(wb, sc, seed)?;
            gains = Some(d.gains_text());
            Box::new(StateFeedback::new(d.feedback.k, x_ref.clone(), u_ref.clone()))
        }
        ControllerSpec::ObserverLqr { .. } | ControllerSpec::ObserverPlace { .. } | ControllerSpec::Ltr { .. } => {
            let d = feedback_design(wb, sc, seed)?;
            gains = Some(d.gains_text());
            let l = d.observer.as_ref().expect("observer designs carry a gain");
            Box::new(observer_feedback(&nominal, &d.sensed, &d.feedback, l, d.rows.clone(), &u_ref, &y_ref))
        }
        ControllerSpec::Fbl { q, r } => {
            if sc.plant.is_linear() {
                return Err(SmibError::Unsupported("feedback linearisation needs a nonlinear plant".into()));
            }
            let k = chain_lqr_gain(3, q, *r)?;
            gains = Some(k.to_config_text("fbl"));
            let setpoint = FblSetpoint::new(target.x0[reduced_model::DELTA], target.x0[reduced_model::T_M])?;
            Box::new(FblLaw { coeffs: wb.fbl.clone(), gain: k, setpoint })
        }
    };

    let refs = if sc.plant.is_linear() {
        let outs = plant.output_labels();
        outs.into_iter().map(|l| (l, 0.0)).collect()
    } else {
        vec![("V_t".to_string(), y_ref[0]), ("omega".into(), 1.0), ("delta".into(), x_ref[reduced_model::DELTA])]
    };

    Ok(Prepared { plant, controller, x0, limits, refs, statespace, gains })
}

/// Linear state-feedback synthesis of a scenario, on the nominal reduced
/// linearisation.
#[derive(Debug, Clone)]
pub struct FeedbackDesign {
    pub feedback: GainMatrix,
    pub observer: Option<ObserverGain>,
    /// Measurement rows the observer uses.
    pub rows: Vec<usize>,
    /// Nominal model restricted to those rows.
    pub sensed: StateSpaceModel,
    /// LTR parameter, for LTR designs.
    pub recovery: Option<(f64, f64)>,
}

impl FeedbackDesign {
    fn gains_text(&self) -> String {
        let name = match self.feedback.method {
            crate::design::DesignMethod::Placement { .. } => "place",
            _ => "lqr",
        };
        let mut s = self.feedback.to_config_text(name);
        match (&self.observer, self.recovery) {
            (Some(h), Some((q, v20))) => {
                s.push('\n');
                s.push_str(&observer_text("kalman", h));
                s.push_str(&format!("q = {q}\nV20_diag = {v20}\n"));
            }
            (Some(l), None) => {
                s.push('\n');
                s.push_str(&observer_text("observer", l));
            }
            _ => {}
        }
        s
    }
}

/// Gains for the state-feedback and observer-based controller kinds.
pub fn feedback_design(wb: &Workbench, sc: &Scenario, seed: u64) -> Result<FeedbackDesign> {
    let nominal = wb.reduced_linear("op1")?;
    let all_rows = MeasuredOutputs::VoltageAndSpeed.rows();
    let scaled = |k: &GainMatrix, rows: Vec<usize>, rho: f64| -> Result<FeedbackDesign> {
        let sensed = nominal.select_outputs(&rows);
        let l = observer_gain(&sensed, &ObserverPoles::Scaled { controller: k.closed_loop.clone(), rho }, seed)?;
        Ok(FeedbackDesign { feedback: k.clone(), observer: Some(l), rows, sensed, recovery: None })
    };
    match &sc.controller {
        ControllerSpec::Lqr { q, r } => Ok(FeedbackDesign {
            feedback: lqr_gain(&nominal, &diag(q), &diag(r))?,
            observer: None,
            rows: all_rows,
            sensed: nominal.clone(),
            recovery: None,
        }),
        ControllerSpec::Place { poles } => Ok(FeedbackDesign {
            feedback: place_poles_seeded(&nominal.a, &nominal.b, poles, seed)?,
            observer: None,
            rows: all_rows,
            sensed: nominal.clone(),
            recovery: None,
        }),
        ControllerSpec::ObserverLqr { q, r, outputs, rho } => {
            let k = lqr_gain(&nominal, &diag(q), &diag(r))?;
            scaled(&k, outputs.rows(), *rho)
        }
        ControllerSpec::ObserverPlace { poles, rho } => {
            let k = place_poles_seeded(&nominal.a, &nominal.b, poles, seed)?;
            scaled(&k, all_rows, *rho)
        }
        ControllerSpec::Ltr { q, r, v20, recovery } => {
            let k = lqr_gain(&nominal, &diag(q), &diag(r))?;
            let recovery = wb.scenario_value(&sc.name, "q")?.unwrap_or(*recovery);
            let mut sched = LtrSchedule::identity(5, 2, 2, recovery);
            sched.v20 = Matrix::identity(2, 2) * *v20;
            let h = kalman_ltr_gain(&nominal, &sched)?;
            Ok(FeedbackDesign {
                feedback: k,
                observer: Some(h),
                rows: all_rows,
                sensed: nominal.clone(),
                recovery: Some((recovery, *v20)),
            })
        }
        other => Err(SmibError::Unsupported(format!("{} is not a linear state-feedback design", other.name()))),
    }
}

fn observer_feedback(
    model: &StateSpaceModel,
    sensed: &StateSpaceModel,
    k: &GainMatrix,
    l: &ObserverGain,
    rows: Vec<usize>,
    u_ref: &[f64],
    y_ref: &[f64],
) -> ObserverFeedback {
    ObserverFeedback {
        a: model.a.clone(),
        b: model.b.clone(),
        c: sensed.c.clone(),
        l: l.l.clone(),
        k: k.k.clone(),
        y_ref: rows.iter().map(|r| y_ref[*r]).collect(),
        rows,
        u_ref: u_ref.to_vec(),
        x_hat0: vec![0.0; model.states()],
        labels: model.state_labels.clone(),
    }
}

fn observer_text(name: &str, l: &ObserverGain) -> String {
    let mut s = format!("[gain.{name}]\noutputs = {}\n", l.outputs.join(", "));
    for (i, row) in l.l.row_iter().enumerate() {
        let vals: Vec<String> = row.iter().map(|v| format!("{v:.12e}")).collect();
        s.push_str(&format!("row{i} = {}\n", vals.join(", ")));
    }
    let poles: Vec<String> = l.estimator.iter().map(|z| format!("{:.9e}{:+.9e}i", z.re, z.im)).collect();
    s.push_str(&format!("estimator = {}\n", poles.join(", ")));
    s
}
