//! Library side of the command-line front end: scenario runs, the
//! acceptance report and SVG plots. The binary only parses flags.

mod plot;
mod scenarios;
mod verify;

use std::path::{Path, PathBuf};

use rayon::prelude::*;

pub use plot::{plot_svg, PLOT_SAMPLES};
pub use scenarios::{
    feedback_design, find, names, prepare, registry, FeedbackDesign, COEFFICIENT_SECTION, ControllerSpec, MeasuredOutputs, PlantChoice, Prepared, Scenario, Start,
    Workbench, DEFAULT_ANGLE_OFFSET, DEFAULT_STEP_HEIGHT, RAISED_GV_MAX,
};
pub use verify::{verify, Check, Report};

use crate::design::DEFAULT_SEED;
use crate::error::{Result, SmibError};
use crate::ode::Method;
use crate::sim::{integrate, metrics, Metrics, SimOptions, Trajectory};

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    pub const USAGE: i32 = 1;
    pub const DESIGN: i32 = 2;
    pub const DIVERGED: i32 = 3;
    pub const VERIFY_FAILED: i32 = 4;
}

/// Exit code for an error escaping a run.
pub fn exit_code(e: &SmibError) -> i32 {
    match e {
        SmibError::DesignFailure(_) | SmibError::Unsupported(_) => exit::DESIGN,
        SmibError::Divergence { .. } | SmibError::SingularDecoupling { .. } | SmibError::NumericalFailure(_) => {
            exit::DIVERGED
        }
        _ => exit::USAGE,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunOptions {
    /// `None` keeps the adaptive default.
    pub fixed_step: Option<f64>,
    pub seed: u64,
    pub limits: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self { fixed_step: None, seed: DEFAULT_SEED, limits: true }
    }
}

impl RunOptions {
    fn method(&self) -> Method {
        match self.fixed_step {
            Some(dt) => Method::Rk4 { dt },
            None => Method::rk45_default(),
        }
    }
}

/// Everything a run produced, before it is written out.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub scenario: String,
    pub trajectory: Trajectory,
    pub metrics: Metrics,
    pub statespace: Option<String>,
    pub gains: Option<String>,
}

impl RunOutcome {
    pub fn diverged(&self) -> bool {
        self.trajectory.diverged()
    }
}

/// Design and simulate one scenario.
pub fn simulate(wb: &Workbench, sc: &Scenario, opts: &RunOptions) -> Result<RunOutcome> {
    let prepared = prepare(wb, sc, opts.seed)?;
    let mut sim = SimOptions::new(sc.horizon, sc.sample).with_method(opts.method());
    if let Some(dt) = opts.fixed_step {
        if dt > sc.sample {
            sim.sample = dt;
        }
    }
    if opts.limits && sc.actuator_limits {
        sim = sim.with_limits(prepared.limits);
    }
    let mut trajectory = integrate(prepared.plant.as_ref(), prepared.controller.as_ref(), &prepared.x0, &sim)?;
    trajectory.meta.operating_point = sc.operating_point.to_string();
    trajectory.meta.controller = sc.controller.name().to_string();
    let refs: Vec<(&str, f64)> = prepared.refs.iter().map(|(n, v)| (n.as_str(), *v)).collect();
    let metrics = match metrics(&trajectory, &refs) {
        Ok(m) => m,
        // a run that stopped early still gets its artifacts; report what
        // there is against the part of the horizon it covered
        Err(_) if trajectory.diverged() && trajectory.len() >= 2 => {
            let mut partial = trajectory.clone();
            partial.meta.horizon = partial.end_time();
            metrics(&partial, &refs)?
        }
        Err(e) => return Err(e),
    };
    Ok(RunOutcome {
        scenario: sc.name.clone(),
        trajectory,
        metrics,
        statespace: prepared.statespace.map(|s| s.to_csv()),
        gains: prepared.gains,
    })
}

/// Write `contents` to `path` through a temporary file in the same
/// directory and a rename.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    std::fs::create_dir_all(dir)?;
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("out");
    let tmp = dir.join(format!(".{name}.{}.tmp", std::process::id()));
    std::fs::write(&tmp, contents)?;
    std::fs::rename(&tmp, path).map_err(|e| {
        let _ = std::fs::remove_file(&tmp);
        SmibError::Io(format!("{}: {e}", path.display()))
    })
}

/// Write the artifacts of a run under `<out>/<scenario>/`.
pub fn write_outcome(out: &Path, outcome: &RunOutcome) -> Result<PathBuf> {
    let dir = out.join(&outcome.scenario);
    write_atomic(&dir.join("trajectory.csv"), &outcome.trajectory.to_csv())?;
    write_atomic(&dir.join("metrics.txt"), &outcome.metrics.to_text())?;
    if let Some(ss) = &outcome.statespace {
        write_atomic(&dir.join("statespace.csv"), ss)?;
    }
    if let Some(g) = &outcome.gains {
        write_atomic(&dir.join("gains.txt"), g)?;
    }
    Ok(dir)
}

/// Run one scenario by name and write its artifacts. Returns the exit code
/// the command should finish with.
pub fn run(wb: &Workbench, name: &str, out: &Path, opts: &RunOptions) -> Result<(RunOutcome, i32)> {
    let sc = find(name)?;
    let outcome = simulate(wb, &sc, opts)?;
    write_outcome(out, &outcome)?;
    let code = if outcome.diverged() { exit::DIVERGED } else { exit::OK };
    Ok((outcome, code))
}

/// Run every scenario in parallel. Each entry pairs a scenario name with its
/// exit code and a one-line status.
pub fn run_all(wb: &Workbench, out: &Path, opts: &RunOptions) -> Vec<(String, i32, String)> {
    registry()
        .par_iter()
        .map(|sc| match simulate(wb, sc, opts).and_then(|o| write_outcome(out, &o).map(|_| o)) {
            Ok(o) if o.diverged() => {
                (sc.name.clone(), exit::DIVERGED, o.trajectory.termination.clone().unwrap_or_default())
            }
            Ok(o) => {
                let vt = o.metrics.final_value("V_t").map(|v| format!("V_t final {v:.6}")).unwrap_or_default();
                (sc.name.clone(), exit::OK, vt)
            }
            Err(e) => (sc.name.clone(), exit_code(&e), e.to_string()),
        })
        .collect()
}
