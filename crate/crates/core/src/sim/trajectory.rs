//! Sampled simulation results and their CSV form.

use std::fmt::Write as _;

use crate::error::{Result, SmibError};

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrajectoryMeta {
    pub plant: String,
    pub controller: String,
    pub operating_point: String,
    pub integrator: String,
    /// Fixed step, 0 for adaptive runs.
    pub dt: f64,
    pub horizon: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub meta: TrajectoryMeta,
    pub state_labels: Vec<String>,
    pub input_labels: Vec<String>,
    pub output_labels: Vec<String>,
    pub t: Vec<f64>,
    pub x: Vec<Vec<f64>>,
    pub u: Vec<Vec<f64>>,
    pub y: Vec<Vec<f64>>,
    /// Why the run stopped before the horizon, if it did.
    pub termination: Option<String>,
}

impl Trajectory {
    /// Output labels that collide with a state or input label get a `_y`
    /// suffix so every CSV column is unique.
    pub fn new(meta: TrajectoryMeta, states: Vec<String>, inputs: Vec<String>, outputs: Vec<String>) -> Self {
        let outputs = outputs
            .into_iter()
            .map(|o| if states.contains(&o) || inputs.contains(&o) { format!("{o}_y") } else { o })
            .collect();
        Self {
            meta,
            state_labels: states,
            input_labels: inputs,
            output_labels: outputs,
            t: Vec::new(),
            x: Vec::new(),
            u: Vec::new(),
            y: Vec::new(),
            termination: None,
        }
    }

    pub fn push(&mut self, t: f64, x: Vec<f64>, u: Vec<f64>, y: Vec<f64>) {
        self.t.push(t);
        self.x.push(x);
        self.u.push(u);
        self.y.push(y);
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn end_time(&self) -> f64 {
        self.t.last().copied().unwrap_or(0.0)
    }

    pub fn diverged(&self) -> bool {
        self.termination.is_some()
    }

    pub fn channels(&self) -> Vec<String> {
        self.state_labels.iter().chain(&self.input_labels).chain(&self.output_labels).cloned().collect()
    }

    /// Samples of a named state, input or output column.
    pub fn channel(&self, name: &str) -> Option<Vec<f64>> {
        if let Some(i) = self.state_labels.iter().position(|l| l == name) {
            return Some(self.x.iter().map(|r| r[i]).collect());
        }
        if let Some(i) = self.input_labels.iter().position(|l| l == name) {
            return Some(self.u.iter().map(|r| r[i]).collect());
        }
        self.output_labels.iter().position(|l| l == name).map(|i| self.y.iter().map(|r| r[i]).collect())
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        let m = &self.meta;
        let _ = writeln!(s, "# plant={}", m.plant);
        let _ = writeln!(s, "# controller={}", m.controller);
        let _ = writeln!(s, "# operating_point={}", m.operating_point);
        let _ = writeln!(s, "# integrator={}", m.integrator);
        let _ = writeln!(s, "# dt={}", format_g(m.dt));
        let _ = writeln!(s, "# horizon={}", format_g(m.horizon));
        let _ = writeln!(s, "# inputs={}", self.input_labels.len());
        let _ = writeln!(s, "# outputs={}", self.output_labels.len());
        if let Some(reason) = &self.termination {
            let _ = writeln!(s, "# terminated={reason}");
        }
        let _ = writeln!(s, "t,{}", self.channels().join(","));
        for i in 0..self.len() {
            s.push_str(&format_g(self.t[i]));
            for v in self.x[i].iter().chain(&self.u[i]).chain(&self.y[i]) {
                s.push(',');
                s.push_str(&format_g(*v));
            }
            s.push('\n');
        }
        s
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let bad = |line: usize, reason: String| SmibError::Config { line, reason };
        let mut meta = TrajectoryMeta::default();
        let mut termination = None;
        let (mut n_in, mut n_out) = (None, None);
        let mut header: Option<Vec<String>> = None;
        let mut tr: Option<Trajectory> = None;
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('#') {
                let Some((k, v)) = rest.trim().split_once('=') else { continue };
                let v = v.trim().to_string();
                let num = |v: &str| v.parse::<f64>().map_err(|e| bad(line_no, format!("{k}: {e}")));
                let count = |v: &str| v.parse::<usize>().map_err(|e| bad(line_no, format!("{k}: {e}")));
                match k.trim() {
                    "plant" => meta.plant = v,
                    "controller" => meta.controller = v,
                    "operating_point" => meta.operating_point = v,
                    "integrator" => meta.integrator = v,
                    "dt" => meta.dt = num(&v)?,
                    "horizon" => meta.horizon = num(&v)?,
                    "inputs" => n_in = Some(count(&v)?),
                    "outputs" => n_out = Some(count(&v)?),
                    "terminated" => termination = Some(v),
                    _ => {}
                }
                continue;
            }
            if header.is_none() {
                let cols: Vec<String> = line.split(',').map(|c| c.trim().to_string()).collect();
                if cols.first().map(String::as_str) != Some("t") {
                    return Err(bad(line_no, "header must start with `t`".into()));
                }
                let (ni, no) = (n_in.unwrap_or(0), n_out.unwrap_or(0));
                let labels = &cols[1..];
                if ni + no > labels.len() {
                    return Err(bad(line_no, "header has fewer columns than declared".into()));
                }
                let ns = labels.len() - ni - no;
                let mut t = Trajectory::new(
                    meta.clone(),
                    labels[..ns].to_vec(),
                    labels[ns..ns + ni].to_vec(),
                    Vec::new(),
                );
                t.output_labels = labels[ns + ni..].to_vec();
                tr = Some(t);
                header = Some(cols);
                continue;
            }
            let t = tr.as_mut().expect("header parsed");
            let width = header.as_ref().map_or(0, Vec::len);
            let vals: Vec<f64> = line
                .split(',')
                .map(|c| c.trim().parse::<f64>().map_err(|e| bad(line_no, format!("bad number `{c}`: {e}"))))
                .collect::<Result<_>>()?;
            if vals.len() != width {
                return Err(bad(line_no, format!("expected {width} columns, found {}", vals.len())));
            }
            if let Some(last) = t.t.last() {
                if !(vals[0] > *last) {
                    return Err(bad(line_no, "time must increase strictly".into()));
                }
            }
            let ns = t.state_labels.len();
            let ni = t.input_labels.len();
            t.push(vals[0], vals[1..1 + ns].to_vec(), vals[1 + ns..1 + ns + ni].to_vec(), vals[1 + ns + ni..].to_vec());
        }
        let mut tr = tr.ok_or_else(|| bad(0, "no header row".into()))?;
        tr.meta = meta;
        tr.termination = termination;
        Ok(tr)
    }
}

/// `%.12g`-style formatting: twelve significant digits, trailing zeros
/// dropped, exponent form outside `1e-4 <= |v| < 1e12`.
pub fn format_g(v: f64) -> String {
    const DIGITS: i32 = 12;
    if v == 0.0 {
        return if v.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let sci = format!("{:.*e}", (DIGITS - 1) as usize, v);
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -4 || exp >= DIGITS {
        let m = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{m}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (DIGITS - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{v:.decimals$}")).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') { s.trim_end_matches('0').trim_end_matches('.') } else { s }
}
