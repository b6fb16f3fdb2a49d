//! Summary figures of a trajectory.

use std::fmt::Write as _;

use super::trajectory::{format_g, Trajectory};
use crate::error::{Result, SmibError};

/// Fraction of the horizon a run must cover before metrics are meaningful.
pub const MIN_COMPLETION: f64 = 0.8;
const TAIL_FRACTION: f64 = 0.05;
const SETTLING_BAND: f64 = 0.02;
const DECAY_WINDOWS: usize = 5;

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelMetrics {
    pub name: String,
    pub final_value: f64,
    pub reference: Option<f64>,
    pub steady_state_error: Option<f64>,
    /// `None` when the channel never stays inside its band.
    pub settling_time: Option<f64>,
    /// Largest distance from the final value.
    pub peak_deviation: f64,
    /// Peak distance from the final value shrinks window by window.
    pub decaying: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Metrics {
    pub horizon: f64,
    pub end_time: f64,
    pub terminated: Option<String>,
    pub channels: Vec<ChannelMetrics>,
}

impl Metrics {
    pub fn channel(&self, name: &str) -> Option<&ChannelMetrics> {
        self.channels.iter().find(|c| c.name == name)
    }

    pub fn final_value(&self, name: &str) -> Option<f64> {
        self.channel(name).map(|c| c.final_value)
    }

    /// `key=value` lines, one block per channel.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "horizon={}", format_g(self.horizon));
        let _ = writeln!(s, "end_time={}", format_g(self.end_time));
        let _ = writeln!(s, "completed={}", self.terminated.is_none());
        if let Some(r) = &self.terminated {
            let _ = writeln!(s, "terminated={r}");
        }
        for c in &self.channels {
            let n = &c.name;
            let _ = writeln!(s, "{n}.final={}", format_g(c.final_value));
            if let (Some(r), Some(e)) = (c.reference, c.steady_state_error) {
                let _ = writeln!(s, "{n}.reference={}", format_g(r));
                let _ = writeln!(s, "{n}.steady_state_error={}", format_g(e));
            }
            match c.settling_time {
                Some(ts) => {
                    let _ = writeln!(s, "{n}.settling_time={}", format_g(ts));
                }
                None => {
                    let _ = writeln!(s, "{n}.settling_time=unsettled");
                }
            }
            let _ = writeln!(s, "{n}.peak_deviation={}", format_g(c.peak_deviation));
            let _ = writeln!(s, "{n}.decaying={}", c.decaying);
        }
        s
    }
}

/// Metrics for every channel of `tr`. `refs` pairs channel names with the
/// values they should reach.
///
/// The settling band is 2% of the final value's magnitude; for channels that
/// end near zero it falls back to 2% of the peak deviation.
pub fn metrics(tr: &Trajectory, refs: &[(&str, f64)]) -> Result<Metrics> {
    let horizon = tr.meta.horizon;
    let end = tr.end_time();
    if tr.len() < 2 || !(horizon > 0.0) || end < MIN_COMPLETION * horizon {
        return Err(SmibError::InvalidArgument(format!(
            "trajectory covers {end} of a {horizon} horizon; metrics need at least {:.0}%",
            MIN_COMPLETION * 100.0
        )));
    }
    let names = tr.channels();
    if let Some((unknown, _)) = refs.iter().find(|(n, _)| !names.iter().any(|c| c == n)) {
        return Err(SmibError::InvalidArgument(format!("no channel named `{unknown}`")));
    }
    let channels = names
        .iter()
        .map(|name| {
            let samples = tr.channel(name).expect("listed channel");
            let reference = refs.iter().find(|(n, _)| n == name).map(|(_, r)| *r);
            channel_metrics(name, &tr.t, &samples, reference)
        })
        .collect();
    Ok(Metrics { horizon, end_time: end, terminated: tr.termination.clone(), channels })
}

fn channel_metrics(name: &str, t: &[f64], v: &[f64], reference: Option<f64>) -> ChannelMetrics {
    let tail = ((v.len() as f64 * TAIL_FRACTION).ceil() as usize).clamp(1, v.len());
    let final_value = v[v.len() - tail..].iter().sum::<f64>() / tail as f64;
    let dist: Vec<f64> = v.iter().map(|x| (x - final_value).abs()).collect();
    let peak_deviation = dist.iter().cloned().fold(0.0, f64::max);

    let scale = if final_value.abs() > 1e-9 { final_value.abs() } else { peak_deviation };
    let band = SETTLING_BAND * scale;
    let settling_time = match dist.iter().rposition(|d| *d > band) {
        None => Some(t[0]),
        Some(i) if i + 1 < t.len() => Some(t[i + 1]),
        Some(_) => None,
    };

    ChannelMetrics {
        name: name.to_string(),
        final_value,
        reference,
        steady_state_error: reference.map(|r| (final_value - r).abs()),
        settling_time,
        peak_deviation,
        decaying: decaying(&dist),
    }
}

fn decaying(dist: &[f64]) -> bool {
    if dist.len() < DECAY_WINDOWS {
        return false;
    }
    let width = dist.len() / DECAY_WINDOWS;
    let peaks: Vec<f64> = (0..DECAY_WINDOWS)
        .map(|w| {
            let hi = if w + 1 == DECAY_WINDOWS { dist.len() } else { (w + 1) * width };
            dist[w * width..hi].iter().cloned().fold(0.0, f64::max)
        })
        .collect();
    let floor = 1e-12 * (1.0 + peaks[0]);
    peaks.windows(2).all(|p| p[1] < p[0] || p[1] <= floor)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::TrajectoryMeta;

    fn single(values: impl Fn(f64) -> f64, horizon: f64, n: usize) -> Trajectory {
        let meta = TrajectoryMeta { horizon, ..Default::default() };
        let mut tr = Trajectory::new(meta, vec!["x".into()], vec![], vec![]);
        for k in 0..=n {
            let t = horizon * k as f64 / n as f64;
            tr.push(t, vec![values(t)], vec![], vec![]);
        }
        tr
    }

    #[test]
    fn constant_settles_immediately() {
        let tr = single(|_| 2.0, 10.0, 100);
        let m = metrics(&tr, &[("x", 1.5)]).unwrap();
        let c = m.channel("x").unwrap();
        assert_eq!(c.settling_time, Some(0.0));
        assert!((c.steady_state_error.unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(c.peak_deviation, 0.0);
    }

    #[test]
    fn first_order_settling_near_four_time_constants() {
        let tr = single(|t| 1.0 - (-t).exp(), 20.0, 20_000);
        let c = metrics(&tr, &[]).unwrap().channels.remove(0);
        // 2% band: exp(-t) = 0.02 at t = ln 50
        assert!((c.settling_time.unwrap() - 50f64.ln()).abs() < 1e-2);
        assert!(c.decaying);
    }

    #[test]
    fn growing_oscillation_is_not_decaying() {
        let tr = single(|t| (0.1 * t).exp() * t.sin(), 50.0, 5000);
        let c = metrics(&tr, &[]).unwrap().channels.remove(0);
        assert!(!c.decaying);
        assert_eq!(c.settling_time, None);
    }

    #[test]
    fn short_runs_are_refused() {
        let mut tr = single(|_| 0.0, 10.0, 10);
        tr.meta.horizon = 20.0;
        assert!(metrics(&tr, &[]).is_err());
        let tr = single(|_| 0.0, 10.0, 10);
        assert!(metrics(&tr, &[("nope", 0.0)]).is_err());
    }
}
