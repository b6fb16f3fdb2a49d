//! Minimal SVG line plots of trajectory channels.

use std::fmt::Write as _;

use crate::error::{Result, SmibError};
use crate::sim::{format_g, Trajectory};

/// Samples kept per plotted line.
pub const PLOT_SAMPLES: usize = 1200;
const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 500.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;

/// One SVG per channel, in request order. An empty request plots every
/// channel.
pub fn plot_svg(tr: &Trajectory, channels: &[String]) -> Result<Vec<(String, String)>> {
    let all = tr.channels();
    let wanted: Vec<String> = if channels.is_empty() { all.clone() } else { channels.to_vec() };
    if let Some(bad) = wanted.iter().find(|c| !all.contains(c)) {
        return Err(SmibError::InvalidArgument(format!("unknown channel `{bad}`; channels: {}", all.join(", "))));
    }
    if tr.is_empty() {
        return Err(SmibError::InvalidArgument("trajectory has no samples".into()));
    }
    Ok(wanted
        .into_iter()
        .map(|name| {
            let values = tr.channel(&name).expect("checked channel");
            let svg = render(&name, &tr.t, &values);
            (name, svg)
        })
        .collect())
}

/// Evenly strided indices, always keeping the last sample.
fn decimate(n: usize) -> Vec<usize> {
    if n <= PLOT_SAMPLES {
        return (0..n).collect();
    }
    let mut idx: Vec<usize> = (0..PLOT_SAMPLES - 1).map(|k| k * (n - 1) / (PLOT_SAMPLES - 1)).collect();
    idx.push(n - 1);
    idx
}

fn bounds(v: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = v.filter(|x| x.is_finite()).fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(x), b.max(x)));
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo <= 1e-12 * (1.0 + lo.abs()) {
        let pad = 0.5 * (1e-6f64).max(lo.abs() * 1e-3);
        return (lo - pad, hi + pad);
    }
    let pad = 0.05 * (hi - lo);
    (lo - pad, hi + pad)
}

fn render(name: &str, t: &[f64], v: &[f64]) -> String {
    let idx = decimate(t.len());
    let (t0, t1) = (t[0], t[t.len() - 1].max(t[0] + 1e-12));
    let (y0, y1) = bounds(idx.iter().map(|&i| v[i]));
    let pw = WIDTH - LEFT - RIGHT;
    let ph = HEIGHT - TOP - BOTTOM;
    let sx = |x: f64| LEFT + (x - t0) / (t1 - t0) * pw;
    let sy = |y: f64| TOP + (y1 - y) / (y1 - y0) * ph;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {WIDTH} {HEIGHT}" width="{WIDTH}" height="{HEIGHT}">"#
    );
    let _ = writeln!(s, r#"<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r##"<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="#444" stroke-width="1"/>"##
    );
    for k in 0..=4 {
        let f = k as f64 / 4.0;
        let (tx, yv) = (t0 + f * (t1 - t0), y0 + f * (y1 - y0));
        let (px, py) = (sx(tx), sy(yv));
        let _ = writeln!(
            s,
            r##"<line x1="{px:.2}" y1="{TOP}" x2="{px:.2}" y2="{:.2}" stroke="#ddd"/><text x="{px:.2}" y="{:.2}" font-size="12" text-anchor="middle">{}</text>"##,
            TOP + ph,
            TOP + ph + 18.0,
            tick(tx)
        );
        let _ = writeln!(
            s,
            r##"<line x1="{LEFT}" y1="{py:.2}" x2="{:.2}" y2="{py:.2}" stroke="#ddd"/><text x="{:.2}" y="{:.2}" font-size="12" text-anchor="end">{}</text>"##,
            LEFT + pw,
            LEFT - 6.0,
            py + 4.0,
            tick(yv)
        );
    }
    let points: Vec<String> = idx
        .iter()
        .filter(|&&i| v[i].is_finite())
        .map(|&i| format!("{:.3},{:.3}", sx(t[i]), sy(v[i])))
        .collect();
    let _ = writeln!(
        s,
        r##"<polyline fill="none" stroke="#1f5fa8" stroke-width="1.5" points="{}"/>"##,
        points.join(" ")
    );
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="{:.1}" font-size="14" text-anchor="middle">time (s)</text>"#,
        LEFT + pw / 2.0,
        HEIGHT - 15.0
    );
    let _ = writeln!(
        s,
        r#"<text x="18" y="{:.1}" font-size="14" text-anchor="middle" transform="rotate(-90 18 {:.1})">{}</text>"#,
        TOP + ph / 2.0,
        TOP + ph / 2.0,
        escape(name)
    );
    let last = v[*idx.last().expect("non-empty")];
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="24" font-size="15" text-anchor="middle">{} (final {})</text>"#,
        WIDTH / 2.0,
        escape(name),
        format_g(last)
    );
    s.push_str("</svg>\n");
    s
}

fn tick(v: f64) -> String {
    let r = if v.abs() < 1e-12 { 0.0 } else { v };
    format!("{}", (r * 1e6).round() / 1e6)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::TrajectoryMeta;

    fn ramp(n: usize) -> Trajectory {
        let mut tr = Trajectory::new(TrajectoryMeta::default(), vec!["x".into()], vec!["u".into()], vec![]);
        for k in 0..n {
            tr.push(k as f64, vec![k as f64 * 0.5], vec![1.0], vec![]);
        }
        tr
    }

    #[test]
    fn decimation_keeps_endpoints() {
        let idx = decimate(5000);
        assert_eq!(idx.len(), PLOT_SAMPLES);
        assert_eq!(idx[0], 0);
        assert_eq!(*idx.last().unwrap(), 4999);
        assert_eq!(decimate(10).len(), 10);
    }

    #[test]
    fn empty_request_plots_everything_deterministically() {
        let tr = ramp(3000);
        let a = plot_svg(&tr, &[]).unwrap();
        let b = plot_svg(&tr, &[]).unwrap();
        assert_eq!(a.iter().map(|p| p.0.as_str()).collect::<Vec<_>>(), vec!["x", "u"]);
        assert_eq!(a, b);
        assert!(a[0].1.contains("viewBox=\"0 0 800 500\""));
        assert!(a[0].1.contains("final 1499.5"));
    }

    #[test]
    fn unknown_channel_lists_names() {
        let err = plot_svg(&ramp(3), &["nope".into()]).unwrap_err().to_string();
        assert!(err.contains("x, u"), "{err}");
    }
}
