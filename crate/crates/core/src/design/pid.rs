//! PID compensators and root loci.

use crate::error::{Result, SmibError};
use crate::numlin::{poly_add, poly_scale, polynomial_roots, C64};
use crate::tf::TransferFunction;

/// Derivative filter corner (rad/s) used by simulated PID realizations.
pub const DERIVATIVE_FILTER: f64 = 100.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LoopTag {
    /// Load-frequency control: valve command from speed error.
    Lfc,
    /// Automatic voltage regulator: field voltage from voltage error.
    Avr,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PidGains {
    pub kp: f64,
    pub ki: f64,
    pub kd: f64,
    pub tag: LoopTag,
}

impl PidGains {
    pub fn new(kp: f64, ki: f64, kd: f64, tag: LoopTag) -> Self {
        Self { kp, ki, kd, tag }
    }
}

/// Two-state realization `Kp e + Ki z0 + Kd N (e - z1)` with
/// `z0' = e` and `z1' = N (e - z1)`, i.e. `Kp + Ki/s + Kd s / (1 + s/N)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PidRealization {
    pub gains: PidGains,
    pub filter: f64,
}

impl PidRealization {
    pub const STATES: usize = 2;

    pub fn output(&self, z: &[f64], e: f64) -> f64 {
        let g = &self.gains;
        g.kp * e + g.ki * z[0] + g.kd * self.filter * (e - z[1])
    }

    pub fn rates(&self, z: &[f64], e: f64, dz: &mut [f64]) {
        dz[0] = e;
        dz[1] = self.filter * (e - z[1]);
    }

    /// Initial state for a given error, with the integrator preloaded and the
    /// derivative filter at rest.
    pub fn initial_state(&self, e0: f64, integral: f64) -> [f64; 2] {
        [integral, e0]
    }

    /// Transfer function of the filtered realization.
    pub fn transfer_function(&self) -> TransferFunction {
        let g = &self.gains;
        let n = self.filter;
        // (Kp + Kd N) s^2 + (Kp N + Ki) s + Ki N over s (s + N)
        TransferFunction::new(&[g.kp + g.kd * n, g.kp * n + g.ki, g.ki * n], &[1.0, n, 0.0])
            .expect("monic denominator")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PidController {
    pub gains: PidGains,
    /// `(Kd s^2 + Kp s + Ki) / s`, improper when `Kd != 0`.
    pub ideal: TransferFunction,
    pub realization: PidRealization,
}

pub fn pid_controller(g: PidGains) -> Result<PidController> {
    if ![g.kp, g.ki, g.kd].iter().all(|v| v.is_finite()) {
        return Err(SmibError::InvalidArgument("PID gains must be finite".into()));
    }
    let ideal = if g.ki == 0.0 && g.kd == 0.0 {
        TransferFunction::gain(g.kp)
    } else {
        TransferFunction::new(&[g.kd, g.kp, g.ki], &[1.0, 0.0])?
    };
    Ok(PidController { gains: g, ideal, realization: PidRealization { gains: g, filter: DERIVATIVE_FILTER } })
}

/// Closed-loop roots of `den + k num` for each gain, with branches kept in
/// a consistent order by nearest-neighbour matching between gains.
pub fn root_locus(open_loop: &TransferFunction, gains: &[f64]) -> Result<Vec<Vec<C64>>> {
    if !open_loop.is_proper() {
        return Err(SmibError::InvalidArgument("root locus of an improper transfer function".into()));
    }
    if open_loop.order() == 0 {
        return Err(SmibError::InvalidArgument("root locus of a static gain has no branches".into()));
    }
    let mut last = 0.0;
    for k in gains {
        if !(k.is_finite() && *k > 0.0 && *k >= last) {
            return Err(SmibError::InvalidArgument("root-locus gains must be positive and ascending".into()));
        }
        last = *k;
    }
    let mut out: Vec<Vec<C64>> = Vec::with_capacity(gains.len());
    for k in gains {
        let char_poly = poly_add(&open_loop.den, &poly_scale(&open_loop.num, *k));
        let roots = polynomial_roots(&char_poly)?.0;
        let ordered = match out.last() {
            None => roots,
            Some(prev) => match_branches(prev, roots),
        };
        out.push(ordered);
    }
    Ok(out)
}

fn match_branches(prev: &[C64], mut roots: Vec<C64>) -> Vec<C64> {
    let mut ordered = Vec::with_capacity(prev.len());
    for p in prev {
        let (idx, _) = roots
            .iter()
            .enumerate()
            .map(|(i, r)| (i, (r - p).norm()))
            .min_by(|x, y| x.1.total_cmp(&y.1))
            .expect("same number of roots");
        ordered.push(roots.swap_remove(idx));
    }
    ordered
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn proportional_only_is_a_gain() {
        let c = pid_controller(PidGains::new(3.0, 0.0, 0.0, LoopTag::Avr)).unwrap();
        assert_eq!(c.ideal, TransferFunction::gain(3.0));
    }

    #[test]
    fn ideal_form() {
        let c = pid_controller(PidGains::new(10.0, 10.0, 4.0, LoopTag::Avr)).unwrap();
        assert_eq!(c.ideal.num, vec![4.0, 10.0, 10.0]);
        assert_eq!(c.ideal.den, vec![1.0, 0.0]);
        assert!(!c.ideal.is_proper());
    }

    #[test]
    fn filtered_realization_matches_its_transfer_function() {
        let c = pid_controller(PidGains::new(2.0, 3.0, 0.5, LoopTag::Lfc)).unwrap();
        let r = c.realization;
        // frequency response of the state-space form at s = j w
        let w = 7.0;
        let s = C64::new(0.0, w);
        let want = r.transfer_function().eval(s);
        let got = C64::new(2.0, 0.0) + 3.0 / s + 0.5 * r.filter * s / (s + r.filter);
        assert!((want - got).norm() < 1e-12);
    }

    #[test]
    fn locus_starts_at_open_loop_poles() {
        let g = TransferFunction::new(&[1.0, 2.0], &[1.0, 4.0, 3.0, 0.0]).unwrap();
        let loci = root_locus(&g, &[1e-6, 1.0]).unwrap();
        let poles = g.poles().unwrap();
        assert!(poles.distance(&loci[0]) < 1e-3);
        assert_eq!(loci[1].len(), 3);
    }

    #[test]
    fn improper_locus_is_rejected() {
        let g = TransferFunction::new(&[1.0, 0.0, 0.0], &[1.0, 1.0]).unwrap();
        assert!(root_locus(&g, &[1.0]).is_err());
    }
}
