//! SISO transfer functions with real polynomial numerator and denominator.

use std::fmt;

use crate::error::{Result, SmibError};
use crate::linearize::StateSpaceModel;
use crate::numlin::{Matrix, poly_add, poly_eval, poly_eval_complex, poly_mul, poly_scale, poly_trim, polynomial_roots, Spectrum, C64};

/// `num(s) / den(s)`, coefficients in descending powers, denominator monic.
#[derive(Debug, Clone, PartialEq)]
pub struct TransferFunction {
    pub num: Vec<f64>,
    pub den: Vec<f64>,
}

impl TransferFunction {
    pub fn new(num: &[f64], den: &[f64]) -> Result<Self> {
        let den = poly_trim(den);
        let lead = den[0];
        if lead == 0.0 {
            return Err(SmibError::InvalidArgument("transfer function denominator is zero".into()));
        }
        if num.iter().chain(&den).any(|c| !c.is_finite()) {
            return Err(SmibError::InvalidArgument("transfer function has non-finite coefficients".into()));
        }
        Ok(Self { num: poly_scale(&poly_trim(num), 1.0 / lead), den: poly_scale(&den, 1.0 / lead) })
    }

    pub fn gain(k: f64) -> Self {
        Self { num: vec![k], den: vec![1.0] }
    }

    /// `1/s`
    pub fn integrator() -> Self {
        Self { num: vec![1.0], den: vec![1.0, 0.0] }
    }

    pub fn order(&self) -> usize {
        self.den.len() - 1
    }

    pub fn is_proper(&self) -> bool {
        self.num.len() <= self.den.len()
    }

    pub fn eval(&self, s: C64) -> C64 {
        poly_eval_complex(&self.num, s) / poly_eval_complex(&self.den, s)
    }

    pub fn poles(&self) -> Result<Spectrum> {
        polynomial_roots(&self.den)
    }

    pub fn zeros(&self) -> Result<Spectrum> {
        if self.num.iter().all(|c| *c == 0.0) || self.num.len() == 1 {
            return Ok(Spectrum(Vec::new()));
        }
        polynomial_roots(&self.num)
    }

    /// Cascade `self * other`.
    pub fn series(&self, other: &Self) -> Self {
        Self::new(&poly_mul(&self.num, &other.num), &poly_mul(&self.den, &other.den)).expect("monic product")
    }

    pub fn parallel(&self, other: &Self) -> Self {
        let num = poly_add(&poly_mul(&self.num, &other.den), &poly_mul(&other.num, &self.den));
        Self::new(&num, &poly_mul(&self.den, &other.den)).expect("monic product")
    }

    /// Negative feedback `G / (1 + G H)` with `self = G`.
    pub fn feedback(&self, h: &Self) -> Result<Self> {
        let num = poly_mul(&self.num, &h.den);
        let den = poly_add(&poly_mul(&self.den, &h.den), &poly_mul(&self.num, &h.num));
        Self::new(&num, &den)
    }

    pub fn scale(&self, k: f64) -> Self {
        Self { num: poly_scale(&self.num, k), den: self.den.clone() }
    }

    /// Value at `s = 0`; `None` when the denominator vanishes there.
    pub fn dc_gain(&self) -> Option<f64> {
        let d = poly_eval(&self.den, 0.0);
        if d == 0.0 {
            let n = poly_eval(&self.num, 0.0);
            return if n == 0.0 { self.cancel_origin().and_then(|t| t.dc_gain()) } else { None };
        }
        Some(poly_eval(&self.num, 0.0) / d)
    }

    /// Remove one common factor of `s`, if present.
    pub fn cancel_origin(&self) -> Option<Self> {
        let n = self.num.len();
        let d = self.den.len();
        if n > 1 && d > 1 && self.num[n - 1] == 0.0 && self.den[d - 1] == 0.0 {
            Some(Self { num: self.num[..n - 1].to_vec(), den: self.den[..d - 1].to_vec() })
        } else {
            None
        }
    }

    /// Controllable canonical realisation, after cancelling common factors
    /// of `s`. States run from the lowest derivative upward.
    pub fn to_state_space(&self) -> Result<StateSpaceModel> {
        if !self.is_proper() {
            return Err(SmibError::Unsupported("improper transfer function has no state-space form".into()));
        }
        let mut g = self.clone();
        while let Some(c) = g.cancel_origin() {
            g = c;
        }
        let n = g.order();
        let mut num = vec![0.0; n + 1 - g.num.len()];
        num.extend(&g.num);
        let feedthrough = num[0];
        let mut a = Matrix::zeros(n, n);
        for i in 0..n.saturating_sub(1) {
            a[(i, i + 1)] = 1.0;
        }
        let mut c = Matrix::zeros(1, n);
        for j in 0..n {
            // den = s^n + den[1] s^(n-1) + ... + den[n]
            a[(n - 1, j)] = -g.den[n - j];
            c[(0, j)] = num[n - j] - feedthrough * g.den[n - j];
        }
        let mut b = Matrix::zeros(n, 1);
        if n > 0 {
            b[(n - 1, 0)] = 1.0;
        }
        StateSpaceModel::new(a, b, c, Matrix::from_element(1, 1, feedthrough))
    }

    /// Steady-state response to a unit step by the final value theorem.
    pub fn step_final_value(&self) -> Result<f64> {
        final_value(self)
    }
}

/// `lim s->0 s * TF(s) * (1/s)` for a unit step, after checking that the
/// limit exists (all poles of the reduced function strictly stable).
pub fn final_value(tf: &TransferFunction) -> Result<f64> {
    let mut g = tf.clone();
    while let Some(c) = g.cancel_origin() {
        g = c;
    }
    let poles = g.poles()?;
    let scale = g.den.iter().fold(0.0f64, |m, c| m.max(c.abs()));
    for p in poles.iter() {
        if p.re >= -1e-12 * (1.0 + scale) {
            return Err(SmibError::FinalValueUndefined(format!(
                "pole at {:.6}{:+.6}i is not strictly stable",
                p.re, p.im
            )));
        }
    }
    Ok(poly_eval(&g.num, 0.0) / poly_eval(&g.den, 0.0))
}

impl fmt::Display for TransferFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}) / ({})", format_poly(&self.num), format_poly(&self.den))
    }
}

fn format_poly(p: &[f64]) -> String {
    let deg = p.len() - 1;
    let terms: Vec<String> = p
        .iter()
        .enumerate()
        .filter(|(_, c)| **c != 0.0)
        .map(|(i, c)| match deg - i {
            0 => format!("{c:.6}"),
            1 => format!("{c:.6} s"),
            k => format!("{c:.6} s^{k}"),
        })
        .collect();
    if terms.is_empty() { "0".into() } else { terms.join(" + ") }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalises_denominator() {
        let g = TransferFunction::new(&[2.0], &[2.0, 4.0]).unwrap();
        assert_eq!(g.num, vec![1.0]);
        assert_eq!(g.den, vec![1.0, 2.0]);
    }

    #[test]
    fn unity_feedback_dc() {
        let g = TransferFunction::new(&[3.0], &[1.0, 1.0]).unwrap();
        let cl = g.feedback(&TransferFunction::gain(1.0)).unwrap();
        assert!((cl.dc_gain().unwrap() - 0.75).abs() < 1e-15);
        assert!((final_value(&cl).unwrap() - 0.75).abs() < 1e-15);
    }

    #[test]
    fn unstable_final_value_is_undefined() {
        let g = TransferFunction::new(&[1.0], &[1.0, -1.0]).unwrap();
        assert!(matches!(final_value(&g), Err(SmibError::FinalValueUndefined(_))));
        assert!(final_value(&TransferFunction::integrator()).is_err());
    }

    #[test]
    fn realisation_matches_poles_and_dc() {
        use crate::numlin::eigenvalues;
        let g = TransferFunction::new(&[2.0, 1.0, 0.0], &[1.0, 4.0, 3.0, 0.0]).unwrap();
        let ss = g.to_state_space().unwrap();
        assert_eq!(ss.states(), 2);
        let mut re: Vec<f64> = eigenvalues(&ss.a).unwrap().iter().map(|p| p.re).collect();
        re.sort_by(f64::total_cmp);
        assert!((re[0] + 3.0).abs() < 1e-12 && (re[1] + 1.0).abs() < 1e-12);
        // dc gain -C A^-1 B + D = 1/3
        let dc = -(&ss.c * crate::numlin::inverse(&ss.a).unwrap() * &ss.b)[(0, 0)] + ss.d[(0, 0)];
        assert!((dc - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn biproper_realisation_keeps_feedthrough() {
        let g = TransferFunction::new(&[3.0, 1.0], &[1.0, 2.0]).unwrap();
        let ss = g.to_state_space().unwrap();
        assert_eq!(ss.d[(0, 0)], 3.0);
        assert_eq!(ss.c[(0, 0)], 1.0 - 6.0);
    }

    #[test]
    fn origin_zero_cancels() {
        let g = TransferFunction::new(&[1.0, 0.0], &[1.0, 3.0, 0.0]).unwrap();
        assert!((final_value(&g).unwrap() - 1.0 / 3.0).abs() < 1e-15);
    }
}
