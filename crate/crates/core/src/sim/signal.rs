//! Staircase test inputs.

use crate::error::{Result, SmibError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SignalTag {
    Gamma1,
    Gamma2,
    Custom,
}

/// Piecewise-constant signal: each step adds its height from its start time
/// onwards.
#[derive(Debug, Clone, PartialEq)]
pub struct TestSignal {
    pub times: Vec<f64>,
    pub heights: Vec<f64>,
    pub tag: SignalTag,
}

pub const STEP_TIMES: [f64; 4] = [0.0, 200.0, 400.0, 600.0];

impl TestSignal {
    pub fn custom(times: Vec<f64>, heights: Vec<f64>) -> Result<Self> {
        if times.len() != heights.len() || times.is_empty() {
            return Err(SmibError::InvalidArgument("step times and heights must pair up".into()));
        }
        if times[0] != 0.0 || times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(SmibError::InvalidArgument("step times must start at 0 and increase strictly".into()));
        }
        if heights.iter().any(|h| !h.is_finite()) {
            return Err(SmibError::InvalidArgument("step heights must be finite".into()));
        }
        Ok(Self { times, heights, tag: SignalTag::Custom })
    }

    pub fn value(&self, t: f64) -> f64 {
        self.times.iter().zip(&self.heights).filter(|(s, _)| t >= **s).map(|(_, h)| h).sum()
    }

    pub fn scaled(&self, k: f64) -> Self {
        Self { times: self.times.clone(), heights: self.heights.iter().map(|h| h * k).collect(), tag: SignalTag::Custom }
    }
}

/// Four equal steps at 0, 200, 400 and 600 s; the second signal uses half
/// the step height of the first.
pub fn staircase(tag: SignalTag, height: f64) -> TestSignal {
    let h = match tag {
        SignalTag::Gamma2 => height / 2.0,
        _ => height,
    };
    TestSignal { times: STEP_TIMES.to_vec(), heights: vec![h; 4], tag }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn three_steps_by_500_s() {
        let g = staircase(SignalTag::Gamma1, 0.05);
        assert!((g.value(500.0) - 0.15).abs() < 1e-15);
        assert_eq!(g.value(-1.0), 0.0);
        assert!((g.value(1e4) - 0.2).abs() < 1e-15);
    }

    #[test]
    fn unordered_steps_are_rejected() {
        assert!(TestSignal::custom(vec![0.0, 5.0, 5.0], vec![1.0; 3]).is_err());
        assert!(TestSignal::custom(vec![1.0], vec![1.0]).is_err());
    }
}
