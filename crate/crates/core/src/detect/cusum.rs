//! One-sided CUSUM: `g_t = max(0, g_{t-1} + x_t - k)`, alarm and reset when `g_t > h`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CusumConfig {
    pub drift: f64,
    pub threshold: f64,
}

impl CusumConfig {
    pub fn new(drift: f64, threshold: f64) -> Result<Self> {
        if !(drift >= 0.0) {
            return Err(Error::config(format!("CUSUM drift {drift} must be non-negative")));
        }
        if !(threshold >= 0.0) {
            return Err(Error::config(format!("CUSUM threshold {threshold} must be non-negative")));
        }
        Ok(Self { drift, threshold })
    }

    /// `k = 0.5 sigma`, `h = 2 sigma`.
    pub fn from_sigma(sigma: f64) -> Result<Self> {
        Self::new(0.5 * sigma, 2.0 * sigma)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CusumOutput {
    /// Statistic at each step before any reset.
    pub g: Vec<f64>,
    /// Per-step decision: an alarm fired at this step.
    pub decisions: Vec<bool>,
    pub alarm_times: Vec<usize>,
    /// Steps at which the statistic sat at zero.
    pub change_times: Vec<usize>,
    /// Steps between the last change time before an alarm and the alarm itself.
    pub interval_decisions: Vec<bool>,
}

pub fn cusum_detect(x: &[f64], cfg: &CusumConfig) -> CusumOutput {
    let CusumConfig { drift, threshold } = *cfg;
    let n = x.len();
    let mut out = CusumOutput {
        g: Vec::with_capacity(n),
        decisions: vec![false; n],
        alarm_times: Vec::new(),
        change_times: Vec::new(),
        interval_decisions: vec![false; n],
    };
    let mut g = 0.0;
    let mut segment_start = 0;
    for (t, &v) in x.iter().enumerate() {
        g = f64::max(0.0, g + v - drift);
        out.g.push(g);
        if g > threshold {
            out.decisions[t] = true;
            out.alarm_times.push(t);
            for d in &mut out.interval_decisions[segment_start..=t] {
                *d = true;
            }
            g = 0.0;
            segment_start = t + 1;
        } else if g == 0.0 {
            out.change_times.push(t);
            segment_start = t + 1;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn hand_recursion_without_alarm() {
        let out = cusum_detect(&[1.0, -2.0, 1.0], &CusumConfig::new(0.5, 2.0).unwrap());
        assert_eq!(out.g, vec![0.5, 0.0, 0.5]);
        assert!(out.alarm_times.is_empty());
        assert_eq!(out.change_times, vec![1]);
    }

    #[test]
    fn alarm_then_reset() {
        let out = cusum_detect(&[0.6, 0.6, 0.6], &CusumConfig::new(0.0, 1.0).unwrap());
        assert_eq!(out.g[0], 0.6);
        assert!((out.g[1] - 1.2).abs() < 1e-15);
        assert_eq!(out.alarm_times, vec![1]);
        assert_eq!(out.decisions, vec![false, true, false]);
        // restarted from zero after the alarm
        assert_eq!(out.g[2], 0.6);
        assert_eq!(out.interval_decisions, vec![true, true, false]);
    }

    #[test]
    fn zero_input_stays_zero() {
        let out = cusum_detect(&[0.0; 20], &CusumConfig::new(0.5, 2.0).unwrap());
        assert!(out.g.iter().all(|&g| g == 0.0));
        assert!(out.alarm_times.is_empty());
    }

    #[test]
    fn interval_starts_after_last_zero() {
        let out = cusum_detect(&[5.0, -9.0, 1.0, 1.0, 1.0], &CusumConfig::new(0.0, 2.5).unwrap());
        assert_eq!(out.alarm_times, vec![0, 4]);
        assert_eq!(out.interval_decisions, vec![true, false, true, true, true]);
    }

    #[test]
    fn sigma_defaults() {
        let c = CusumConfig::from_sigma(4.0).unwrap();
        assert_eq!((c.drift, c.threshold), (2.0, 8.0));
        assert!(CusumConfig::new(-1.0, 1.0).is_err());
        assert!(CusumConfig::new(0.0, -1.0).is_err());
    }

    proptest! {
        #[test]
        fn path_is_non_negative(x in proptest::collection::vec(-10.0f64..10.0, 1..200), k in 0.0f64..3.0, h in 0.1f64..20.0) {
            let out = cusum_detect(&x, &CusumConfig::new(k, h).unwrap());
            prop_assert!(out.g.iter().all(|&g| g >= 0.0));
            // from a zero state, an input at or below the drift keeps it at zero
            for t in 1..x.len() {
                let prev_state = if out.decisions[t - 1] { 0.0 } else { out.g[t - 1] };
                if prev_state == 0.0 && x[t] <= k {
                    prop_assert_eq!(out.g[t], 0.0);
                }
            }
        }
    }
}
