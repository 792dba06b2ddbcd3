//! Windowed GLRT for a positive mean shift in Gaussian residuals.
//!
//! For a constant unknown shift the log likelihood ratio reduces to the window
//! mean, compared against `sqrt(sigma^2 / n) * Qinv(p_fa)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats::inverse_q;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GlrtConfig {
    pub window: usize,
    pub p_fa: f64,
    pub sigma: f64,
}

impl GlrtConfig {
    pub fn new(window: usize, p_fa: f64, sigma: f64) -> Result<Self> {
        if window == 0 {
            return Err(Error::config("GLRT window must be at least 1"));
        }
        if !(p_fa > 0.0 && p_fa < 1.0) {
            return Err(Error::config(format!("false-alarm probability {p_fa} outside (0, 1)")));
        }
        if !(sigma > 0.0) {
            return Err(Error::config(format!("sigma {sigma} must be positive")));
        }
        Ok(Self { window, p_fa, sigma })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GlrtStep {
    /// Mean of the residuals in the window ending here.
    pub score: f64,
    pub threshold: f64,
    pub alarm: bool,
}

/// Threshold on the window mean for `n` samples.
pub fn glrt_threshold(sigma: f64, n: usize, p_fa: f64) -> f64 {
    (sigma * sigma / n as f64).sqrt() * inverse_q(p_fa)
}

/// Scores every step; the first `window - 1` steps use the shorter prefix.
pub fn glrt_detect(x: &[f64], cfg: &GlrtConfig) -> Vec<GlrtStep> {
    let GlrtConfig { window, p_fa, sigma } = *cfg;
    (0..x.len())
        .map(|t| {
            let n = (t + 1).min(window);
            let score = x[t + 1 - n..=t].iter().sum::<f64>() / n as f64;
            let threshold = glrt_threshold(sigma, n, p_fa);
            GlrtStep {
                score,
                threshold,
                alarm: score > threshold,
            }
        })
        .collect()
}
