//! Seeded stand-in for minute-resolution smart-meter data.
//!
//! Each template home gets its own daily shape (overnight base, a morning and
//! an evening peak at home-specific hours) scaled by day-level and hour-level
//! lognormal factors, with minute jitter and short appliance bursts on top.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, LogNormal, Normal};

use super::{LoadSeries, Sample, TemplateHome};
use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyntheticProfile {
    /// Long-run mean energy per hour, kWh.
    pub mean_kwh: f64,
    /// Spread of the per-day scale factor (log-space std).
    pub day_sigma: f64,
    /// Spread of the per-hour scale factor (log-space std).
    pub hour_sigma: f64,
    /// Relative std of minute-to-minute jitter.
    pub minute_jitter: f64,
    /// Expected appliance bursts per day.
    pub bursts_per_day: f64,
}

impl Default for SyntheticProfile {
    fn default() -> Self {
        // 200 homes at 1.66 kWh/h aggregate to roughly 332 kWh.
        Self {
            mean_kwh: 1.66,
            day_sigma: 0.12,
            hour_sigma: 0.25,
            minute_jitter: 0.1,
            bursts_per_day: 4.0,
        }
    }
}

const BURST_KW: (f64, f64) = (1.0, 3.0);
const BURST_MINUTES: (u64, u64) = (10, 45);

/// `count` template homes of `days` days each, deterministic in `seed`.
/// Home `k` draws from its own ChaCha stream `k`.
pub fn synthetic_templates(count: usize, days: usize, seed: u64, profile: &SyntheticProfile) -> Vec<TemplateHome> {
    (0..count)
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(k as u64);
            generate_home(format!("template_{k}"), days, profile, &mut rng)
        })
        .collect()
}

/// Same as [`synthetic_templates`] followed by hourly resampling.
pub fn synthetic_hourly_templates(
    count: usize,
    days: usize,
    seed: u64,
    profile: &SyntheticProfile,
) -> Result<Vec<LoadSeries>> {
    synthetic_templates(count, days, seed, profile)
        .iter()
        .map(TemplateHome::to_hourly)
        .collect()
}

fn daily_shape(rng: &mut ChaCha8Rng) -> Vec<f64> {
    let morning_hour = rng.gen_range(6.0..8.5);
    let morning_amp = rng.gen_range(0.4..0.8);
    let evening_hour = rng.gen_range(18.0..20.5);
    let evening_amp = rng.gen_range(0.9..1.4);
    let bump = |x: f64, centre: f64, width: f64| (-(x - centre).powi(2) / (2.0 * width * width)).exp();
    let raw: Vec<f64> = (0..1440)
        .map(|m| {
            let x = m as f64 / 60.0;
            0.55 + morning_amp * bump(x, morning_hour, 1.2)
                + evening_amp * bump(x, evening_hour, 2.0)
                + 0.25 * bump(x, 13.0, 3.0)
        })
        .collect();
    let mean = raw.iter().sum::<f64>() / raw.len() as f64;
    raw.into_iter().map(|v| v / mean).collect()
}

fn generate_home(id: String, days: usize, p: &SyntheticProfile, rng: &mut ChaCha8Rng) -> TemplateHome {
    let shape = daily_shape(rng);
    let burst_mean_kwh =
        p.bursts_per_day / 24.0 * ((BURST_MINUTES.0 + BURST_MINUTES.1) as f64 / 2.0 / 60.0) * ((BURST_KW.0 + BURST_KW.1) / 2.0);
    let base = (p.mean_kwh - burst_mean_kwh).max(0.1);
    // mean-one lognormals
    let day_factor = LogNormal::new(-p.day_sigma * p.day_sigma / 2.0, p.day_sigma).unwrap();
    let hour_factor = LogNormal::new(-p.hour_sigma * p.hour_sigma / 2.0, p.hour_sigma).unwrap();
    let jitter = Normal::new(1.0, p.minute_jitter).unwrap();

    let total = days * 1440;
    let mut kw = Vec::with_capacity(total);
    for _ in 0..days {
        let d = day_factor.sample(rng);
        for h in 0..24 {
            let f = hour_factor.sample(rng);
            for m in 0..60 {
                let j: f64 = jitter.sample(rng);
                kw.push((base * d * f * shape[h * 60 + m] * j).max(0.0));
            }
        }
    }
    let bursts = (p.bursts_per_day * days as f64).round() as usize;
    for _ in 0..bursts {
        let start = rng.gen_range(0..total);
        let len = rng.gen_range(BURST_MINUTES.0..=BURST_MINUTES.1) as usize;
        let power = rng.gen_range(BURST_KW.0..BURST_KW.1);
        for v in kw.iter_mut().skip(start).take(len) {
            *v += power;
        }
    }
    let samples = kw
        .into_iter()
        .enumerate()
        .map(|(minute, kw)| Sample {
            minute: minute as u64,
            kw,
        })
        .collect();
    TemplateHome::new(id, samples).expect("generated readings are finite and non-negative")
}
