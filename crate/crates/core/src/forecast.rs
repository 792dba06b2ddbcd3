//! Base-load forecasters and residual diagnostics.
//!
//! The seasonal-AR filter differences at lag 24 and fits an AR(p) on the
//! differenced series by conditional least squares. Forecasts invert the
//! differencing recursively, so multi-step forecasts reuse earlier forecasts
//! for lags beyond the observed history.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats::{mean, normal_quantile, std_dev};

pub const SEASON: usize = 24;

/// Training residual std below which the detectors' noise scale is clamped.
pub const SIGMA_FLOOR: f64 = 1e-6;

/// One-step forecaster used inside the pricing loop.
pub trait Forecaster {
    /// Forecast of the value following `history`, or `None` when the history
    /// is too short for this forecaster to say anything.
    fn predict(&mut self, history: &[f64]) -> Option<f64>;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ForecastKind {
    Naive,
    SeasonalNaive,
    SeasonalAr,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct ForecasterSpec {
    pub kind: ForecastKind,
    pub ar_order: usize,
}

impl Default for ForecasterSpec {
    fn default() -> Self {
        Self {
            kind: ForecastKind::SeasonalAr,
            ar_order: 2,
        }
    }
}

/// `y[t-1]` (naive) or `y[t-24]` (seasonal) persistence.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Persistence {
    Naive,
    Seasonal,
}

impl Forecaster for Persistence {
    fn predict(&mut self, history: &[f64]) -> Option<f64> {
        match self {
            Persistence::Seasonal if history.len() >= SEASON => Some(history[history.len() - SEASON]),
            // seasonal falls back to the previous hour until a full day is known
            _ => history.last().copied(),
        }
    }
}

/// Reads the true value from a known series; the exact-forecast reference case.
#[derive(Debug, Clone)]
pub struct OracleForecaster {
    truth: Vec<f64>,
}

impl OracleForecaster {
    pub fn new(truth: Vec<f64>) -> Self {
        Self { truth }
    }
}

impl Forecaster for OracleForecaster {
    fn predict(&mut self, history: &[f64]) -> Option<f64> {
        self.truth.get(history.len()).copied()
    }
}

pub fn persistence_forecast(history: &[f64], horizon: usize, kind: Persistence) -> Result<Vec<f64>> {
    let need = match kind {
        Persistence::Naive => 1,
        Persistence::Seasonal => SEASON,
    };
    if history.len() < need {
        return Err(Error::InsufficientHistory {
            need,
            have: history.len(),
        });
    }
    Ok(match kind {
        Persistence::Naive => vec![history[history.len() - 1]; horizon],
        Persistence::Seasonal => {
            let last_day = &history[history.len() - SEASON..];
            (0..horizon).map(|k| last_day[k % SEASON]).collect()
        }
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeasonalArModel {
    pub requested_order: usize,
    /// AR coefficients on the differenced series, lag 1 first. May be shorter
    /// than `requested_order` when the normal equations were singular.
    pub coefficients: Vec<f64>,
    /// Std of the one-step training residuals after flooring.
    pub sigma: f64,
    pub sigma_floored: bool,
    /// One-step residuals for hours `24 + order ..` of the training series.
    pub train_residuals: Vec<f64>,
    history: Vec<f64>,
}

impl SeasonalArModel {
    pub fn order(&self) -> usize {
        self.coefficients.len()
    }

    pub fn history(&self) -> &[f64] {
        &self.history
    }

    /// Forecasts `horizon` hours past the end of the training series.
    pub fn forecast(&self, horizon: usize) -> Vec<f64> {
        self.forecast_after(&self.history, horizon)
            .expect("training history satisfies the lag requirement")
    }

    /// Forecasts `horizon` hours past the end of `history`.
    pub fn forecast_after(&self, history: &[f64], horizon: usize) -> Result<Vec<f64>> {
        let p = self.order();
        if history.len() < SEASON + p {
            return Err(Error::InsufficientHistory {
                need: SEASON + p,
                have: history.len(),
            });
        }
        let mut y = history.to_vec();
        // diff[t - SEASON] = y[t] - y[t - SEASON]
        let mut diff: Vec<f64> = (SEASON..y.len()).map(|t| y[t] - y[t - SEASON]).collect();
        let mut out = Vec::with_capacity(horizon);
        for _ in 0..horizon {
            let t = y.len();
            let d_hat: f64 = self
                .coefficients
                .iter()
                .enumerate()
                .map(|(j, phi)| phi * diff[t - SEASON - (j + 1)])
                .sum();
            let y_hat = d_hat + y[t - SEASON];
            diff.push(d_hat);
            y.push(y_hat);
            out.push(y_hat);
        }
        Ok(out)
    }
}

impl Forecaster for SeasonalArModel {
    fn predict(&mut self, history: &[f64]) -> Option<f64> {
        match self.forecast_after(history, 1) {
            Ok(f) => Some(f[0]),
            Err(_) => history.last().copied(),
        }
    }
}

pub fn fit_seasonal_ar(train: &[f64], ar_order: usize) -> Result<SeasonalArModel> {
    if ar_order > SEASON {
        return Err(Error::config(format!("AR order {ar_order} exceeds {SEASON}")));
    }
    let need = 3 * SEASON + ar_order;
    if train.len() < need {
        return Err(Error::InsufficientHistory {
            need,
            have: train.len(),
        });
    }
    let diff: Vec<f64> = (SEASON..train.len()).map(|t| train[t] - train[t - SEASON]).collect();

    let mut order = ar_order;
    let coefficients = loop {
        if order == 0 {
            break Vec::new();
        }
        match least_squares_ar(&diff, order) {
            Some(c) => break c,
            None => {
                log::debug!("AR({order}) normal equations singular; reducing order");
                order -= 1;
            }
        }
    };

    let train_residuals: Vec<f64> = (order..diff.len())
        .map(|t| diff[t] - coefficients.iter().enumerate().map(|(j, c)| c * diff[t - j - 1]).sum::<f64>())
        .collect();
    let raw_sigma = std_dev(&train_residuals);
    let sigma_floored = !(raw_sigma >= SIGMA_FLOOR);
    Ok(SeasonalArModel {
        requested_order: ar_order,
        coefficients,
        sigma: if sigma_floored { SIGMA_FLOOR } else { raw_sigma },
        sigma_floored,
        train_residuals,
        history: train.to_vec(),
    })
}

/// AR order in `0..=max_order` minimizing the Bayesian information criterion
/// `m ln(s2) + p ln(m)`, with every candidate scored on the same last `m`
/// differenced values.
pub fn select_ar_order(train: &[f64], max_order: usize) -> Result<usize> {
    let max_order = max_order.min(SEASON);
    let mut best = (f64::INFINITY, 0);
    for p in 0..=max_order {
        let model = fit_seasonal_ar(train, p)?;
        if model.order() < p {
            // singular at this order; larger orders add nothing
            break;
        }
        let tail = &model.train_residuals[max_order - p..];
        let m = tail.len() as f64;
        let s2 = tail.iter().map(|r| r * r).sum::<f64>() / m;
        if s2 == 0.0 {
            return Ok(p);
        }
        let bic = m * s2.ln() + p as f64 * m.ln();
        if bic < best.0 {
            best = (bic, p);
        }
    }
    Ok(best.1)
}

/// Conditional least squares for `d[t] = sum_j c_j d[t-j]`; `None` when the
/// normal equations are numerically singular.
fn least_squares_ar(diff: &[f64], p: usize) -> Option<Vec<f64>> {
    let mut gram = vec![vec![0.0; p]; p];
    let mut rhs = vec![0.0; p];
    for t in p..diff.len() {
        for i in 0..p {
            rhs[i] += diff[t - i - 1] * diff[t];
            for j in 0..p {
                gram[i][j] += diff[t - i - 1] * diff[t - j - 1];
            }
        }
    }
    cholesky_solve(gram, rhs)
}

fn cholesky_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    let scale = (0..n).map(|i| a[i][i]).fold(0.0, f64::max);
    if !(scale > 0.0) {
        return None;
    }
    for j in 0..n {
        let mut s = a[j][j];
        for k in 0..j {
            s -= a[j][k] * a[j][k];
        }
        if s <= 1e-12 * scale {
            return None;
        }
        let l = s.sqrt();
        a[j][j] = l;
        for i in j + 1..n {
            let mut s = a[i][j];
            for k in 0..j {
                s -= a[i][k] * a[j][k];
            }
            a[i][j] = s / l;
        }
    }
    for i in 0..n {
        let s: f64 = (0..i).map(|k| a[i][k] * b[k]).sum();
        b[i] = (b[i] - s) / a[i][i];
    }
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|k| a[k][i] * b[k]).sum();
        b[i] = (b[i] - s) / a[i][i];
    }
    Some(b)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualSeries {
    pub values: Vec<f64>,
    pub sigma: f64,
}

/// `observed - forecast`, carrying the noise scale estimated in training.
pub fn residuals(observed: &[f64], forecast: &[f64], sigma: f64) -> Result<ResidualSeries> {
    if observed.len() != forecast.len() {
        return Err(Error::LengthMismatch {
            left: observed.len(),
            right: forecast.len(),
        });
    }
    Ok(ResidualSeries {
        values: observed.iter().zip(forecast).map(|(y, f)| y - f).collect(),
        sigma: sigma.max(SIGMA_FLOOR),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JarqueBera {
    pub statistic: f64,
    pub skew: f64,
    pub kurtosis: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    /// Autocorrelations for lags `0..=max_lag`.
    pub acf: Vec<f64>,
    /// Partial autocorrelations for lags `0..=max_lag` (lag 0 is 1 by convention).
    pub pacf: Vec<f64>,
    /// Half-width of the white-noise band, `1.96 / sqrt(n)`.
    pub band: f64,
    pub jarque_bera: JarqueBera,
    /// `(empirical, theoretical)` standardized quantile pairs.
    pub qq: Vec<(f64, f64)>,
}

impl Diagnostics {
    /// Fraction of lags `1..=max_lag` whose ACF lies inside the band.
    pub fn fraction_within_band(&self) -> f64 {
        let lags = &self.acf[1..];
        lags.iter().filter(|r| r.abs() <= self.band).count() as f64 / lags.len() as f64
    }

    pub fn write_correlogram(&self, writer: impl Write) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["lag", "acf", "pacf"])?;
        for (k, (a, p)) in self.acf.iter().zip(&self.pacf).enumerate() {
            w.write_record([k.to_string(), a.to_string(), p.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_jarque_bera(&self, writer: impl Write) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["stat", "skew", "kurtosis"])?;
        let jb = &self.jarque_bera;
        w.write_record([jb.statistic.to_string(), jb.skew.to_string(), jb.kurtosis.to_string()])?;
        w.flush()?;
        Ok(())
    }

    pub fn write_qq(&self, writer: impl Write) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["empirical_q", "theoretical_q"])?;
        for (e, t) in &self.qq {
            w.write_record([e.to_string(), t.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

pub fn acf(x: &[f64], max_lag: usize) -> Vec<f64> {
    let m = mean(x);
    let denom: f64 = x.iter().map(|v| (v - m).powi(2)).sum();
    (0..=max_lag)
        .map(|k| (k..x.len()).map(|t| (x[t] - m) * (x[t - k] - m)).sum::<f64>() / denom)
        .collect()
}

/// Durbin-Levinson recursion on the sample autocorrelations.
pub fn pacf_from_acf(r: &[f64]) -> Vec<f64> {
    let max_lag = r.len() - 1;
    let mut out = vec![1.0];
    let mut prev: Vec<f64> = Vec::new();
    for k in 1..=max_lag {
        let num = r[k] - prev.iter().enumerate().map(|(j, p)| p * r[k - j - 1]).sum::<f64>();
        let den = 1.0 - prev.iter().enumerate().map(|(j, p)| p * r[j + 1]).sum::<f64>();
        let phi_kk = num / den;
        let mut next: Vec<f64> = prev
            .iter()
            .enumerate()
            .map(|(j, p)| p - phi_kk * prev[k - 2 - j])
            .collect();
        next.push(phi_kk);
        out.push(phi_kk);
        prev = next;
    }
    out
}

pub fn jarque_bera(x: &[f64]) -> JarqueBera {
    let n = x.len() as f64;
    let m = mean(x);
    let moment = |p: i32| x.iter().map(|v| (v - m).powi(p)).sum::<f64>() / n;
    let m2 = moment(2);
    let skew = moment(3) / m2.powf(1.5);
    let kurtosis = moment(4) / (m2 * m2);
    JarqueBera {
        statistic: n / 6.0 * (skew * skew + (kurtosis - 3.0).powi(2) / 4.0),
        skew,
        kurtosis,
    }
}

pub fn qq_pairs(x: &[f64]) -> Vec<(f64, f64)> {
    let n = x.len();
    let m = mean(x);
    let s = std_dev(x);
    let mut z: Vec<f64> = x.iter().map(|v| (v - m) / s).collect();
    z.sort_by(f64::total_cmp);
    z.into_iter()
        .enumerate()
        .map(|(i, e)| (e, normal_quantile((i as f64 + 0.5) / n as f64)))
        .collect()
}

pub fn diagnostics(x: &[f64], max_lag: usize) -> Result<Diagnostics> {
    if x.len() < max_lag + 2 {
        return Err(Error::InsufficientHistory {
            need: max_lag + 2,
            have: x.len(),
        });
    }
    let m = mean(x);
    if x.iter().all(|v| (v - m).abs() == 0.0) {
        return Err(Error::DegenerateResiduals);
    }
    let acf = acf(x, max_lag);
    let pacf = pacf_from_acf(&acf);
    Ok(Diagnostics {
        band: 1.96 / (x.len() as f64).sqrt(),
        pacf,
        acf,
        jarque_bera: jarque_bera(x),
        qq: qq_pairs(x),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    fn periodic(days: usize) -> Vec<f64> {
        (0..days * SEASON)
            .map(|t| 300.0 + 80.0 * ((t % SEASON) as f64 / 24.0 * std::f64::consts::TAU).sin())
            .collect()
    }

    #[test]
    fn naive_holds_last_value() {
        assert_eq!(persistence_forecast(&[1.0, 3.0, 5.0], 3, Persistence::Naive).unwrap(), vec![5.0; 3]);
        assert_eq!(persistence_forecast(&[1.0, 2.0], 1, Persistence::Naive).unwrap(), vec![2.0]);
        assert!(persistence_forecast(&[], 1, Persistence::Naive).is_err());
    }

    #[test]
    fn seasonal_repeats_last_day() {
        let h = periodic(3);
        let f = persistence_forecast(&h, 48, Persistence::Seasonal).unwrap();
        let last = &h[h.len() - 24..];
        assert_eq!(&f[..24], last);
        assert_eq!(&f[24..], last);
        assert!(persistence_forecast(&h[..23], 1, Persistence::Seasonal).is_err());
    }

    #[test]
    fn periodic_training_floors_sigma() {
        let model = fit_seasonal_ar(&periodic(5), 2).unwrap();
        assert_eq!(model.order(), 0);
        assert!(model.sigma_floored);
        assert_eq!(model.sigma, SIGMA_FLOOR);
        assert!(model.train_residuals.iter().all(|r| r.abs() < 1e-12));
        let f = model.forecast(50);
        let h = periodic(5);
        for (k, v) in f.iter().enumerate() {
            assert!((v - h[h.len() - 24 + k % 24]).abs() < 1e-9);
        }
    }

    #[test]
    fn recovers_ar1_coefficient() {
        // oracle: d_t = 0.5 d_{t-1} + e_t integrated onto a seasonal base
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let noise = Normal::new(0.0, 1.0).unwrap();
        let n = 24 * 40;
        let base = periodic(1);
        let mut y = base.clone();
        let mut d_prev = 0.0;
        for t in 24..n {
            let d = 0.5 * d_prev + noise.sample(&mut rng);
            y.push(y[t - 24] + d);
            d_prev = d;
        }
        let model = fit_seasonal_ar(&y, 1).unwrap();
        assert!((model.coefficients[0] - 0.5).abs() < 0.1, "{:?}", model.coefficients);
        assert!((model.sigma - 1.0).abs() < 0.15);
    }

    #[test]
    fn bic_picks_the_generating_order() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let noise = Normal::new(0.0, 1.0).unwrap();
        let mut y = periodic(1);
        let mut d = vec![0.0; 2];
        for t in 24..24 * 60 {
            let v = 0.6 * d[d.len() - 1] - 0.3 * d[d.len() - 2] + noise.sample(&mut rng);
            d.push(v);
            y.push(y[t - 24] + v);
        }
        assert_eq!(select_ar_order(&y, 12).unwrap(), 2);
        // white differences need no AR terms
        let mut w = periodic(1);
        for t in 24..24 * 60 {
            w.push(w[t - 24] + noise.sample(&mut rng));
        }
        assert_eq!(select_ar_order(&w, 12).unwrap(), 0);
    }

    #[test]
    fn order_zero_is_seasonal_persistence() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let noise = Normal::new(0.0, 5.0).unwrap();
        let y: Vec<f64> = periodic(6).into_iter().map(|v| v + noise.sample(&mut rng)).collect();
        let model = fit_seasonal_ar(&y, 0).unwrap();
        assert_eq!(model.forecast(60), persistence_forecast(&y, 60, Persistence::Seasonal).unwrap());
    }

    #[test]
    fn ar1_forecast_decays_geometrically() {
        let phi = 0.7;
        let mut y = periodic(4);
        let n = y.len();
        let d_last = 6.0;
        y[n - 1] += d_last; // only the final hour departs from the season
        let model = SeasonalArModel {
            requested_order: 1,
            coefficients: vec![phi],
            sigma: 1.0,
            sigma_floored: false,
            train_residuals: vec![],
            history: y.clone(),
        };
        let f = model.forecast(30);
        for k in 1..=23 {
            // d_hat(+k) = phi^k d_last, seasonal base from the previous day
            let expected = y[n - 1 + k - 24] + phi.powi(k as i32) * d_last;
            assert!((f[k - 1] - expected).abs() < 1e-9, "k = {k}");
        }
    }

    #[test]
    fn forecast_prefix_property() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let noise = Normal::new(0.0, 3.0).unwrap();
        let y: Vec<f64> = periodic(8).into_iter().map(|v| v + noise.sample(&mut rng)).collect();
        let model = fit_seasonal_ar(&y, 2).unwrap();
        let long = model.forecast(72);
        for h in [1, 5, 24, 48] {
            assert_eq!(model.forecast(h), long[..h]);
        }
    }

    #[test]
    fn residuals_arithmetic() {
        let f = vec![10.0; 48];
        let mut obs = f.clone();
        assert!(residuals(&obs, &f, 1.0).unwrap().values.iter().all(|&r| r == 0.0));
        for v in &mut obs[24..] {
            *v += 150.0;
        }
        let r = residuals(&obs, &f, 1.0).unwrap();
        assert_eq!(mean(&r.values[24..]), 150.0);

        let mut obs = f.clone();
        obs[24] += 250.0;
        let r = residuals(&obs, &f, 1.0).unwrap();
        assert_eq!(r.values[24], 250.0);
        assert_eq!(r.values.iter().filter(|&&v| v != 0.0).count(), 1);
        assert!(residuals(&obs[1..], &f, 1.0).is_err());
    }

    #[test]
    fn acf_of_alternating_series() {
        let n = 50;
        let x: Vec<f64> = (0..n).map(|t| if t % 2 == 0 { 1.0 } else { -1.0 }).collect();
        let d = diagnostics(&x, 5).unwrap();
        assert_eq!(d.acf[0], 1.0);
        assert!((d.acf[1] + (n as f64 - 1.0) / n as f64).abs() < 1e-12);
        assert_eq!(d.pacf[1], d.acf[1]);
    }

    #[test]
    fn pacf_of_ar1_cuts_off() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let noise = Normal::new(0.0, 1.0).unwrap();
        let mut x = vec![0.0];
        for t in 1..20_000 {
            x.push(0.6 * x[t - 1] + noise.sample(&mut rng));
        }
        let d = diagnostics(&x, 4).unwrap();
        assert!((d.pacf[1] - 0.6).abs() < 0.03);
        for k in 2..=4 {
            assert!(d.pacf[k].abs() < 0.03, "lag {k}: {}", d.pacf[k]);
        }
    }

    #[test]
    fn symmetric_flat_sample_has_zero_skew() {
        // {-a, 0, 0, a} repeated: skew 0, kurtosis 2
        let x: Vec<f64> = (0..400).map(|i| [-1.0, 0.0, 0.0, 1.0][i % 4]).collect();
        let jb = jarque_bera(&x);
        assert!(jb.skew.abs() < 1e-12);
        assert!((jb.kurtosis - 2.0).abs() < 1e-12);
        assert!((jb.statistic - 400.0 / 6.0 * 0.25).abs() < 1e-9);
    }

    #[test]
    fn normal_shaped_sample_has_zero_statistic() {
        // P(+-1) = 1/6, P(0) = 2/3 gives skew 0 and kurtosis exactly 3
        let x: Vec<f64> = (0..600).map(|i| [-1.0, 0.0, 0.0, 0.0, 0.0, 1.0][i % 6]).collect();
        let jb = jarque_bera(&x);
        assert!(jb.statistic.abs() < 1e-20);
        assert!((jb.kurtosis - 3.0).abs() < 1e-12);
    }

    #[test]
    fn degenerate_residuals_error() {
        assert!(matches!(diagnostics(&[2.0; 30], 5), Err(Error::DegenerateResiduals)));
        assert!(diagnostics(&[1.0, 2.0, 3.0], 5).is_err());
    }

    #[test]
    fn qq_pairs_are_sorted_and_symmetric() {
        let x: Vec<f64> = (0..101).map(f64::from).collect();
        let qq = qq_pairs(&x);
        assert!(qq.windows(2).all(|w| w[0].0 <= w[1].0 && w[0].1 < w[1].1));
        assert!(qq[50].1.abs() < 1e-12);
        assert!((qq[0].1 + qq[100].1).abs() < 1e-9);
    }
}
