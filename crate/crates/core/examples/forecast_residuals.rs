//! Seasonal-AR fit on four weeks of observed load, with residual diagnostics.

use gridloop::experiment::{build_microgrid, load_templates, simulate_nominal, ExperimentConfig};
use gridloop::forecast::{diagnostics, fit_seasonal_ar, residuals, select_ar_order};

fn main() -> gridloop::Result<()> {
    let cfg = ExperimentConfig::default();
    let templates = load_templates(&cfg.templates)?;
    let grid = build_microgrid(&cfg, &templates, 0)?;
    let observed = simulate_nominal(&cfg, &grid, 0.1)?.observed();
    let (train, test) = observed.split_at(cfg.train_hours());

    let fixed = diagnostics(&fit_seasonal_ar(train, 2)?.train_residuals, 24)?;
    println!("AR(2): {:.0}% of residual ACF lags inside the band", 100.0 * fixed.fraction_within_band());

    // the experiment picks the order by BIC instead
    let order = select_ar_order(train, 24)?;
    let model = fit_seasonal_ar(train, order)?;
    println!("BIC order {order}, sigma {:.3}", model.sigma);
    let forecast = model.forecast(test.len());
    let res = residuals(test, &forecast, model.sigma)?;
    let rmse = (res.values.iter().map(|r| r * r).sum::<f64>() / res.values.len() as f64).sqrt();
    println!("48-hour forecast RMSE {rmse:.3}");

    let d = diagnostics(&model.train_residuals, 24)?;
    println!("training residual ACF within +-{:.3}: {:.0}% of lags", d.band, 100.0 * d.fraction_within_band());
    println!(
        "Jarque-Bera {:.2} (skew {:.3}, kurtosis {:.3})",
        d.jarque_bera.statistic, d.jarque_bera.skew, d.jarque_bera.kurtosis
    );
    d.write_correlogram(std::io::stdout())?;
    Ok(())
}
