//! Train the three classifiers on lagged windows of an attacked training month.

use gridloop::detect::{make_features, train_classifier, ClassifierKind, LAG};
use gridloop::experiment::{build_microgrid, load_templates, simulate_nominal, training_series, ExperimentConfig};

fn main() -> gridloop::Result<()> {
    let cfg = ExperimentConfig::default();
    let templates = load_templates(&cfg.templates)?;
    let grid = build_microgrid(&cfg, &templates, 0)?;
    let observed = simulate_nominal(&cfg, &grid, 0.9)?.observed();
    let train = &observed[..cfg.train_hours()];

    let (series, labels) = training_series(train, 11);
    let set = make_features(&series, &labels, LAG)?;
    println!("{} rows of {} lags, {} attacked", set.len(), set.width(), set.positives());

    // hold out the last fifth of rows
    let cut = set.len() * 4 / 5;
    let fit = gridloop::detect::SupervisedSet {
        features: set.features[..cut].to_vec(),
        labels: set.labels[..cut].to_vec(),
    };
    for kind in ClassifierKind::ALL {
        let model = train_classifier(&fit, kind, 5)?;
        let correct = set.features[cut..]
            .iter()
            .zip(&set.labels[cut..])
            .filter(|(row, &label)| (model.predict_score(row) >= 0.5) == label)
            .count();
        println!("{kind:<7} held-out accuracy {:.3}", correct as f64 / (set.len() - cut) as f64);
    }
    Ok(())
}
