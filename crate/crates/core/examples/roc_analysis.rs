//! ROC curves, AUC and the operating point nearest (0, 1).

use gridloop::eval::{best_threshold, confusion, metrics, roc_curve, ScoreRule};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> gridloop::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let labels: Vec<bool> = (0..200).map(|i| i % 4 == 0).collect();
    let scores: Vec<f64> = labels
        .iter()
        .map(|&l| rng.gen::<f64>() + if l { 0.6 } else { 0.0 })
        .collect();

    let roc = roc_curve(&scores, &labels)?;
    let best = best_threshold(&roc);
    println!("classifier-style scores: AUC {:.4}, {} points", roc.auc, roc.points.len());
    println!("best threshold {:.4} at fpr {:.3}, tpr {:.3}", best.threshold, best.fpr, best.tpr);
    let decisions: Vec<bool> = scores.iter().map(|&s| s >= best.threshold).collect();
    let c = confusion(&labels, &decisions)?;
    println!("{c:?}");
    println!("{}", serde_json::to_string_pretty(&metrics(&c)).unwrap());

    // a sequential detector is swept over its own threshold
    let residuals: Vec<f64> = labels.iter().map(|&l| rng.gen_range(-1.0..1.0) + if l { 2.0 } else { 0.0 }).collect();
    let cusum = ScoreRule::Cusum.roc(&residuals, &labels)?;
    let b = best_threshold(&cusum);
    println!("CUSUM sweep: AUC {:.4}, best h = {:.2} sigma", cusum.auc, b.threshold);
    Ok(())
}
