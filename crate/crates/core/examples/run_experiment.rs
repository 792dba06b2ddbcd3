//! The scenario grid with summary table. Pass a replication count as the
//! first argument (default 3); artifacts go to `target/gridloop-example`.

use gridloop::experiment::{run_experiment, ExperimentConfig, DETECTORS};

fn main() -> gridloop::Result<()> {
    let replications = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(3);
    let cfg = ExperimentConfig {
        replications,
        seed: 2024,
        output_dir: "target/gridloop-example".into(),
        ..ExperimentConfig::default()
    };
    let summary = run_experiment(&cfg)?;
    println!("{} scenarios, {} failed", summary.scenarios.len(), summary.failures());

    print!("{:<8}", "");
    for kind in &cfg.attack_types {
        for kappa in &cfg.kappas {
            print!("{:>14}", format!("{kind} k={kappa}"));
        }
    }
    println!();
    for detector in DETECTORS {
        print!("{detector:<8}");
        for &kind in &cfg.attack_types {
            for &kappa in &cfg.kappas {
                let acc = summary.mean(detector, kind, kappa, "accuracy").unwrap_or(f64::NAN);
                print!("{:>14.3}", acc);
            }
        }
        println!();
    }
    println!("artifacts in {}", cfg.output_dir.display());
    Ok(())
}
