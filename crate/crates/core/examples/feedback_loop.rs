//! Closed-loop pricing: observed load against participation and pricing goal.

use gridloop::feedback::{simulate, Goal, GridConfig, Injection, Participation};
use gridloop::forecast::Persistence;
use gridloop::ingest::{synthetic_hourly_templates, SyntheticProfile};
use gridloop::loadgen::{synthesize_microgrid, BootstrapConfig};

fn main() -> gridloop::Result<()> {
    let templates = synthetic_hourly_templates(7, 56, 2017, &SyntheticProfile::default())?;
    let grid = synthesize_microgrid(&templates, 200, &BootstrapConfig::default())?;

    println!("kappa  goal   mean load  mean price");
    for goal in [Goal::Goal1, Goal::Goal2] {
        for kappa in [0.0, 0.5, 0.99] {
            let cfg = GridConfig {
                kappa: Participation::Uniform(kappa),
                goal,
                ..GridConfig::default()
            };
            let trace = simulate(&grid, &cfg, &mut Persistence::Naive, None, Injection::ClosedLoop)?;
            let prices = trace.prices();
            println!(
                "{kappa:<6} {goal:?}  {:9.1}  {:10.3}",
                trace.mean_observed(),
                prices.iter().sum::<f64>() / prices.len() as f64
            );
        }
    }

    let cfg = GridConfig {
        kappa: Participation::Uniform(0.9),
        ..GridConfig::default()
    };
    let trace = simulate(&grid, &cfg, &mut Persistence::Naive, None, Injection::ClosedLoop)?;
    println!("\nhour  base    observed  price  (kappa 0.9, goal 1)");
    for s in trace.steps.iter().skip(24).take(24) {
        println!("{:4}  {:6.1}  {:8.1}  {:.3}", s.hour, s.base_load, s.observed_load, s.price);
    }
    Ok(())
}
