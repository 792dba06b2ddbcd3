//! Price and load attacks inside the loop, and their equivalence for one home.

use gridloop::attack::{
    equivalent_load_attack, equivalent_price_attack, make_schedule, AttackKind, AttackMode, AttackParams,
};
use gridloop::feedback::{household_dsm_load, simulate, GridConfig, Injection, Participation};
use gridloop::forecast::Persistence;
use gridloop::ingest::{synthetic_hourly_templates, SyntheticProfile};
use gridloop::loadgen::{synthesize_microgrid, BootstrapConfig};

fn main() -> gridloop::Result<()> {
    let (phi, kappa, price, eps) = (1.8, 0.6, 1.2, -1.0);
    let a_price = -0.4;
    let a_load = equivalent_load_attack(a_price, phi, kappa, price, eps)?;
    let via_price = household_dsm_load(phi, kappa, price + a_price, eps)?;
    let via_load = household_dsm_load(phi, kappa, price, eps)? + a_load;
    println!("price attack {a_price} == load attack {a_load:.6}");
    println!("  household load {via_price:.12} vs {via_load:.12}");
    println!("  recovered price attack {:.12}", equivalent_price_attack(a_load, phi, kappa, price, eps)?);
    match equivalent_load_attack(a_price, phi, 0.0, price, eps) {
        Err(e) => println!("  without DSM: {e}"),
        Ok(v) => println!("  without DSM: {v}"),
    }

    let templates = synthetic_hourly_templates(7, 56, 2017, &SyntheticProfile::default())?;
    let grid = synthesize_microgrid(&templates, 200, &BootstrapConfig::default())?;
    let cfg = GridConfig {
        kappa: Participation::Uniform(0.9),
        ..GridConfig::default()
    };
    let clean = simulate(&grid, &cfg, &mut Persistence::Naive, None, Injection::ClosedLoop)?;
    let attacks = [
        ("load ramp", make_schedule(AttackKind::Ramp, &AttackParams::ramp(5.0), 696..720, vec![], AttackMode::Load)?),
        // schedule magnitudes are split across victims, so -15 gives each of 50 homes -0.3 $/kWh
        ("price drop", make_schedule(AttackKind::Sudden, &AttackParams::sudden(-15.0), 696..720, (0..50).collect(), AttackMode::Price)?),
    ];
    for (name, schedule) in attacks {
        let hit = simulate(&grid, &cfg, &mut Persistence::Naive, Some(&schedule), Injection::ClosedLoop)?;
        let extra: f64 = hit.observed()[696..].iter().zip(&clean.observed()[696..]).map(|(a, b)| a - b).sum();
        println!("{name}: {extra:+.1} kWh over the attacked day");
    }
    Ok(())
}
