//! Acceptance gate. Each criterion prints one PASS/FAIL line; the binary
//! exits non-zero if any criterion fails.

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use gridloop::attack::{equivalent_load_attack, equivalent_price_attack, AttackKind};
use gridloop::detect::{cusum_detect, glrt_detect, CusumConfig, GlrtConfig};
use gridloop::eval::{best_threshold, roc_curve};
use gridloop::experiment::{build_microgrid, fit_forecaster, load_templates, run_experiment_with, ExperimentConfig, DETECTORS};
use gridloop::feedback::{household_dsm_load, simulate, Goal, GridConfig, Injection, Participation};
use gridloop::forecast::{acf, fit_seasonal_ar, OracleForecaster, Persistence};
use gridloop::ingest::{synthetic_hourly_templates, SyntheticProfile};
use gridloop::loadgen::{synthesize_microgrid, BootstrapConfig};
use gridloop::Error;

struct Outcome {
    pass: bool,
    detail: String,
}

fn check(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn templates() -> Vec<gridloop::ingest::LoadSeries> {
    synthetic_hourly_templates(7, 56, 2017, &SyntheticProfile::default()).unwrap()
}

fn grid_cfg(kappa: f64, goal: Goal) -> GridConfig {
    GridConfig {
        kappa: Participation::Uniform(kappa),
        goal,
        ..GridConfig::default()
    }
}

fn no_dsm_identity() -> Outcome {
    let grid = synthesize_microgrid(&templates(), 200, &BootstrapConfig::default()).unwrap();
    let mut worst = 0.0_f64;
    for goal in [Goal::Goal1, Goal::Goal2] {
        let trace = simulate(&grid, &grid_cfg(0.0, goal), &mut Persistence::Naive, None, Injection::ClosedLoop).unwrap();
        for s in &trace.steps {
            worst = worst.max((s.observed_load - s.base_load).abs() / s.base_load);
        }
    }
    check(worst < 1e-9, format!("max relative error {worst:.2e}"))
}

fn target_tracking() -> Outcome {
    let grid = synthesize_microgrid(&templates(), 200, &BootstrapConfig::default()).unwrap();
    let cfg = GridConfig {
        eps_dsm_hat: Some(-1.0),
        ..grid_cfg(1.0, Goal::Goal1)
    };
    let mut oracle = OracleForecaster::new(grid.base_load());
    let trace = simulate(&grid, &cfg, &mut oracle, None, Injection::ClosedLoop).unwrap();
    let worst = trace
        .steps
        .iter()
        .map(|s| (s.observed_load - s.target).abs() / s.target)
        .fold(0.0, f64::max);
    check(worst < 1e-6, format!("max relative tracking error {worst:.2e}"))
}

fn dsm_monotonicity() -> Outcome {
    let templates = templates();
    let kappas = [0.0, 0.5, 0.99];
    let mut means = [0.0; 3];
    for rep in 0..20 {
        let grid = synthesize_microgrid(
            &templates,
            200,
            &BootstrapConfig {
                seed: rep,
                ..BootstrapConfig::default()
            },
        )
        .unwrap();
        for (k, &kappa) in kappas.iter().enumerate() {
            let trace =
                simulate(&grid, &grid_cfg(kappa, Goal::Goal1), &mut Persistence::Naive, None, Injection::ClosedLoop)
                    .unwrap();
            means[k] += trace.mean_observed() / 20.0;
        }
    }
    let decreasing = means[0] > means[1] && means[1] > means[2];
    let pass = decreasing && (200.0..=230.0).contains(&means[2]) && (300.0..=360.0).contains(&means[0]);
    check(
        pass,
        format!("mean load {:.1} / {:.1} / {:.1} kWh at kappa 0 / 0.5 / 0.99", means[0], means[1], means[2]),
    )
}

fn attack_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (mut worst_load, mut worst_trip) = (0.0_f64, 0.0_f64);
    let mut tuples = 0;
    while tuples < 1000 {
        let phi = rng.gen_range(0.1..5.0);
        let kappa = rng.gen_range(0.01..1.0);
        let price = rng.gen_range(0.1..5.0);
        let eps = -rng.gen_range(0.2..3.0);
        let a_price = rng.gen_range(-0.9 * price..3.0);
        let a_load = equivalent_load_attack(a_price, phi, kappa, price, eps).unwrap();
        let via_price = household_dsm_load(phi, kappa, price + a_price, eps).unwrap();
        let via_load = household_dsm_load(phi, kappa, price, eps).unwrap() + a_load;
        worst_load = worst_load.max((via_price - via_load).abs() / via_price.abs());
        let back = equivalent_price_attack(a_load, phi, kappa, price, eps).unwrap();
        worst_trip = worst_trip.max((back - a_price).abs() / a_price.abs().max(1.0));
        tuples += 1;
    }
    let rejects = matches!(equivalent_load_attack(0.5, 1.0, 0.0, 1.0, -1.0), Err(Error::ModesNotEquivalent))
        && matches!(equivalent_price_attack(0.5, 1.0, 0.0, 1.0, -1.0), Err(Error::ModesNotEquivalent));
    check(
        worst_load < 1e-9 && worst_trip < 1e-9 && rejects,
        format!("{tuples} tuples, load mismatch {worst_load:.2e}, round trip {worst_trip:.2e}, kappa=0 rejected {rejects}"),
    )
}

fn glrt_calibration() -> Outcome {
    let sigma = 3.0;
    let window = 24;
    let windows = 20_000;
    let noise = Normal::new(0.0, sigma).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let x: Vec<f64> = (0..window * windows).map(|_| noise.sample(&mut rng)).collect();
    let mut pass = true;
    let mut parts = Vec::new();
    for p_fa in [0.01, 0.05, 0.1] {
        let cfg = GlrtConfig::new(window, p_fa, sigma).unwrap();
        let alarms = x
            .chunks(window)
            .filter(|w| glrt_detect(w, &cfg).last().unwrap().alarm)
            .count();
        let rate = alarms as f64 / windows as f64;
        pass &= (rate - p_fa).abs() <= 0.02;
        parts.push(format!("{p_fa} -> {rate:.4}"));
    }
    check(pass, format!("{windows} windows, {}", parts.join(", ")))
}

fn cusum_oracle() -> Outcome {
    let a = cusum_detect(&[1.0, -2.0, 1.0], &CusumConfig::new(0.5, 2.0).unwrap());
    let first = a.g == [0.5, 0.0, 0.5] && a.alarm_times.is_empty();
    let b = cusum_detect(&[0.6, 0.6], &CusumConfig::new(0.0, 1.0).unwrap());
    let second = b.g[0] == 0.6 && b.alarm_times == [1] && b.decisions == [false, true];
    // the reset shows in the next step starting from zero
    let c = cusum_detect(&[0.6, 0.6, 0.6], &CusumConfig::new(0.0, 1.0).unwrap());
    let reset = c.g[2] == 0.6;
    check(first && second && reset, format!("g = {:?}; alarms {:?}, reset {reset}", a.g, b.alarm_times))
}

fn detection_reproduction() -> Outcome {
    let cfg = ExperimentConfig {
        replications: 20,
        seed: 2017,
        ..ExperimentConfig::default()
    };
    let summary = run_experiment_with(&cfg, false).unwrap();
    if summary.failures() > 0 {
        return check(false, format!("{} scenarios failed", summary.failures()));
    }
    let acc = |d: &str, kind: AttackKind, kappa: f64| summary.mean(d, kind, kappa, "accuracy").unwrap_or(f64::NAN);
    let mut detail = Vec::new();

    let mut sudden = true;
    for &kappa in &cfg.kappas {
        for d in ["cusum", "logreg"] {
            let a = acc(d, AttackKind::Sudden, kappa);
            sudden &= a >= 0.90;
            detail.push(format!("sudden {d} k={kappa} {a:.3}"));
        }
    }

    let mean_over = |d: &str, kind: AttackKind| cfg.kappas.iter().map(|&k| acc(d, kind, k)).sum::<f64>() / cfg.kappas.len() as f64;
    let cusum_point = mean_over("cusum", AttackKind::Point);
    let best_learner = ["logreg", "gnb", "forest"]
        .iter()
        .map(|d| mean_over(d, AttackKind::Point))
        .fold(f64::NEG_INFINITY, f64::max);
    let point = cusum_point >= best_learner;
    detail.push(format!("point cusum {cusum_point:.3} vs best learner {best_learner:.3}"));

    let kappa_mean = |kappa: f64| {
        let cells: Vec<f64> = DETECTORS
            .iter()
            .flat_map(|d| cfg.attack_types.iter().map(move |&k| (d, k)))
            .map(|(d, k)| acc(d, k, kappa))
            .collect();
        cells.iter().sum::<f64>() / cells.len() as f64
    };
    let (low, high) = (kappa_mean(0.1), kappa_mean(0.9));
    let participation = high >= low - 0.01;
    detail.push(format!("mean accuracy k=0.1 {low:.3}, k=0.9 {high:.3}"));

    check(
        sudden && point && participation,
        format!("(a) {sudden} (b) {point} (c) {participation}: {}", detail.join("; ")),
    )
}

fn roc_properties() -> Outcome {
    let labels = [false, false, false, true, true];
    let perfect = roc_curve(&[0.1, 0.2, 0.3, 0.8, 0.9], &labels).unwrap();
    let constant = roc_curve(&[0.5; 5], &labels).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let scores: Vec<f64> = (0..10_000).map(|_| rng.gen()).collect();
    let random_labels: Vec<bool> = (0..10_000).map(|i| i % 2 == 1).collect();
    let random = roc_curve(&scores, &random_labels).unwrap();
    let best = best_threshold(&perfect);
    let pass = perfect.auc == 1.0
        && constant.auc == 0.5
        && (0.47..=0.53).contains(&random.auc)
        && best.distance_to_corner() == 0.0;
    check(
        pass,
        format!(
            "AUC perfect {} constant {} random {:.4}; best point distance {}",
            perfect.auc,
            constant.auc,
            random.auc,
            best.distance_to_corner()
        ),
    )
}

fn bootstrap_fidelity() -> Outcome {
    let cfg = ExperimentConfig::default();
    let templates = load_templates(&cfg.templates).unwrap();
    let grid = build_microgrid(&cfg, &templates, 0).unwrap();
    let mut unmatched = 0;
    for (i, home) in grid.homes().iter().enumerate() {
        let source = templates[i % templates.len()].values();
        for day in home.values().chunks(24) {
            if !source.chunks(24).any(|d| d == day) {
                unmatched += 1;
            }
        }
    }
    let bytes = |g: &gridloop::loadgen::Microgrid| {
        let mut buf = Vec::new();
        g.write_csv(&mut buf).unwrap();
        buf
    };
    let again = build_microgrid(&cfg, &templates, 0).unwrap();
    let identical = bytes(&grid) == bytes(&again);
    check(
        unmatched == 0 && identical && grid.num_homes() == 200 && grid.hours() == 720,
        format!("{} homes x {} days, {unmatched} unmatched days, rerun identical {identical}", grid.num_homes(), grid.hours() / 24),
    )
}

fn forecast_whitening() -> Outcome {
    let day: Vec<f64> = (0..24).map(|h| 250.0 + 80.0 * (h as f64 / 24.0 * std::f64::consts::TAU).sin()).collect();
    let periodic: Vec<f64> = day.iter().cycle().take(24 * 32).copied().collect();
    let model = fit_seasonal_ar(&periodic[..672], 2).unwrap();
    let fc = model.forecast(96);
    let worst_fc = fc.iter().zip(&periodic[672..]).map(|(f, y)| (f - y).abs()).fold(0.0, f64::max);
    let worst_train = model.train_residuals.iter().map(|r| r.abs()).fold(0.0, f64::max);
    let periodic_ok = worst_fc < 1e-12 && worst_train < 1e-12;

    let cfg = ExperimentConfig::default();
    let templates = load_templates(&cfg.templates).unwrap();
    let mut worst_fraction = 1.0_f64;
    let mut orders = std::collections::BTreeSet::new();
    for rep in 0..5 {
        let grid = build_microgrid(&cfg, &templates, rep).unwrap();
        for &kappa in &cfg.kappas {
            let observed = gridloop::experiment::simulate_nominal(&cfg, &grid, kappa).unwrap().observed();
            let model = fit_forecaster(&cfg, &observed[..cfg.train_hours()]).unwrap();
            orders.insert(model.order());
            let r = acf(&model.train_residuals, 24);
            let band = 1.96 / (model.train_residuals.len() as f64).sqrt();
            let inside = r[1..].iter().filter(|v| v.abs() <= band).count() as f64 / 24.0;
            worst_fraction = worst_fraction.min(inside);
        }
    }
    check(
        periodic_ok && worst_fraction >= 0.8,
        format!(
            "periodic residuals {:.1e}/{:.1e}; worst ACF fraction in band {:.2} over 10 training series, AR orders {:?}",
            worst_train, worst_fc, worst_fraction, orders
        ),
    )
}

type Criterion = (&'static str, fn() -> Outcome, Duration);

fn main() {
    let criteria: [Criterion; 10] = [
        ("1 no-DSM identity", no_dsm_identity, Duration::from_secs(1)),
        ("2 target tracking", target_tracking, Duration::from_secs(1)),
        ("3 DSM monotonicity band", dsm_monotonicity, Duration::from_secs(30)),
        ("4 price/load equivalence", attack_equivalence, Duration::from_secs(1)),
        ("5 GLRT calibration", glrt_calibration, Duration::from_secs(5)),
        ("6 CUSUM hand oracle", cusum_oracle, Duration::from_secs(1)),
        ("7 detection reproduction", detection_reproduction, Duration::from_secs(600)),
        ("8 ROC properties", roc_properties, Duration::from_secs(5)),
        ("9 bootstrap fidelity", bootstrap_fidelity, Duration::from_secs(30)),
        ("10 forecast whitening", forecast_whitening, Duration::from_secs(30)),
    ];
    let mut failed = 0;
    for (name, run, budget) in criteria {
        let start = Instant::now();
        let outcome = run();
        let elapsed = start.elapsed();
        let pass = outcome.pass && elapsed < budget;
        if !pass {
            failed += 1;
        }
        println!(
            "[{}] {name}: {} ({:.2}s, budget {}s)",
            if pass { "PASS" } else { "FAIL" },
            outcome.detail,
            elapsed.as_secs_f64(),
            budget.as_secs()
        );
    }
    println!("{} of 10 criteria passed", 10 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
