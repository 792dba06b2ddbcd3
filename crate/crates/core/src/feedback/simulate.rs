use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{household_dsm_load, GridConfig};
use crate::attack::{apply_load_attack, apply_price_attack, AttackMode, AttackSchedule};
use crate::error::{Error, Result};
use crate::forecast::Forecaster;
use crate::loadgen::Microgrid;

/// Where an attack enters the loop.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Injection {
    /// Attacks act on the homes during the run, so attacked loads feed back
    /// into later prices.
    #[default]
    ClosedLoop,
    /// The loop runs clean; the attack is added to the finished observed load.
    PostHoc,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceStep {
    pub hour: usize,
    pub price: f64,
    pub base_load: f64,
    /// `None` on warm-up hours where the forecaster had too little history;
    /// those hours are priced at 1 so every home draws its base load.
    pub forecast: Option<f64>,
    pub target: f64,
    pub lstar: f64,
    pub observed_load: f64,
    pub attack_truth: bool,
}

/// A household (or, with `home = None`, aggregate) load pushed below zero by
/// an attack and floored.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClampEvent {
    pub hour: usize,
    pub home: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationTrace {
    pub steps: Vec<TraceStep>,
    /// Realized household loads, `home_loads[t][i]`. Empty for traces read from CSV.
    pub home_loads: Vec<Vec<f64>>,
    pub clamp_events: Vec<ClampEvent>,
}

const HEADER: [&str; 8] = [
    "hour",
    "price",
    "base_load",
    "forecast",
    "target",
    "lstar",
    "observed_load",
    "attack_truth",
];

impl SimulationTrace {
    pub fn observed(&self) -> Vec<f64> {
        self.steps.iter().map(|s| s.observed_load).collect()
    }

    pub fn base(&self) -> Vec<f64> {
        self.steps.iter().map(|s| s.base_load).collect()
    }

    pub fn prices(&self) -> Vec<f64> {
        self.steps.iter().map(|s| s.price).collect()
    }

    pub fn labels(&self) -> Vec<bool> {
        self.steps.iter().map(|s| s.attack_truth).collect()
    }

    pub fn mean_observed(&self) -> f64 {
        self.observed().iter().sum::<f64>() / self.steps.len() as f64
    }

    /// Adds an aggregate attack to the observed load after the fact, marking
    /// the attacked hours.
    pub fn inject_post_hoc(&mut self, attack: &AttackSchedule) {
        for step in &mut self.steps {
            let a = attack.magnitude(step.hour);
            if a != 0.0 {
                let (load, clamped) = apply_load_attack(step.observed_load, a);
                step.observed_load = load;
                step.attack_truth = true;
                if clamped {
                    self.clamp_events.push(ClampEvent {
                        hour: step.hour,
                        home: None,
                    });
                }
            }
        }
    }

    pub fn write_csv(&self, writer: impl Write) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(HEADER)?;
        for s in &self.steps {
            w.write_record([
                s.hour.to_string(),
                s.price.to_string(),
                s.base_load.to_string(),
                s.forecast.map(|f| f.to_string()).unwrap_or_default(),
                s.target.to_string(),
                s.lstar.to_string(),
                s.observed_load.to_string(),
                u8::from(s.attack_truth).to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Per-home loads as `hour,home_0,...`.
    pub fn write_home_loads(&self, writer: impl Write) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let n = self.home_loads.first().map_or(0, Vec::len);
        let mut header = vec!["hour".to_owned()];
        header.extend((0..n).map(|i| format!("home_{i}")));
        w.write_record(&header)?;
        for (t, loads) in self.home_loads.iter().enumerate() {
            let mut row = vec![t.to_string()];
            row.extend(loads.iter().map(f64::to_string));
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let mut rdr = csv::Reader::from_path(path)?;
        if rdr.headers()?.iter().ne(HEADER) {
            return Err(Error::parse(path, 1, format!("expected header `{}`", HEADER.join(","))));
        }
        let mut steps = Vec::new();
        for (i, record) in rdr.records().enumerate() {
            let line = i + 2;
            let record = record.map_err(|e| Error::parse(path, line, e.to_string()))?;
            if record.len() != HEADER.len() {
                return Err(Error::parse(path, line, "wrong field count"));
            }
            let num = |c: usize| -> Result<f64> {
                record[c]
                    .trim()
                    .parse()
                    .map_err(|_| Error::parse(path, line, format!("bad {} `{}`", HEADER[c], &record[c])))
            };
            let forecast = if record[3].trim().is_empty() { None } else { Some(num(3)?) };
            let attack_truth = match record[7].trim() {
                "0" => false,
                "1" => true,
                other => return Err(Error::parse(path, line, format!("bad attack_truth `{other}`"))),
            };
            steps.push(TraceStep {
                hour: record[0]
                    .trim()
                    .parse()
                    .map_err(|_| Error::parse(path, line, format!("bad hour `{}`", &record[0])))?,
                price: num(1)?,
                base_load: num(2)?,
                forecast,
                target: num(4)?,
                lstar: num(5)?,
                observed_load: num(6)?,
                attack_truth,
            });
        }
        Ok(Self {
            steps,
            home_loads: Vec::new(),
            clamp_events: Vec::new(),
        })
    }
}

/// Runs the hourly price/load loop over the whole micro-grid.
///
/// At each hour the forecaster sees the exact base-load history `Phi[0..t]`,
/// the pricing rule sets `P_t`, and each home responds to its (possibly
/// attacked) price. Goal 2 feeds back the realized load of the previous hour,
/// which includes closed-loop attacks.
pub fn simulate(
    grid: &Microgrid,
    cfg: &GridConfig,
    forecaster: &mut dyn Forecaster,
    attack: Option<&AttackSchedule>,
    injection: Injection,
) -> Result<SimulationTrace> {
    cfg.validate()?;
    if grid.num_homes() != cfg.homes {
        return Err(Error::config(format!(
            "grid has {} homes but the configuration expects {}",
            grid.num_homes(),
            cfg.homes
        )));
    }
    let hours = grid.hours();
    if hours < 2 {
        return Err(Error::InsufficientHistory { need: 2, have: hours });
    }
    let rule = cfg.pricing_rule();
    let base = grid.base_load();
    let n = grid.num_homes();
    let mut steps: Vec<TraceStep> = Vec::with_capacity(hours);
    let mut home_loads = Vec::with_capacity(hours);
    let mut clamp_events = Vec::new();
    let mut feedback_load = 0.0;

    for t in 0..hours {
        let target = cfg.target.at(t);
        let forecast = forecaster.predict(&base[..t]);
        let (price, lstar) = match forecast {
            Some(phi_hat) => {
                let previous = (t > 0).then(|| (cfg.target.at(t - 1), feedback_load));
                let p = rule.set_price(target, previous, phi_hat)?;
                (p.price, p.lstar)
            }
            None => (1.0, target),
        };

        let active = attack.filter(|a| a.magnitude(t) != 0.0);
        let mut loads = Vec::with_capacity(n);
        let mut post_hoc_delta = 0.0;
        for (i, home) in grid.homes().iter().enumerate() {
            let phi = home.values()[t];
            let kappa = cfg.kappa.get(i);
            let clean = household_dsm_load(phi, kappa, price, cfg.eps_dsm)?;
            let attacked = match active {
                Some(a) if a.is_victim(i) => {
                    let value = a.per_home(t, i, n);
                    match a.mode {
                        AttackMode::Price => {
                            household_dsm_load(phi, kappa, apply_price_attack(price, value)?, cfg.eps_dsm)?
                        }
                        AttackMode::Load if injection == Injection::ClosedLoop => {
                            let (l, clamped) = apply_load_attack(clean, value);
                            if clamped {
                                clamp_events.push(ClampEvent { hour: t, home: Some(i) });
                            }
                            l
                        }
                        AttackMode::Load => clean,
                    }
                }
                _ => clean,
            };
            match injection {
                Injection::ClosedLoop => loads.push(attacked),
                Injection::PostHoc => {
                    post_hoc_delta += attacked - clean;
                    loads.push(clean);
                }
            }
        }
        let clean_total: f64 = loads.iter().sum();
        let mut observed = clean_total;
        if injection == Injection::PostHoc {
            if let Some(a) = active {
                let delta = match a.mode {
                    AttackMode::Load => a.magnitude(t),
                    AttackMode::Price => post_hoc_delta,
                };
                let (l, clamped) = apply_load_attack(clean_total, delta);
                if clamped {
                    clamp_events.push(ClampEvent { hour: t, home: None });
                }
                observed = l;
            }
        }
        feedback_load = match injection {
            Injection::ClosedLoop => observed,
            Injection::PostHoc => clean_total,
        };
        steps.push(TraceStep {
            hour: t,
            price,
            base_load: base[t],
            forecast,
            target,
            lstar,
            observed_load: observed,
            attack_truth: active.is_some(),
        });
        home_loads.push(loads);
    }
    Ok(SimulationTrace {
        steps,
        home_loads,
        clamp_events,
    })
}
