use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use gridloop::attack::{AttackKind, AttackParams};
use gridloop::eval::read_detections;
use gridloop::experiment::{
    build_microgrid, evaluate_rows, load_templates, reference_params, run_detection, run_experiment,
    simulate_nominal, window_attack, write_json, write_report, ExperimentConfig, ReplicationSeeds, ATTACK_HOURS,
};
use gridloop::feedback::{Participation, SimulationTrace};
use gridloop::ingest::{load_template, write_hourly, TemplateFormat};
use gridloop::loadgen::Microgrid;
use gridloop::{Error, Result};

/// Closed-loop micro-grid simulation with attack injection and detection.
#[derive(Parser)]
#[command(name = "gridloop", version)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Experiment configuration (JSON). Defaults apply to missing fields.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed; overrides the configuration.
    #[arg(long, global = true, env = "GRIDLOOP_SEED")]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Directory of minute-resolution template CSVs instead of the synthetic generator.
    #[arg(long, global = true)]
    templates: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Resample minute-resolution template files to hourly energy.
    Ingest {
        /// `minute,kw` files; defaults to every CSV under --templates.
        inputs: Vec<PathBuf>,
    },
    /// Bootstrap the micro-grid's household base loads.
    Synth {
        #[arg(long, default_value_t = 0)]
        replication: usize,
    },
    /// Run the attack-free pricing loop over a micro-grid.
    Simulate {
        #[arg(long)]
        grid: PathBuf,
        /// Participation fraction for every home; defaults to the configuration.
        #[arg(long)]
        kappa: Option<f64>,
    },
    /// Add an aggregate load attack to a trace, by default over its last 24 hours.
    Attack {
        #[arg(long)]
        trace: PathBuf,
        #[arg(long)]
        kind: AttackKind,
        /// Sudden-attack level.
        #[arg(long)]
        level: Option<f64>,
        /// Ramp increment per hour.
        #[arg(long)]
        step: Option<f64>,
        /// Point attacks as `offset:value` pairs, offsets counted from the window start.
        #[arg(long, value_delimiter = ',')]
        points: Vec<String>,
        /// First attacked hour.
        #[arg(long)]
        start: Option<usize>,
        #[arg(long, default_value_t = ATTACK_HOURS)]
        hours: usize,
    },
    /// Fit the forecaster, train the classifiers and score the test hours of a trace.
    Detect {
        #[arg(long)]
        trace: PathBuf,
        #[arg(long, default_value_t = 0)]
        replication: usize,
        #[command(flatten)]
        tags: Tags,
    },
    /// Recompute metrics and ROC curves from a detections file.
    Evaluate {
        #[arg(long)]
        detections: PathBuf,
        #[command(flatten)]
        tags: Tags,
    },
    /// Run the full scenario grid.
    Run,
}

/// Labels copied into `metrics.json`.
#[derive(Args)]
struct Tags {
    #[arg(long)]
    kappa: Option<f64>,
    #[arg(long)]
    attack_type: Option<String>,
}

impl Tags {
    fn resolve(&self, trace: Option<&Path>) -> (f64, String) {
        let from_scenario = trace
            .and_then(|t| t.parent())
            .map(|d| d.join("scenario.json"))
            .and_then(|p| fs::read_to_string(p).ok())
            .and_then(|s| serde_json::from_str::<serde_json::Value>(&s).ok());
        let kappa = self
            .kappa
            .or_else(|| from_scenario.as_ref().and_then(|v| v["key"]["kappa"].as_f64()))
            .unwrap_or(f64::NAN);
        let attack_type = self
            .attack_type
            .clone()
            .or_else(|| from_scenario.as_ref().and_then(|v| v["key"]["attack_type"].as_str().map(String::from)))
            .unwrap_or_default();
        (kappa, attack_type)
    }
}

fn load_config(common: &Common) -> Result<ExperimentConfig> {
    let mut cfg = match &common.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    if let Some(dir) = &common.templates {
        cfg.templates.dir = Some(dir.clone());
    }
    if let Some(out) = &common.out {
        cfg.output_dir = out.clone();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn out_dir(cfg: &ExperimentConfig) -> Result<&Path> {
    fs::create_dir_all(&cfg.output_dir)?;
    Ok(&cfg.output_dir)
}

fn parse_points(raw: &[String]) -> Result<Vec<(usize, f64)>> {
    raw.iter()
        .map(|p| {
            let bad = || Error::InvalidAttack(format!("point `{p}` is not `offset:value`"));
            let (h, v) = p.split_once(':').ok_or_else(bad)?;
            Ok((h.trim().parse().map_err(|_| bad())?, v.trim().parse().map_err(|_| bad())?))
        })
        .collect()
}

fn run(cli: Cli) -> Result<bool> {
    let cfg = load_config(&cli.common)?;
    match cli.command {
        Command::Ingest { inputs } => {
            let inputs = if inputs.is_empty() {
                let dir = cfg
                    .templates
                    .dir
                    .clone()
                    .ok_or_else(|| Error::InvalidConfig("give input files or --templates".into()))?;
                let mut files: Vec<PathBuf> = fs::read_dir(dir)?
                    .filter_map(|e| e.ok().map(|e| e.path()))
                    .filter(|p| p.extension().is_some_and(|x| x == "csv"))
                    .collect();
                files.sort();
                files
            } else {
                inputs
            };
            let out = out_dir(&cfg)?;
            for input in inputs {
                let hourly = load_template(&input, TemplateFormat::MinuteCsv)?.to_hourly()?;
                let path = out.join(format!("{}.hourly.csv", hourly.id));
                write_hourly(&hourly, BufWriter::new(File::create(&path)?))?;
                println!("{} -> {} ({} hours)", input.display(), path.display(), hourly.len());
            }
        }
        Command::Synth { replication } => {
            let templates = load_templates(&cfg.templates)?;
            let grid = build_microgrid(&cfg, &templates, replication)?;
            let path = out_dir(&cfg)?.join("microgrid.csv");
            grid.write_csv(BufWriter::new(File::create(&path)?))?;
            println!("{} homes x {} hours -> {}", grid.num_homes(), grid.hours(), path.display());
        }
        Command::Simulate { grid, kappa } => {
            let micro = Microgrid::read_csv(&grid)?;
            let kappa = match (kappa, &cfg.grid.kappa) {
                (Some(k), _) => k,
                (None, Participation::Uniform(k)) => *k,
                (None, Participation::PerHome(_)) => {
                    return Err(Error::InvalidConfig("per-home participation needs --kappa for this subcommand".into()))
                }
            };
            let trace = simulate_nominal(&cfg, &micro, kappa)?;
            let path = out_dir(&cfg)?.join("trace.csv");
            trace.write_csv(BufWriter::new(File::create(&path)?))?;
            println!("mean observed load {:.3} kWh -> {}", trace.mean_observed(), path.display());
        }
        Command::Attack {
            trace,
            kind,
            level,
            step,
            points,
            start,
            hours,
        } => {
            let mut t = SimulationTrace::read_csv(&trace)?;
            let len = t.steps.len();
            let start = start.unwrap_or(len.saturating_sub(hours));
            let defaults = reference_params(kind);
            let params = match kind {
                AttackKind::Ramp => AttackParams::ramp(step.or(defaults.step).unwrap_or_default()),
                AttackKind::Sudden => AttackParams::sudden(level.or(defaults.level).unwrap_or_default()),
                AttackKind::Point if points.is_empty() => defaults,
                AttackKind::Point => AttackParams::point(parse_points(&points)?),
            };
            let schedule = window_attack(kind, &params, start..start + hours)?;
            if schedule.end > len {
                return Err(Error::InvalidAttack(format!(
                    "window {}..{} exceeds the {len}-hour trace",
                    schedule.start, schedule.end
                )));
            }
            t.inject_post_hoc(&schedule);
            let out = out_dir(&cfg)?;
            t.write_csv(BufWriter::new(File::create(out.join("trace.csv"))?))?;
            write_json(&out.join("attack.json"), &schedule.to_spec())?;
            println!("{kind} attack on hours {}..{} -> {}", schedule.start, schedule.end, out.display());
        }
        Command::Detect {
            trace,
            replication,
            tags,
        } => {
            let t = SimulationTrace::read_csv(&trace)?;
            let seeds = ReplicationSeeds::new(cfg.seed, replication);
            let detection = run_detection(&cfg, &t.observed(), &t.labels(), &seeds)?;
            let (kappa, attack_type) = tags.resolve(Some(&trace));
            let report = gridloop::experiment::evaluate_all(&detection.scores, kappa, &attack_type)?;
            let out = out_dir(&cfg)?;
            write_report(out, &report)?;
            for m in &report.metrics {
                println!("{:<15} accuracy {:.4} auc {:.4}", m.detector, m.accuracy, m.auc);
            }
        }
        Command::Evaluate { detections, tags } => {
            let rows = read_detections(&detections)?;
            let (kappa, attack_type) = tags.resolve(Some(&detections));
            let report = evaluate_rows(&rows, kappa, &attack_type)?;
            let out = out_dir(&cfg)?;
            write_json(&out.join("metrics.json"), &report.metrics)?;
            gridloop::eval::write_roc_csv(&out.join("roc.csv"), &report.rocs)?;
            for m in &report.metrics {
                println!("{:<15} accuracy {:.4} auc {:.4}", m.detector, m.accuracy, m.auc);
            }
        }
        Command::Run => {
            let summary = run_experiment(&cfg)?;
            let failures = summary.failures();
            println!(
                "{} scenarios, {} failed -> {}",
                summary.scenarios.len(),
                failures,
                cfg.output_dir.display()
            );
            return Ok(failures == 0);
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
