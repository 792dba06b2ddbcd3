//! The scenario grid: participation level × attack type × replication.
//!
//! Every scenario simulates a nominal month on a bootstrapped micro-grid,
//! adds a reference attack to the last test day, fits the seasonal-AR filter
//! on the training days and runs all five detectors on the test hours. The
//! stage functions here are the same ones the command-line subcommands call,
//! so composing the subcommands reproduces [`run_experiment`] exactly.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use rand::{Rng, RngCore};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::attack::{make_schedule, reference, AttackKind, AttackMode, AttackParams, AttackSchedule};
use crate::detect::{glrt_detect, make_features, train_classifier, ClassifierKind, GlrtConfig, SupervisedSet, LAG};
use crate::error::{Error, Result};
use crate::eval::{
    evaluate_scores, group_detections, write_detections, write_roc_csv, DetectionRow, DetectorMetrics, DetectorScores,
    RocCurve,
};
use crate::feedback::{simulate, GridConfig, Injection, Participation, SimulationTrace};
use crate::forecast::{fit_seasonal_ar, residuals, select_ar_order, Persistence, SeasonalArModel};
use crate::ingest::{load_template, synthetic_hourly_templates, LoadSeries, SyntheticProfile, TemplateFormat};
use crate::loadgen::{synthesize_microgrid, BootstrapConfig, Microgrid};

/// Source of the template homes the micro-grid is bootstrapped from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TemplateConfig {
    /// Directory of `minute,kw` CSV files; the synthetic generator is used when absent.
    pub dir: Option<PathBuf>,
    pub synthetic_count: usize,
    pub synthetic_days: usize,
    /// Fixed across replications so every replication resamples the same templates.
    pub synthetic_seed: u64,
}

impl Default for TemplateConfig {
    fn default() -> Self {
        Self {
            dir: None,
            synthetic_count: 7,
            synthetic_days: 56,
            synthetic_seed: 2017,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DetectorConfig {
    pub glrt_window: usize,
    /// Fixed AR order for the seasonal-AR forecaster; `None` selects it by BIC.
    pub ar_order: Option<usize>,
    /// Largest order considered by the selection.
    pub max_ar_order: usize,
}

impl Default for DetectorConfig {
    fn default() -> Self {
        Self {
            glrt_window: 24,
            ar_order: None,
            max_ar_order: 24,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub grid: GridConfig,
    pub bootstrap: BootstrapConfig,
    pub kappas: Vec<f64>,
    pub attack_types: Vec<AttackKind>,
    pub train_days: usize,
    pub test_hours: usize,
    pub replications: usize,
    pub output_dir: PathBuf,
    pub seed: u64,
    pub templates: TemplateConfig,
    pub detectors: DetectorConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            grid: GridConfig::default(),
            bootstrap: BootstrapConfig::default(),
            kappas: vec![0.1, 0.9],
            attack_types: AttackKind::ALL.to_vec(),
            train_days: 28,
            test_hours: 48,
            replications: 1,
            output_dir: PathBuf::from("runs"),
            seed: 0,
            templates: TemplateConfig::default(),
            detectors: DetectorConfig::default(),
        }
    }
}

/// Length of the attacked stretch at the end of the test hours.
pub const ATTACK_HOURS: usize = 24;

impl ExperimentConfig {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path)?;
        let cfg: Self = serde_json::from_str(&text).map_err(|e| Error::parse(path, e.line(), e.to_string()))?;
        Ok(cfg)
    }

    pub fn train_hours(&self) -> usize {
        self.train_days * 24
    }

    pub fn total_hours(&self) -> usize {
        self.train_hours() + self.test_hours
    }

    pub fn validate(&self) -> Result<()> {
        self.grid.validate()?;
        self.bootstrap.validate()?;
        if self.train_days < 4 {
            return Err(Error::config("train_days must be at least 4"));
        }
        if self.test_hours < 2 * ATTACK_HOURS {
            return Err(Error::config(format!("test_hours must be at least {}", 2 * ATTACK_HOURS)));
        }
        if self.replications == 0 {
            return Err(Error::config("replications must be at least 1"));
        }
        if self.bootstrap.num_days * self.bootstrap.block_len < self.total_hours() {
            return Err(Error::config(format!(
                "bootstrap produces {} hours but the protocol needs {}",
                self.bootstrap.num_days * self.bootstrap.block_len,
                self.total_hours()
            )));
        }
        if let Some(k) = self.kappas.iter().find(|k| !(0.0..=1.0).contains(*k)) {
            return Err(Error::config(format!("participation fraction {k} outside [0, 1]")));
        }
        if self.detectors.ar_order.unwrap_or(0) > 24 || self.detectors.max_ar_order > 24 {
            return Err(Error::config("AR orders above 24 are not supported"));
        }
        if self.detectors.glrt_window == 0 {
            return Err(Error::config("glrt_window must be at least 1"));
        }
        Ok(())
    }

    /// Hour range of the reference attack: the last [`ATTACK_HOURS`] test hours.
    pub fn attack_window(&self) -> std::ops::Range<usize> {
        self.total_hours() - ATTACK_HOURS..self.total_hours()
    }
}

/// Independent 64-bit seed for `stream` under `base`.
pub fn derive_seed(base: u64, stream: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(base);
    rng.set_stream(stream);
    rng.next_u64()
}

/// Seeds of one replication. Shared by every participation level and attack
/// type, so scenarios within a replication see the same homes and the same
/// training attacks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReplicationSeeds {
    pub grid: u64,
    pub training: u64,
    pub forest: u64,
}

impl ReplicationSeeds {
    pub fn new(seed: u64, replication: usize) -> Self {
        let base = derive_seed(seed, replication as u64);
        Self {
            grid: derive_seed(base, 0),
            training: derive_seed(base, 1),
            forest: derive_seed(base, 2),
        }
    }
}

pub fn load_templates(cfg: &TemplateConfig) -> Result<Vec<LoadSeries>> {
    match &cfg.dir {
        Some(dir) => {
            let mut paths: Vec<PathBuf> = fs::read_dir(dir)?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| p.extension().is_some_and(|x| x == "csv"))
                .collect();
            paths.sort();
            if paths.is_empty() {
                return Err(Error::config(format!("no template CSV files in {}", dir.display())));
            }
            paths
                .iter()
                .map(|p| load_template(p, TemplateFormat::MinuteCsv)?.to_hourly())
                .collect()
        }
        None => synthetic_hourly_templates(
            cfg.synthetic_count,
            cfg.synthetic_days,
            cfg.synthetic_seed,
            &SyntheticProfile::default(),
        ),
    }
}

pub fn build_microgrid(cfg: &ExperimentConfig, templates: &[LoadSeries], replication: usize) -> Result<Microgrid> {
    let bootstrap = BootstrapConfig {
        seed: ReplicationSeeds::new(cfg.seed, replication).grid,
        ..cfg.bootstrap
    };
    synthesize_microgrid(templates, cfg.grid.homes, &bootstrap)
}

/// Grid configuration with a uniform participation fraction.
pub fn grid_for_kappa(cfg: &ExperimentConfig, kappa: f64) -> GridConfig {
    GridConfig {
        kappa: Participation::Uniform(kappa),
        ..cfg.grid.clone()
    }
}

/// Attack-free run over the protocol hours with the naive loop forecaster.
pub fn simulate_nominal(cfg: &ExperimentConfig, grid: &Microgrid, kappa: f64) -> Result<SimulationTrace> {
    let mut trace = simulate(grid, &grid_for_kappa(cfg, kappa), &mut Persistence::Naive, None, Injection::PostHoc)?;
    trace.steps.truncate(cfg.total_hours());
    trace.home_loads.truncate(cfg.total_hours());
    trace.clamp_events.retain(|c| c.hour < cfg.total_hours());
    Ok(trace)
}

/// Reference parameters for `kind`; point hours are offsets into the attack window.
pub fn reference_params(kind: AttackKind) -> AttackParams {
    match kind {
        AttackKind::Ramp => AttackParams::ramp(reference::RAMP_STEP),
        AttackKind::Sudden => AttackParams::sudden(reference::SUDDEN_LEVEL),
        AttackKind::Point => AttackParams::point(reference::POINTS.iter().map(|&(h, v)| (h - ATTACK_HOURS, v))),
    }
}

/// Load-mode schedule over `window`, with point offsets shifted to absolute hours.
pub fn window_attack(kind: AttackKind, params: &AttackParams, window: std::ops::Range<usize>) -> Result<AttackSchedule> {
    let mut params = params.clone();
    if let Some(points) = params.points.take() {
        params.points = Some(points.into_iter().map(|(h, v)| (h + window.start, v)).collect());
    }
    make_schedule(kind, &params, window, Vec::new(), AttackMode::Load)
}

/// Nominal training series followed by an attacked copy.
///
/// The copy is cut into three equal parts, one per attack type. Each part
/// alternates attack-free and attacked days, starting attack-free; every
/// attacked day draws a fresh ramp step in `[2, 10]`, sudden level in
/// `[50, 300]`, or five point hours with values in `[50, 300]`.
pub fn training_series(train: &[f64], seed: u64) -> (Vec<f64>, Vec<bool>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = train.len();
    let mut attacked = train.to_vec();
    let mut labels = vec![false; n];
    let part = n / AttackKind::ALL.len();
    for (p, kind) in AttackKind::ALL.into_iter().enumerate() {
        let start = p * part;
        let end = if p + 1 == AttackKind::ALL.len() { n } else { start + part };
        let mut day = start + 24;
        while day + 24 <= end {
            let mut magnitudes = [0.0; 24];
            match kind {
                AttackKind::Ramp => {
                    let step = rng.gen_range(2.0..=10.0);
                    for (k, m) in magnitudes.iter_mut().enumerate() {
                        *m = step * (k + 1) as f64;
                    }
                }
                AttackKind::Sudden => magnitudes = [rng.gen_range(50.0..=300.0); 24],
                AttackKind::Point => {
                    for h in rand::seq::index::sample(&mut rng, 24, 5) {
                        magnitudes[h] = rng.gen_range(50.0..=300.0);
                    }
                }
            }
            for (k, m) in magnitudes.iter().enumerate() {
                if *m != 0.0 {
                    attacked[day + k] += m;
                    labels[day + k] = true;
                }
            }
            day += 48;
        }
    }
    let mut series = train.to_vec();
    series.extend(attacked);
    let mut all_labels = vec![false; n];
    all_labels.extend(labels);
    (series, all_labels)
}

pub const DETECTORS: [&str; 5] = ["glrt", "cusum", "logreg", "gnb", "forest"];

/// Seasonal-AR fit on the training hours with the configured or selected order.
pub fn fit_forecaster(cfg: &ExperimentConfig, train: &[f64]) -> Result<SeasonalArModel> {
    let order = match cfg.detectors.ar_order {
        Some(p) => p,
        None => select_ar_order(train, cfg.detectors.max_ar_order)?,
    };
    fit_seasonal_ar(train, order)
}

/// Everything the detection stage produces before evaluation.
#[derive(Debug, Clone)]
pub struct DetectionRun {
    pub model: SeasonalArModel,
    pub forecast: Vec<f64>,
    pub residuals: Vec<f64>,
    pub sigma: f64,
    /// One entry per detector, in [`DETECTORS`] order, then `cusum_interval`.
    pub scores: Vec<DetectorScores>,
}

/// Runs every detector on the test hours of `observed`.
///
/// GLRT scores are standardized window means `mean * sqrt(n) / sigma`, CUSUM
/// scores are standardized residuals, classifier scores are attack
/// probabilities. Decision thresholds are chosen later from the ROC.
pub fn run_detection(
    cfg: &ExperimentConfig,
    observed: &[f64],
    labels: &[bool],
    seeds: &ReplicationSeeds,
) -> Result<DetectionRun> {
    if observed.len() != cfg.total_hours() || labels.len() != observed.len() {
        return Err(Error::LengthMismatch {
            left: observed.len(),
            right: cfg.total_hours(),
        });
    }
    let split = cfg.train_hours();
    let (train, test) = observed.split_at(split);
    let test_labels = &labels[split..];
    let hours: Vec<usize> = (split..observed.len()).collect();

    let model = fit_forecaster(cfg, train)?;
    let forecast = model.forecast(test.len());
    let res = residuals(test, &forecast, model.sigma)?;
    let sigma = res.sigma;

    let glrt = glrt_detect(&res.values, &GlrtConfig::new(cfg.detectors.glrt_window, 0.5, sigma)?);
    let glrt_scores = glrt
        .iter()
        .enumerate()
        .map(|(t, s)| {
            let n = (t + 1).min(cfg.detectors.glrt_window) as f64;
            s.score * n.sqrt() / sigma
        })
        .collect();
    let standardized: Vec<f64> = res.values.iter().map(|r| r / sigma).collect();

    let (series, series_labels) = training_series(train, seeds.training);
    let set = make_features(&series, &series_labels, LAG)?;
    let mut test_series = train[split - LAG..].to_vec();
    test_series.extend_from_slice(test);
    let mut padded_labels = vec![false; LAG];
    padded_labels.extend_from_slice(test_labels);
    let test_set = make_features(&test_series, &padded_labels, LAG)?;

    let classifiers = [ClassifierKind::Logreg, ClassifierKind::Gnb, ClassifierKind::Forest]
        .into_iter()
        .map(|kind| {
            let model = train_classifier(&set, kind, seeds.forest)?;
            Ok(DetectorScores {
                detector: kind.as_str().to_string(),
                hours: hours.clone(),
                scores: model.score_all(&test_set.features),
                labels: test_labels.to_vec(),
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let entry = |name: &str, scores: Vec<f64>| DetectorScores {
        detector: name.to_string(),
        hours: hours.clone(),
        scores,
        labels: test_labels.to_vec(),
    };
    let mut scores = vec![entry("glrt", glrt_scores), entry("cusum", standardized.clone())];
    scores.extend(classifiers);
    scores.push(entry("cusum_interval", standardized));
    Ok(DetectionRun {
        model,
        forecast,
        residuals: res.values,
        sigma,
        scores,
    })
}

/// Training set used by [`run_detection`], exposed for inspection.
pub fn supervised_training_set(train: &[f64], seeds: &ReplicationSeeds) -> Result<SupervisedSet> {
    let (series, labels) = training_series(train, seeds.training);
    make_features(&series, &labels, LAG)
}

/// Metrics, ROC curves and decision rows for a set of detector scores.
#[derive(Debug, Clone)]
pub struct EvaluationReport {
    pub metrics: Vec<DetectorMetrics>,
    pub rocs: Vec<(String, RocCurve)>,
    pub rows: Vec<DetectionRow>,
}

pub fn evaluate_all(scores: &[DetectorScores], kappa: f64, attack_type: &str) -> Result<EvaluationReport> {
    let mut report = EvaluationReport {
        metrics: Vec::new(),
        rocs: Vec::new(),
        rows: Vec::new(),
    };
    for d in scores {
        let ev = evaluate_scores(d, kappa, attack_type)?;
        for (k, &hour) in d.hours.iter().enumerate() {
            report.rows.push(DetectionRow {
                hour,
                detector: d.detector.clone(),
                score: d.scores[k],
                decision: u8::from(ev.decisions[k]),
                label: u8::from(d.labels[k]),
            });
        }
        report.rocs.push((d.detector.clone(), ev.roc));
        report.metrics.push(ev.metrics);
    }
    Ok(report)
}

/// Re-evaluates rows read back from a detections file.
pub fn evaluate_rows(rows: &[DetectionRow], kappa: f64, attack_type: &str) -> Result<EvaluationReport> {
    evaluate_all(&group_detections(rows), kappa, attack_type)
}

pub fn write_report(dir: &Path, report: &EvaluationReport) -> Result<()> {
    fs::create_dir_all(dir)?;
    write_detections(&dir.join("detections.csv"), &report.rows)?;
    write_json(&dir.join("metrics.json"), &report.metrics)?;
    write_roc_csv(&dir.join("roc.csv"), &report.rocs)
}

pub fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioKey {
    pub kappa: f64,
    pub attack_type: AttackKind,
    pub replication: usize,
}

impl ScenarioKey {
    pub fn id(&self) -> String {
        format!("kappa{}_{}_rep{:02}", self.kappa, self.attack_type, self.replication)
    }
}

/// Contents of `scenario.json`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScenarioInfo {
    pub key: ScenarioKey,
    pub seeds: ReplicationSeeds,
    pub attack: crate::attack::AttackSpec,
    pub ar_order: usize,
    pub ar_coefficients: Vec<f64>,
    pub sigma: f64,
    pub clamp_events: usize,
}

pub struct ScenarioOutcome {
    pub trace: SimulationTrace,
    pub run: DetectionRun,
    pub report: EvaluationReport,
    pub info: ScenarioInfo,
}

/// One scenario in memory, without touching the filesystem.
pub fn run_scenario(cfg: &ExperimentConfig, grid: &Microgrid, key: &ScenarioKey) -> Result<ScenarioOutcome> {
    let seeds = ReplicationSeeds::new(cfg.seed, key.replication);
    let mut trace = simulate_nominal(cfg, grid, key.kappa)?;
    let attack = window_attack(key.attack_type, &reference_params(key.attack_type), cfg.attack_window())?;
    trace.inject_post_hoc(&attack);
    let run = run_detection(cfg, &trace.observed(), &trace.labels(), &seeds)?;
    let report = evaluate_all(&run.scores, key.kappa, key.attack_type.as_str())?;
    let info = ScenarioInfo {
        key: key.clone(),
        seeds,
        attack: attack.to_spec(),
        ar_order: run.model.order(),
        ar_coefficients: run.model.coefficients.clone(),
        sigma: run.sigma,
        clamp_events: trace.clamp_events.len(),
    };
    Ok(ScenarioOutcome {
        trace,
        run,
        report,
        info,
    })
}

pub fn write_scenario(dir: &Path, outcome: &ScenarioOutcome) -> Result<()> {
    fs::create_dir_all(dir)?;
    outcome.trace.write_csv(BufWriter::new(File::create(dir.join("trace.csv"))?))?;
    write_report(dir, &outcome.report)?;
    write_json(&dir.join("scenario.json"), &outcome.info)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScenarioSummary {
    pub id: String,
    pub key: ScenarioKey,
    pub dir: Option<PathBuf>,
    pub error: Option<String>,
    pub metrics: Vec<DetectorMetrics>,
}

/// Mean of one metric over replications, skipping undefined values.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AggregateRow {
    pub detector: String,
    pub attack_type: String,
    pub kappa: f64,
    pub metric: String,
    pub mean: Option<f64>,
    pub defined: usize,
    pub replications: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Summary {
    pub config: ExperimentConfig,
    pub scenarios: Vec<ScenarioSummary>,
    pub aggregate: Vec<AggregateRow>,
}

impl Summary {
    pub fn failures(&self) -> usize {
        self.scenarios.iter().filter(|s| s.error.is_some()).count()
    }

    /// Mean of `metric` for one cell of the aggregate table.
    pub fn mean(&self, detector: &str, attack_type: AttackKind, kappa: f64, metric: &str) -> Option<f64> {
        self.aggregate
            .iter()
            .find(|r| r.detector == detector && r.attack_type == attack_type.as_str() && r.kappa == kappa && r.metric == metric)
            .and_then(|r| r.mean)
    }
}

pub const SUMMARY_METRICS: [&str; 5] = ["accuracy", "precision", "recall", "fpr", "auc"];

fn metric_value(m: &DetectorMetrics, name: &str) -> f64 {
    match name {
        "accuracy" => m.accuracy,
        "precision" => m.precision,
        "recall" => m.recall,
        "fpr" => m.fpr,
        "auc" => m.auc,
        _ => f64::NAN,
    }
}

fn aggregate(cfg: &ExperimentConfig, scenarios: &[ScenarioSummary]) -> Vec<AggregateRow> {
    let mut detectors: Vec<String> = DETECTORS.iter().map(|d| d.to_string()).collect();
    detectors.push("cusum_interval".to_string());
    let mut rows = Vec::new();
    for detector in &detectors {
        for kind in &cfg.attack_types {
            for &kappa in &cfg.kappas {
                let cell: Vec<&DetectorMetrics> = scenarios
                    .iter()
                    .filter(|s| s.key.attack_type == *kind && s.key.kappa == kappa)
                    .flat_map(|s| s.metrics.iter().filter(|m| &m.detector == detector))
                    .collect();
                for metric in SUMMARY_METRICS {
                    let values: Vec<f64> = cell.iter().map(|m| metric_value(m, metric)).filter(|v| !v.is_nan()).collect();
                    rows.push(AggregateRow {
                        detector: detector.clone(),
                        attack_type: kind.as_str().to_string(),
                        kappa,
                        metric: metric.to_string(),
                        mean: (!values.is_empty()).then(|| values.iter().sum::<f64>() / values.len() as f64),
                        defined: values.len(),
                        replications: cell.len(),
                    });
                }
            }
        }
    }
    rows
}

fn write_summary_csv(path: &Path, rows: &[AggregateRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["detector", "attack_type", "kappa", "metric", "mean", "defined", "replications"])?;
    for r in rows {
        w.write_record([
            r.detector.clone(),
            r.attack_type.clone(),
            r.kappa.to_string(),
            r.metric.clone(),
            r.mean.map_or_else(String::new, |m| m.to_string()),
            r.defined.to_string(),
            r.replications.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// All scenarios, in `(replication, kappa, attack type)` order.
pub fn scenario_keys(cfg: &ExperimentConfig) -> Vec<ScenarioKey> {
    let mut keys = Vec::new();
    for replication in 0..cfg.replications {
        for &kappa in &cfg.kappas {
            for &attack_type in &cfg.attack_types {
                keys.push(ScenarioKey {
                    kappa,
                    attack_type,
                    replication,
                });
            }
        }
    }
    keys
}

/// Runs every scenario in parallel and, when `write` is set, emits the
/// per-scenario directories plus `summary.json` and `summary.csv` under
/// `cfg.output_dir`. A failing scenario is recorded and does not stop the others.
pub fn run_experiment_with(cfg: &ExperimentConfig, write: bool) -> Result<Summary> {
    cfg.validate()?;
    let templates = load_templates(&cfg.templates)?;
    if write {
        fs::create_dir_all(&cfg.output_dir)?;
    }
    let grids: Vec<Result<Microgrid>> = (0..cfg.replications)
        .into_par_iter()
        .map(|r| build_microgrid(cfg, &templates, r))
        .collect();
    let scenarios: Vec<ScenarioSummary> = scenario_keys(cfg)
        .into_par_iter()
        .map(|key| {
            let id = key.id();
            let result = grids[key.replication]
                .as_ref()
                .map_err(|e| Error::config(e.to_string()))
                .and_then(|grid| run_scenario(cfg, grid, &key))
                .and_then(|outcome| {
                    let dir = cfg.output_dir.join(&id);
                    if write {
                        write_scenario(&dir, &outcome)?;
                    }
                    Ok((write.then_some(PathBuf::from(&id)), outcome.report.metrics))
                });
            match result {
                Ok((dir, metrics)) => ScenarioSummary {
                    id,
                    key,
                    dir,
                    error: None,
                    metrics,
                },
                Err(e) => {
                    log::error!("scenario {id} failed: {e}");
                    ScenarioSummary {
                        id,
                        key,
                        dir: None,
                        error: Some(e.to_string()),
                        metrics: Vec::new(),
                    }
                }
            }
        })
        .collect();
    let summary = Summary {
        aggregate: aggregate(cfg, &scenarios),
        config: cfg.clone(),
        scenarios,
    };
    if write {
        write_json(&cfg.output_dir.join("summary.json"), &summary)?;
        write_summary_csv(&cfg.output_dir.join("summary.csv"), &summary.aggregate)?;
    }
    Ok(summary)
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Summary> {
    run_experiment_with(cfg, true)
}
