//! Confusion counts, metrics, ROC curves and threshold selection.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::detect::{cusum_detect, CusumConfig};
use crate::error::{Error, Result};
use crate::stats::inverse_q;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub tp: usize,
    pub tn: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
}

impl ConfusionCounts {
    pub fn total(&self) -> usize {
        self.tp + self.tn + self.fp + self.fn_
    }
}

/// Class `true` is the attack class.
pub fn confusion(labels: &[bool], decisions: &[bool]) -> Result<ConfusionCounts> {
    if labels.len() != decisions.len() {
        return Err(Error::LengthMismatch {
            left: labels.len(),
            right: decisions.len(),
        });
    }
    let mut c = ConfusionCounts::default();
    for (&l, &d) in labels.iter().zip(decisions) {
        match (l, d) {
            (true, true) => c.tp += 1,
            (false, false) => c.tn += 1,
            (false, true) => c.fp += 1,
            (true, false) => c.fn_ += 1,
        }
    }
    Ok(c)
}

/// Serializes NaN as JSON `null` and reads `null` back as NaN.
mod nan_as_null {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else {
            s.serialize_none()
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NAN))
    }
}

/// Rates derived from a confusion matrix. A rate with a zero denominator is
/// NaN and its name is listed in `undefined`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Metrics {
    #[serde(with = "nan_as_null")]
    pub accuracy: f64,
    #[serde(with = "nan_as_null")]
    pub precision: f64,
    #[serde(with = "nan_as_null")]
    pub recall: f64,
    #[serde(with = "nan_as_null")]
    pub fpr: f64,
    #[serde(default)]
    pub undefined: Vec<String>,
}

fn ratio(num: usize, den: usize, name: &str, undefined: &mut Vec<String>) -> f64 {
    if den == 0 {
        undefined.push(name.to_string());
        f64::NAN
    } else {
        num as f64 / den as f64
    }
}

pub fn metrics(c: &ConfusionCounts) -> Metrics {
    let mut undefined = Vec::new();
    let accuracy = ratio(c.tp + c.tn, c.total(), "accuracy", &mut undefined);
    let precision = ratio(c.tp, c.tp + c.fp, "precision", &mut undefined);
    let recall = ratio(c.tp, c.tp + c.fn_, "recall", &mut undefined);
    let fpr = ratio(c.fp, c.fp + c.tn, "fpr", &mut undefined);
    Metrics {
        accuracy,
        precision,
        recall,
        fpr,
        undefined,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RocPoint {
    pub threshold: f64,
    pub fpr: f64,
    pub tpr: f64,
}

impl RocPoint {
    pub fn distance_to_corner(&self) -> f64 {
        self.fpr.hypot(1.0 - self.tpr)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RocCurve {
    pub points: Vec<RocPoint>,
    pub auc: f64,
}

fn trapezoid(points: &[RocPoint]) -> f64 {
    points
        .windows(2)
        .map(|w| (w[1].fpr - w[0].fpr) * (w[0].tpr + w[1].tpr) / 2.0)
        .sum()
}

fn class_counts(labels: &[bool]) -> Result<(usize, usize)> {
    let pos = labels.iter().filter(|&&l| l).count();
    let neg = labels.len() - pos;
    if pos == 0 || neg == 0 {
        return Err(Error::SingleClass);
    }
    Ok((pos, neg))
}

/// ROC of a continuous score where `score >= threshold` predicts an attack.
///
/// The first point has threshold `+inf` and sits at the origin; tied scores
/// move the curve in one step.
pub fn roc_curve(scores: &[f64], labels: &[bool]) -> Result<RocCurve> {
    if scores.len() != labels.len() {
        return Err(Error::LengthMismatch {
            left: scores.len(),
            right: labels.len(),
        });
    }
    let (pos, neg) = class_counts(labels)?;
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    let mut points = vec![RocPoint {
        threshold: f64::INFINITY,
        fpr: 0.0,
        tpr: 0.0,
    }];
    let (mut tp, mut fp) = (0usize, 0usize);
    for (k, &i) in order.iter().enumerate() {
        if labels[i] {
            tp += 1;
        } else {
            fp += 1;
        }
        let last_of_group = order.get(k + 1).map_or(true, |&j| scores[j] != scores[i]);
        if last_of_group {
            points.push(RocPoint {
                threshold: scores[i],
                fpr: fp as f64 / neg as f64,
                tpr: tp as f64 / pos as f64,
            });
        }
    }
    let auc = trapezoid(&points);
    Ok(RocCurve { points, auc })
}

impl RocCurve {
    /// Builds a curve from operating points of a thresholded detector,
    /// sorted by `(fpr, tpr)`. The origin and `(1, 1)` are added with the
    /// given thresholds when the sweep does not reach them.
    pub fn from_sweep(mut points: Vec<RocPoint>, origin_threshold: f64, corner_threshold: f64) -> Self {
        points.sort_by(|a, b| a.fpr.total_cmp(&b.fpr).then(a.tpr.total_cmp(&b.tpr)));
        if !points.iter().any(|p| p.fpr == 0.0 && p.tpr == 0.0) {
            points.insert(
                0,
                RocPoint {
                    threshold: origin_threshold,
                    fpr: 0.0,
                    tpr: 0.0,
                },
            );
        }
        if !points.iter().any(|p| p.fpr == 1.0 && p.tpr == 1.0) {
            points.push(RocPoint {
                threshold: corner_threshold,
                fpr: 1.0,
                tpr: 1.0,
            });
        }
        let auc = trapezoid(&points);
        Self { points, auc }
    }

    pub fn write_csv(&self, detector: &str, out: &mut impl Write) -> Result<()> {
        for p in &self.points {
            writeln!(out, "{detector},{},{},{}", p.threshold, p.fpr, p.tpr)?;
        }
        Ok(())
    }
}

pub const ROC_HEADER: &str = "detector,threshold,fpr,tpr";

/// Point closest to `(0, 1)`; ties go to higher TPR, then lower threshold.
pub fn best_threshold(roc: &RocCurve) -> RocPoint {
    *roc.points
        .iter()
        .min_by(|a, b| {
            a.distance_to_corner()
                .total_cmp(&b.distance_to_corner())
                .then(b.tpr.total_cmp(&a.tpr))
                .then(a.threshold.total_cmp(&b.threshold))
        })
        .expect("ROC curve has at least the sentinel points")
}

/// Number of grid points in the sequential-detector threshold sweeps.
pub const SWEEP_POINTS: usize = 101;

/// Drift of the CUSUM recursion on standardized residuals.
pub const CUSUM_DRIFT_SIGMAS: f64 = 0.5;

/// Largest alarm threshold of the CUSUM sweep, in residual standard deviations.
pub const CUSUM_MAX_SIGMAS: f64 = 6.0;

/// How a detector's per-hour score turns into decisions at a swept threshold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScoreRule {
    /// Classifier probability; alarm when `score >= threshold`.
    Probability,
    /// Standardized window mean `z`; alarm at false-alarm level `p` when `z > Q^-1(p)`.
    Glrt,
    /// Standardized residual fed through a reset CUSUM; threshold in standard deviations.
    Cusum,
    /// As `Cusum`, flagging every hour from the last zero of the statistic up to an alarm.
    CusumInterval,
}

impl ScoreRule {
    pub fn for_detector(detector: &str) -> Self {
        match detector {
            "glrt" => ScoreRule::Glrt,
            "cusum" => ScoreRule::Cusum,
            "cusum_interval" => ScoreRule::CusumInterval,
            _ => ScoreRule::Probability,
        }
    }

    pub fn decisions(self, scores: &[f64], threshold: f64) -> Vec<bool> {
        match self {
            ScoreRule::Probability => scores.iter().map(|&s| s >= threshold).collect(),
            ScoreRule::Glrt => {
                let q = inverse_q(threshold);
                scores.iter().map(|&z| z > q).collect()
            }
            ScoreRule::Cusum | ScoreRule::CusumInterval => {
                // built directly: sweeps use thresholds the validated constructor rejects
                let cfg = CusumConfig {
                    drift: CUSUM_DRIFT_SIGMAS,
                    threshold,
                };
                let out = cusum_detect(scores, &cfg);
                if self == ScoreRule::Cusum {
                    out.decisions
                } else {
                    out.interval_decisions
                }
            }
        }
    }

    fn sweep_grid(self) -> Vec<f64> {
        let n = SWEEP_POINTS - 1;
        match self {
            ScoreRule::Probability => Vec::new(),
            ScoreRule::Glrt => (0..=n).map(|i| i as f64 / n as f64).collect(),
            ScoreRule::Cusum | ScoreRule::CusumInterval => (0..=n).map(|i| CUSUM_MAX_SIGMAS * i as f64 / n as f64).collect(),
        }
    }

    /// ROC traced by this rule's threshold sweep.
    pub fn roc(self, scores: &[f64], labels: &[bool]) -> Result<RocCurve> {
        if self == ScoreRule::Probability {
            return roc_curve(scores, labels);
        }
        if scores.len() != labels.len() {
            return Err(Error::LengthMismatch {
                left: scores.len(),
                right: labels.len(),
            });
        }
        let (pos, neg) = class_counts(labels)?;
        let points = self
            .sweep_grid()
            .into_iter()
            .map(|threshold| {
                let c = confusion(labels, &self.decisions(scores, threshold)).expect("equal lengths");
                RocPoint {
                    threshold,
                    fpr: c.fp as f64 / neg as f64,
                    tpr: c.tp as f64 / pos as f64,
                }
            })
            .collect();
        Ok(match self {
            ScoreRule::Glrt => RocCurve::from_sweep(points, 0.0, 1.0),
            _ => RocCurve::from_sweep(points, f64::INFINITY, f64::NEG_INFINITY),
        })
    }
}

/// Per-detector result line of `metrics.json`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DetectorMetrics {
    pub detector: String,
    #[serde(with = "nan_as_null")]
    pub kappa: f64,
    pub attack_type: String,
    #[serde(with = "nan_as_null")]
    pub accuracy: f64,
    #[serde(with = "nan_as_null")]
    pub precision: f64,
    #[serde(with = "nan_as_null")]
    pub recall: f64,
    #[serde(with = "nan_as_null")]
    pub fpr: f64,
    #[serde(with = "nan_as_null")]
    pub auc: f64,
    #[serde(with = "nan_as_null")]
    pub best_threshold: f64,
    #[serde(default)]
    pub undefined: Vec<String>,
    pub confusion: ConfusionCounts,
}

/// Scores of one detector over the evaluated hours.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectorScores {
    pub detector: String,
    pub hours: Vec<usize>,
    pub scores: Vec<f64>,
    pub labels: Vec<bool>,
}

/// ROC, best operating point and the decisions taken there.
#[derive(Debug, Clone)]
pub struct Evaluation {
    pub roc: RocCurve,
    pub best: RocPoint,
    pub decisions: Vec<bool>,
    pub metrics: DetectorMetrics,
}

pub fn evaluate_scores(d: &DetectorScores, kappa: f64, attack_type: &str) -> Result<Evaluation> {
    let rule = ScoreRule::for_detector(&d.detector);
    let roc = rule.roc(&d.scores, &d.labels)?;
    let best = best_threshold(&roc);
    let decisions = rule.decisions(&d.scores, best.threshold);
    let c = confusion(&d.labels, &decisions)?;
    let m = metrics(&c);
    Ok(Evaluation {
        metrics: DetectorMetrics {
            detector: d.detector.clone(),
            kappa,
            attack_type: attack_type.to_string(),
            accuracy: m.accuracy,
            precision: m.precision,
            recall: m.recall,
            fpr: m.fpr,
            auc: roc.auc,
            best_threshold: best.threshold,
            undefined: m.undefined,
            confusion: c,
        },
        roc,
        best,
        decisions,
    })
}

pub const DETECTIONS_HEADER: &str = "hour,detector,score,decision,label";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionRow {
    pub hour: usize,
    pub detector: String,
    pub score: f64,
    pub decision: u8,
    pub label: u8,
}

pub fn write_detections(path: &Path, rows: &[DetectionRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_detections(path: &Path) -> Result<Vec<DetectionRow>> {
    let mut r = csv::Reader::from_path(path)?;
    let mut rows = Vec::new();
    for (i, rec) in r.deserialize().enumerate() {
        rows.push(rec.map_err(|e| Error::parse(path, i + 2, e.to_string()))?);
    }
    Ok(rows)
}

/// Groups detection rows by detector, keeping first-seen order.
pub fn group_detections(rows: &[DetectionRow]) -> Vec<DetectorScores> {
    let mut out: Vec<DetectorScores> = Vec::new();
    for r in rows {
        let idx = match out.iter().position(|d| d.detector == r.detector) {
            Some(i) => i,
            None => {
                out.push(DetectorScores {
                    detector: r.detector.clone(),
                    hours: Vec::new(),
                    scores: Vec::new(),
                    labels: Vec::new(),
                });
                out.len() - 1
            }
        };
        out[idx].hours.push(r.hour);
        out[idx].scores.push(r.score);
        out[idx].labels.push(r.label != 0);
    }
    out
}

pub fn write_roc_csv(path: &Path, curves: &[(String, RocCurve)]) -> Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(f, "{ROC_HEADER}")?;
    for (name, c) in curves {
        c.write_csv(name, &mut f)?;
    }
    f.flush()?;
    Ok(())
}
