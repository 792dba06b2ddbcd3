//! Attack detectors: sequential tests over forecast residuals and supervised
//! classifiers over lagged load windows.

mod cusum;
mod features;
mod forest;
mod glrt;
mod logreg;
mod naive_bayes;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use cusum::{cusum_detect, CusumConfig, CusumOutput};
pub use features::{make_features, SupervisedSet};
pub use forest::{Node, RandomForest, Tree, NUM_TREES};
pub use glrt::{glrt_detect, glrt_threshold, GlrtConfig, GlrtStep};
pub use logreg::LogisticRegression;
pub use naive_bayes::GaussianNb;

/// Feature lag used throughout: one day of hourly values.
pub const LAG: usize = 24;

/// Columns kept after dropping those constant over the training set.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnFilter {
    pub width: usize,
    pub kept: Vec<usize>,
}

impl ColumnFilter {
    fn fit(rows: &[Vec<f64>]) -> Self {
        let width = rows[0].len();
        let kept: Vec<usize> = (0..width)
            .filter(|&j| {
                let first = rows[0][j];
                let varies = rows.iter().any(|r| r[j] != first);
                if !varies {
                    log::warn!("dropping feature {j}: constant over the training set");
                }
                varies
            })
            .collect();
        Self { width, kept }
    }

    fn project(&self, row: &[f64]) -> Vec<f64> {
        assert_eq!(row.len(), self.width, "feature row has the wrong length");
        self.kept.iter().map(|&j| row[j]).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassifierKind {
    Logreg,
    Gnb,
    Forest,
}

impl ClassifierKind {
    pub const ALL: [ClassifierKind; 3] = [ClassifierKind::Logreg, ClassifierKind::Gnb, ClassifierKind::Forest];

    pub fn as_str(self) -> &'static str {
        match self {
            ClassifierKind::Logreg => "logreg",
            ClassifierKind::Gnb => "gnb",
            ClassifierKind::Forest => "forest",
        }
    }
}

impl fmt::Display for ClassifierKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ClassifierKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "logreg" => Ok(ClassifierKind::Logreg),
            "gnb" => Ok(ClassifierKind::Gnb),
            "forest" => Ok(ClassifierKind::Forest),
            other => Err(Error::config(format!("unknown classifier `{other}`"))),
        }
    }
}

/// A trained classifier; serializes to JSON with a `kind` tag.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Classifier {
    Logreg(LogisticRegression),
    Gnb(GaussianNb),
    Forest(RandomForest),
}

impl Classifier {
    pub fn kind(&self) -> ClassifierKind {
        match self {
            Classifier::Logreg(_) => ClassifierKind::Logreg,
            Classifier::Gnb(_) => ClassifierKind::Gnb,
            Classifier::Forest(_) => ClassifierKind::Forest,
        }
    }

    /// Probability of the attack class, in `[0, 1]`.
    ///
    /// Panics if `row` does not have the training width.
    pub fn predict_score(&self, row: &[f64]) -> f64 {
        match self {
            Classifier::Logreg(m) => m.predict_score(row),
            Classifier::Gnb(m) => m.predict_score(row),
            Classifier::Forest(m) => m.predict_score(row),
        }
    }

    pub fn score_all(&self, rows: &[Vec<f64>]) -> Vec<f64> {
        rows.iter().map(|r| self.predict_score(r)).collect()
    }
}

pub fn train_classifier(set: &SupervisedSet, kind: ClassifierKind, seed: u64) -> Result<Classifier> {
    let positives = set.positives();
    if set.is_empty() || positives == 0 || positives == set.len() {
        return Err(Error::SingleClass);
    }
    let columns = ColumnFilter::fit(&set.features);
    if columns.kept.is_empty() {
        return Err(Error::config("every feature is constant over the training set"));
    }
    Ok(match kind {
        ClassifierKind::Logreg => Classifier::Logreg(LogisticRegression::fit(columns, &set.features, &set.labels)),
        ClassifierKind::Gnb => Classifier::Gnb(GaussianNb::fit(columns, &set.features, &set.labels)),
        ClassifierKind::Forest => {
            Classifier::Forest(RandomForest::fit(columns, &set.features, &set.labels, seed))
        }
    })
}
