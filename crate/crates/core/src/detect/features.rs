use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Lag windows of a load series with per-row attack labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SupervisedSet {
    /// Row `r` holds the `lag` values strictly before hour `r + lag`, oldest first.
    pub features: Vec<Vec<f64>>,
    pub labels: Vec<bool>,
}

impl SupervisedSet {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn width(&self) -> usize {
        self.features.first().map_or(0, Vec::len)
    }

    pub fn positives(&self) -> usize {
        self.labels.iter().filter(|&&l| l).count()
    }
}

pub fn make_features(series: &[f64], labels: &[bool], lag: usize) -> Result<SupervisedSet> {
    if series.len() != labels.len() {
        return Err(Error::LengthMismatch {
            left: series.len(),
            right: labels.len(),
        });
    }
    if lag == 0 || series.len() <= lag {
        return Err(Error::InsufficientHistory {
            need: lag + 1,
            have: series.len(),
        });
    }
    Ok(SupervisedSet {
        features: (lag..series.len()).map(|i| series[i - lag..i].to_vec()).collect(),
        labels: labels[lag..].to_vec(),
    })
}
