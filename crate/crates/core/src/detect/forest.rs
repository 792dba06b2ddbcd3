//! Bagged Gini decision trees.
//!
//! Splits send `x <= threshold` left, where the threshold is an observed
//! training value. Predictions therefore depend only on the order of values
//! within each feature.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::ColumnFilter;

pub const NUM_TREES: usize = 100;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Node {
    Leaf { attack: bool },
    Split { feature: usize, threshold: f64, left: usize, right: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<Node>,
}

impl Tree {
    pub fn predict(&self, row: &[f64]) -> bool {
        let mut idx = 0;
        loop {
            match self.nodes[idx] {
                Node::Leaf { attack } => return attack,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => idx = if row[feature] <= threshold { left } else { right },
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomForest {
    pub columns: ColumnFilter,
    pub trees: Vec<Tree>,
}

impl RandomForest {
    /// Tree `k` draws its bootstrap sample and feature subsets from ChaCha
    /// stream `k` of `seed`, so parallel construction matches a sequential one.
    pub(super) fn fit(columns: ColumnFilter, rows: &[Vec<f64>], labels: &[bool], seed: u64) -> Self {
        let x: Vec<Vec<f64>> = rows.iter().map(|r| columns.project(r)).collect();
        let p = columns.kept.len();
        let max_features = ((p as f64).sqrt().ceil() as usize).clamp(1, p);
        let trees = (0..NUM_TREES)
            .into_par_iter()
            .map(|k| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(k as u64);
                let sample: Vec<usize> = (0..x.len()).map(|_| rng.gen_range(0..x.len())).collect();
                let mut builder = TreeBuilder {
                    x: &x,
                    y: labels,
                    max_features,
                    rng,
                    nodes: Vec::new(),
                };
                builder.grow(sample);
                Tree { nodes: builder.nodes }
            })
            .collect();
        Self { columns, trees }
    }

    /// Fraction of trees voting for the attack class.
    pub fn predict_score(&self, row: &[f64]) -> f64 {
        let r = self.columns.project(row);
        self.trees.iter().filter(|t| t.predict(&r)).count() as f64 / self.trees.len() as f64
    }
}

struct TreeBuilder<'a> {
    x: &'a [Vec<f64>],
    y: &'a [bool],
    max_features: usize,
    rng: ChaCha8Rng,
    nodes: Vec<Node>,
}

struct BestSplit {
    feature: usize,
    threshold: f64,
    impurity: f64,
}

impl TreeBuilder<'_> {
    fn grow(&mut self, root: Vec<usize>) {
        let mut stack = vec![(root, None::<(usize, bool)>)];
        while let Some((samples, parent)) = stack.pop() {
            let id = self.nodes.len();
            if let Some((p, is_left)) = parent {
                if let Node::Split { left, right, .. } = &mut self.nodes[p] {
                    if is_left {
                        *left = id;
                    } else {
                        *right = id;
                    }
                }
            }
            let positives = samples.iter().filter(|&&i| self.y[i]).count();
            let pure = positives == 0 || positives == samples.len();
            let split = if pure || samples.len() < 2 { None } else { self.best_split(&samples) };
            match split {
                None => self.nodes.push(Node::Leaf {
                    attack: 2 * positives > samples.len(),
                }),
                Some(s) => {
                    self.nodes.push(Node::Split {
                        feature: s.feature,
                        threshold: s.threshold,
                        left: usize::MAX,
                        right: usize::MAX,
                    });
                    let (left, right): (Vec<usize>, Vec<usize>) =
                        samples.into_iter().partition(|&i| self.x[i][s.feature] <= s.threshold);
                    stack.push((right, Some((id, false))));
                    stack.push((left, Some((id, true))));
                }
            }
        }
    }

    /// Examines `max_features` random features, continuing through the rest
    /// in random order only while no valid partition has been found.
    fn best_split(&mut self, samples: &[usize]) -> Option<BestSplit> {
        let mut order: Vec<usize> = (0..self.x[0].len()).collect();
        order.shuffle(&mut self.rng);
        let mut best: Option<BestSplit> = None;
        for (visited, &feature) in order.iter().enumerate() {
            if visited >= self.max_features && best.is_some() {
                break;
            }
            if let Some(s) = self.split_on(samples, feature) {
                if best.as_ref().map_or(true, |b| s.impurity < b.impurity) {
                    best = Some(s);
                }
            }
        }
        best
    }

    fn split_on(&self, samples: &[usize], feature: usize) -> Option<BestSplit> {
        let mut sorted: Vec<(f64, bool)> = samples.iter().map(|&i| (self.x[i][feature], self.y[i])).collect();
        sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
        let n = sorted.len() as f64;
        let total_pos = sorted.iter().filter(|s| s.1).count() as f64;
        let mut left_pos = 0.0;
        let mut best: Option<BestSplit> = None;
        for k in 0..sorted.len() - 1 {
            if sorted[k].1 {
                left_pos += 1.0;
            }
            if sorted[k].0 == sorted[k + 1].0 {
                continue;
            }
            let nl = (k + 1) as f64;
            let nr = n - nl;
            let right_pos = total_pos - left_pos;
            // size-weighted Gini: n_l * (1 - sum p^2) + n_r * (...)
            let gini_l = nl - (left_pos * left_pos + (nl - left_pos).powi(2)) / nl;
            let gini_r = nr - (right_pos * right_pos + (nr - right_pos).powi(2)) / nr;
            let impurity = (gini_l + gini_r) / n;
            if best.as_ref().map_or(true, |b| impurity < b.impurity) {
                best = Some(BestSplit {
                    feature,
                    threshold: sorted[k].0,
                    impurity,
                });
            }
        }
        best
    }
}
