use serde::{Deserialize, Serialize};

use super::ColumnFilter;

/// Per-class, per-feature Gaussian likelihoods with frequency priors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianNb {
    pub columns: ColumnFilter,
    /// Index 0: nominal, 1: attack.
    pub priors: [f64; 2],
    pub means: [Vec<f64>; 2],
    pub variances: [Vec<f64>; 2],
}

/// Variance added to every class variance, relative to the largest feature variance.
pub const VAR_SMOOTHING: f64 = 1e-9;

impl GaussianNb {
    pub(super) fn fit(columns: ColumnFilter, rows: &[Vec<f64>], labels: &[bool]) -> Self {
        let x: Vec<Vec<f64>> = rows.iter().map(|r| columns.project(r)).collect();
        let p = columns.kept.len();
        let moments = |subset: &[&Vec<f64>]| -> (Vec<f64>, Vec<f64>) {
            let n = subset.len() as f64;
            let mean: Vec<f64> = (0..p).map(|j| subset.iter().map(|r| r[j]).sum::<f64>() / n).collect();
            let var = (0..p)
                .map(|j| subset.iter().map(|r| (r[j] - mean[j]).powi(2)).sum::<f64>() / n)
                .collect();
            (mean, var)
        };
        let all: Vec<&Vec<f64>> = x.iter().collect();
        let (_, overall_var) = moments(&all);
        let epsilon = VAR_SMOOTHING * overall_var.iter().copied().fold(0.0, f64::max);

        let class = |c: bool| -> Vec<&Vec<f64>> { x.iter().zip(labels).filter(|(_, &l)| l == c).map(|(r, _)| r).collect() };
        let (neg, pos) = (class(false), class(true));
        let (m0, v0) = moments(&neg);
        let (m1, v1) = moments(&pos);
        let n = x.len() as f64;
        Self {
            columns,
            priors: [neg.len() as f64 / n, pos.len() as f64 / n],
            means: [m0, m1],
            variances: [v0.into_iter().map(|v| v + epsilon).collect(), v1.into_iter().map(|v| v + epsilon).collect()],
        }
    }

    /// Joint log likelihood `log P(c) + sum_j log N(x_j; mu_cj, var_cj)` for both classes.
    pub fn joint_log_likelihood(&self, row: &[f64]) -> [f64; 2] {
        let r = self.columns.project(row);
        let jll = |c: usize| {
            self.priors[c].ln()
                + r.iter()
                    .zip(&self.means[c])
                    .zip(&self.variances[c])
                    .map(|((x, m), v)| -0.5 * (std::f64::consts::TAU * v).ln() - (x - m).powi(2) / (2.0 * v))
                    .sum::<f64>()
        };
        [jll(0), jll(1)]
    }

    /// Normalized posteriors `[P(nominal | x), P(attack | x)]`.
    pub fn posteriors(&self, row: &[f64]) -> [f64; 2] {
        let [a, b] = self.joint_log_likelihood(row);
        let m = a.max(b);
        let (ea, eb) = ((a - m).exp(), (b - m).exp());
        [ea / (ea + eb), eb / (ea + eb)]
    }

    pub fn predict_score(&self, row: &[f64]) -> f64 {
        self.posteriors(row)[1]
    }
}
