use serde::{Deserialize, Serialize};

use super::ColumnFilter;

/// L2-regularized logistic regression on z-scored features.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticRegression {
    pub columns: ColumnFilter,
    pub mean: Vec<f64>,
    pub scale: Vec<f64>,
    pub weights: Vec<f64>,
    pub bias: f64,
    pub epochs: usize,
}

pub const PENALTY: f64 = 1.0;
pub const MAX_EPOCHS: usize = 1000;
pub const TOLERANCE: f64 = 1e-8;

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// `log(1 + exp(z))` without overflow.
fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

impl LogisticRegression {
    /// Minimizes `(sum of log losses + penalty/2 * |w|^2) / n` (intercept not
    /// penalized) by Nesterov-accelerated gradient descent with step `1/L`,
    /// restarting the momentum whenever the objective goes up.
    pub(super) fn fit(columns: ColumnFilter, rows: &[Vec<f64>], labels: &[bool]) -> Self {
        let n = rows.len();
        let p = columns.kept.len();
        let raw: Vec<Vec<f64>> = rows.iter().map(|r| columns.project(r)).collect();
        let mean: Vec<f64> = (0..p).map(|j| raw.iter().map(|r| r[j]).sum::<f64>() / n as f64).collect();
        let scale: Vec<f64> = (0..p)
            .map(|j| {
                let var = raw.iter().map(|r| (r[j] - mean[j]).powi(2)).sum::<f64>() / n as f64;
                var.sqrt()
            })
            .collect();
        let x: Vec<Vec<f64>> = raw
            .iter()
            .map(|r| (0..p).map(|j| (r[j] - mean[j]) / scale[j]).collect())
            .collect();
        let y: Vec<f64> = labels.iter().map(|&l| f64::from(u8::from(l))).collect();

        let objective = |w: &[f64], b: f64| -> f64 {
            let data: f64 = x
                .iter()
                .zip(&y)
                .map(|(xi, yi)| {
                    let z = b + xi.iter().zip(w).map(|(a, c)| a * c).sum::<f64>();
                    softplus(z) - yi * z
                })
                .sum();
            (data + 0.5 * PENALTY * w.iter().map(|v| v * v).sum::<f64>()) / n as f64
        };
        let gradient = |w: &[f64], b: f64| -> (Vec<f64>, f64) {
            let mut gw: Vec<f64> = w.iter().map(|v| PENALTY * v).collect();
            let mut gb = 0.0;
            for (xi, yi) in x.iter().zip(&y) {
                let z = b + xi.iter().zip(w).map(|(a, c)| a * c).sum::<f64>();
                let r = sigmoid(z) - yi;
                gb += r;
                for (g, a) in gw.iter_mut().zip(xi) {
                    *g += r * a;
                }
            }
            (gw.into_iter().map(|g| g / n as f64).collect(), gb / n as f64)
        };

        // trace bound on the Hessian of the mean log loss for unit-variance columns plus intercept
        let lipschitz = 0.25 * (p as f64 + 1.0) + PENALTY / n as f64;
        let step = 1.0 / lipschitz;

        let mut w = vec![0.0; p];
        let mut b = 0.0;
        let (mut vw, mut vb) = (w.clone(), b);
        let mut momentum = 1.0_f64;
        let mut loss = objective(&w, b);
        let mut epochs = 0;
        while epochs < MAX_EPOCHS {
            epochs += 1;
            let (gw, gb) = gradient(&vw, vb);
            let next_w: Vec<f64> = vw.iter().zip(&gw).map(|(v, g)| v - step * g).collect();
            let next_b = vb - step * gb;
            let next_loss = objective(&next_w, next_b);
            let next_momentum = 0.5 * (1.0 + (1.0 + 4.0 * momentum * momentum).sqrt());
            if next_loss > loss {
                // restart from the last accepted point
                vw = w.clone();
                vb = b;
                momentum = 1.0;
                continue;
            }
            let beta = (momentum - 1.0) / next_momentum;
            vw = next_w.iter().zip(&w).map(|(nw, ow)| nw + beta * (nw - ow)).collect();
            vb = next_b + beta * (next_b - b);
            let delta = (loss - next_loss).abs();
            w = next_w;
            b = next_b;
            loss = next_loss;
            momentum = next_momentum;
            if delta < TOLERANCE {
                break;
            }
        }
        Self {
            columns,
            mean,
            scale,
            weights: w,
            bias: b,
            epochs,
        }
    }

    /// Linear score on standardized features.
    pub fn decision_function(&self, row: &[f64]) -> f64 {
        let r = self.columns.project(row);
        self.bias
            + r.iter()
                .zip(&self.mean)
                .zip(&self.scale)
                .zip(&self.weights)
                .map(|(((v, m), s), w)| w * (v - m) / s)
                .sum::<f64>()
    }

    pub fn predict_score(&self, row: &[f64]) -> f64 {
        sigmoid(self.decision_function(row))
    }
}
