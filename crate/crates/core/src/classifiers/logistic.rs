//! Binary logistic regression fitted by batch gradient ascent.
//!
//! `P(buggy | x) = sigmoid(w0 + sum_i w_i * x_i)`. Features are
//! standardized internally during fitting and the learned weights are
//! mapped back to the original feature space, so prediction works on raw
//! metric vectors.

use serde::{Deserialize, Serialize};

use crate::dataset::Label;
use crate::simplify::PoolInstance;

#[derive(Clone, Copy, Debug)]
pub struct LrConfig {
    pub learning_rate: f64,
    pub max_iterations: u32,
    /// Stop once the largest absolute weight update falls below this.
    pub tolerance: f64,
}

impl Default for LrConfig {
    fn default() -> Self {
        LrConfig {
            learning_rate: 0.1,
            max_iterations: 5000,
            tolerance: 1e-6,
        }
    }
}

/// Weights in original feature space; `weights[0]` is the intercept.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LrParams {
    pub weights: Vec<f64>,
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// `ln(1 + exp(z))` without overflow.
fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

/// Mean binomial log-likelihood of labeled rows under `weights`
/// (`weights[0]` is the intercept).
pub fn log_likelihood(weights: &[f64], rows: &[Vec<f64>], labels: &[Label]) -> f64 {
    let n = rows.len() as f64;
    rows.iter()
        .zip(labels)
        .map(|(x, y)| {
            let z = weights[0]
                + x.iter()
                    .zip(&weights[1..])
                    .map(|(xi, wi)| xi * wi)
                    .sum::<f64>();
            let y = if y.is_buggy() { 1.0 } else { 0.0 };
            y * z - softplus(z)
        })
        .sum::<f64>()
        / n
}

/// Analytic gradient of [`log_likelihood`] with respect to the weights.
pub fn log_likelihood_gradient(weights: &[f64], rows: &[Vec<f64>], labels: &[Label]) -> Vec<f64> {
    let n = rows.len() as f64;
    let mut grad = vec![0.0; weights.len()];
    for (x, y) in rows.iter().zip(labels) {
        let z = weights[0]
            + x.iter()
                .zip(&weights[1..])
                .map(|(xi, wi)| xi * wi)
                .sum::<f64>();
        let err = (if y.is_buggy() { 1.0 } else { 0.0 }) - sigmoid(z);
        grad[0] += err;
        for (g, xi) in grad[1..].iter_mut().zip(x) {
            *g += err * xi;
        }
    }
    for g in &mut grad {
        *g /= n;
    }
    grad
}

impl LrParams {
    /// Fits by gradient ascent on standardized features. Returns the
    /// de-standardized parameters plus whether the stopping rule fired and
    /// after how many iterations.
    pub(crate) fn fit(instances: &[PoolInstance], config: &LrConfig) -> (LrParams, bool, u32) {
        let n = instances.len();
        let n_features = instances[0].instance.metrics().len();

        let mut means = vec![0.0; n_features];
        let mut stds = vec![0.0; n_features];
        for j in 0..n_features {
            let mean = instances
                .iter()
                .map(|p| p.instance.metrics()[j])
                .sum::<f64>()
                / n as f64;
            let var = instances
                .iter()
                .map(|p| (p.instance.metrics()[j] - mean).powi(2))
                .sum::<f64>()
                / n as f64;
            means[j] = mean;
            stds[j] = if var > 0.0 { var.sqrt() } else { 1.0 };
        }

        let rows: Vec<Vec<f64>> = instances
            .iter()
            .map(|p| {
                p.instance
                    .metrics()
                    .iter()
                    .enumerate()
                    .map(|(j, &v)| (v - means[j]) / stds[j])
                    .collect()
            })
            .collect();
        let labels: Vec<Label> = instances.iter().map(|p| p.instance.label()).collect();

        let mut weights = vec![0.0; n_features + 1];
        let mut converged = false;
        let mut iterations = 0;
        for _ in 0..config.max_iterations {
            iterations += 1;
            let grad = log_likelihood_gradient(&weights, &rows, &labels);
            let mut max_step: f64 = 0.0;
            for (w, g) in weights.iter_mut().zip(&grad) {
                let step = config.learning_rate * g;
                *w += step;
                max_step = max_step.max(step.abs());
            }
            if max_step < config.tolerance {
                converged = true;
                break;
            }
        }

        // Map back to the original feature space:
        // w_j = w'_j / s_j, w_0 = w'_0 - sum_j w'_j m_j / s_j.
        let mut original = vec![0.0; n_features + 1];
        original[0] = weights[0];
        for j in 0..n_features {
            original[j + 1] = weights[j + 1] / stds[j];
            original[0] -= weights[j + 1] * means[j] / stds[j];
        }

        (LrParams { weights: original }, converged, iterations)
    }

    /// `P(buggy | x)`.
    pub fn score(&self, metrics: &[f64]) -> f64 {
        let z = self.weights[0]
            + metrics
                .iter()
                .zip(&self.weights[1..])
                .map(|(xi, wi)| xi * wi)
                .sum::<f64>();
        sigmoid(z)
    }

    /// `P(non-buggy | x)` computed through its own closed form rather than
    /// `1 - score(x)`.
    pub fn score_complement(&self, metrics: &[f64]) -> f64 {
        let z = self.weights[0]
            + metrics
                .iter()
                .zip(&self.weights[1..])
                .map(|(xi, wi)| xi * wi)
                .sum::<f64>();
        sigmoid(-z)
    }
}
