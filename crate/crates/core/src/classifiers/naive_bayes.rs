//! Gaussian Naive Bayes.
//!
//! Class priors are the training class frequencies; each feature gets an
//! independent Gaussian likelihood per class. The posterior is evaluated
//! in log space and converted back through a stable logistic, so scores
//! stay continuous in the inputs.

use serde::{Deserialize, Serialize};

use crate::simplify::PoolInstance;

/// Floor applied to every fitted variance so constant features survive.
pub const VARIANCE_FLOOR: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Gaussian {
    pub mean: f64,
    pub variance: f64,
}

impl Gaussian {
    fn log_density(&self, x: f64) -> f64 {
        let d = x - self.mean;
        -0.5 * ((2.0 * std::f64::consts::PI * self.variance).ln() + d * d / self.variance)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NbParams {
    pub prior_buggy: f64,
    pub buggy: Vec<Gaussian>,
    pub clean: Vec<Gaussian>,
}

fn fit_gaussians<'a, I>(rows: I, n_features: usize, n: usize) -> Vec<Gaussian>
where
    I: Iterator<Item = &'a PoolInstance> + Clone,
{
    (0..n_features)
        .map(|j| {
            let mean = rows.clone().map(|p| p.instance.metrics()[j]).sum::<f64>() / n as f64;
            let variance = rows
                .clone()
                .map(|p| (p.instance.metrics()[j] - mean).powi(2))
                .sum::<f64>()
                / n as f64;
            Gaussian {
                mean,
                variance: variance.max(VARIANCE_FLOOR),
            }
        })
        .collect()
}

impl NbParams {
    /// Fits priors and per-class feature Gaussians. Callers guarantee both
    /// classes are present.
    pub(crate) fn fit(instances: &[PoolInstance]) -> NbParams {
        let n_features = instances[0].instance.metrics().len();
        let buggy_rows = instances.iter().filter(|p| p.instance.is_buggy());
        let clean_rows = instances.iter().filter(|p| !p.instance.is_buggy());
        let n_buggy = buggy_rows.clone().count();
        let n_clean = clean_rows.clone().count();

        NbParams {
            prior_buggy: n_buggy as f64 / instances.len() as f64,
            buggy: fit_gaussians(buggy_rows, n_features, n_buggy),
            clean: fit_gaussians(clean_rows, n_features, n_clean),
        }
    }

    /// Posterior probability of the buggy class.
    pub fn score(&self, metrics: &[f64]) -> f64 {
        let mut log_buggy = self.prior_buggy.ln();
        let mut log_clean = (1.0 - self.prior_buggy).ln();
        for (j, &x) in metrics.iter().enumerate() {
            log_buggy += self.buggy[j].log_density(x);
            log_clean += self.clean[j].log_density(x);
        }
        // P(buggy | x) = 1 / (1 + exp(log_clean - log_buggy))
        let delta = log_clean - log_buggy;
        if delta > 0.0 {
            let e = (-delta).exp();
            e / (1.0 + e)
        } else {
            1.0 / (1.0 + delta.exp())
        }
    }
}
