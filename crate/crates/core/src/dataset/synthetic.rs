//! Deterministic synthetic releases for tests and benchmarks.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::{Instance, Label, MetricSchema, Release};
use crate::error::{Error, Result};

/// Generator parameters for one synthetic release.
///
/// Features are drawn per class from Gaussians centred at `buggy_center`
/// and `clean_center`; the realized defect ratio is exactly
/// `round(n_instances * defect_ratio) / n_instances`.
#[derive(Clone, Debug)]
pub struct SynthesisSpec {
    pub project: String,
    pub version: String,
    pub n_instances: usize,
    pub defect_ratio: f64,
    pub n_features: usize,
    pub buggy_center: f64,
    pub clean_center: f64,
    pub spread: f64,
    /// Clamp drawn values at 0 so the release survives `log_transform`.
    pub nonnegative: bool,
    pub seed: u64,
}

impl SynthesisSpec {
    pub fn new(project: impl Into<String>, version: impl Into<String>, seed: u64) -> Self {
        SynthesisSpec {
            project: project.into(),
            version: version.into(),
            n_instances: 100,
            defect_ratio: 0.3,
            n_features: 20,
            buggy_center: 5.0,
            clean_center: 1.0,
            spread: 1.0,
            nonnegative: false,
            seed,
        }
    }

    fn schema(&self) -> MetricSchema {
        let names = (0..self.n_features).map(|i| format!("m{i}")).collect();
        MetricSchema::new(names).expect("generated names are unique")
    }
}

/// Draws a deterministic synthetic release: same spec and seed, same bytes.
pub fn synthesize(spec: &SynthesisSpec) -> Result<Release> {
    if spec.n_instances == 0 {
        return Err(Error::Parameter("n_instances must be at least 1".into()));
    }
    if !(0.0..=1.0).contains(&spec.defect_ratio) {
        return Err(Error::Parameter(format!(
            "defect_ratio must lie in [0, 1], got {}",
            spec.defect_ratio
        )));
    }
    if spec.n_features == 0 {
        return Err(Error::Parameter("n_features must be at least 1".into()));
    }
    if !(spec.spread.is_finite() && spec.spread >= 0.0) {
        return Err(Error::Parameter(format!(
            "spread must be finite and nonnegative, got {}",
            spec.spread
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let n_buggy = (spec.n_instances as f64 * spec.defect_ratio).round() as usize;

    let mut labels = vec![Label::Buggy; n_buggy];
    labels.resize(spec.n_instances, Label::NonBuggy);
    labels.shuffle(&mut rng);

    let buggy = Normal::new(spec.buggy_center, spec.spread)
        .map_err(|e| Error::Parameter(e.to_string()))?;
    let clean = Normal::new(spec.clean_center, spec.spread)
        .map_err(|e| Error::Parameter(e.to_string()))?;

    let mut instances = Vec::with_capacity(spec.n_instances);
    for label in labels {
        let dist = if label.is_buggy() { buggy } else { clean };
        let metrics = (0..spec.n_features)
            .map(|_| {
                let v = dist.sample(&mut rng);
                if spec.nonnegative {
                    v.max(0.0)
                } else {
                    v
                }
            })
            .collect();
        let bug_count = if label.is_buggy() {
            rng.gen_range(1..=3)
        } else {
            0
        };
        instances.push(Instance::new(metrics, bug_count)?);
    }

    Release::new(
        spec.project.clone(),
        spec.version.clone(),
        spec.schema(),
        instances,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rounding_forces_exact_defect_count() {
        let mut spec = SynthesisSpec::new("p", "1", 7);
        spec.n_instances = 100;
        spec.defect_ratio = 0.2;
        let release = synthesize(&spec).unwrap();
        assert_eq!(release.defect_count(), 20);
        assert_eq!(release.len(), 100);
    }

    #[test]
    fn same_seed_same_release() {
        let spec = SynthesisSpec::new("p", "1", 99);
        assert_eq!(synthesize(&spec).unwrap(), synthesize(&spec).unwrap());
    }

    #[test]
    fn different_seed_different_release() {
        let a = SynthesisSpec::new("p", "1", 1);
        let b = SynthesisSpec::new("p", "1", 2);
        assert_ne!(synthesize(&a).unwrap(), synthesize(&b).unwrap());
    }

    #[test]
    fn invalid_parameters_are_rejected() {
        let mut spec = SynthesisSpec::new("p", "1", 0);
        spec.defect_ratio = 1.5;
        assert!(synthesize(&spec).is_err());
        let mut spec = SynthesisSpec::new("p", "1", 0);
        spec.n_instances = 0;
        assert!(synthesize(&spec).is_err());
    }

    #[test]
    fn nonnegative_flag_clamps_draws() {
        let mut spec = SynthesisSpec::new("p", "1", 3);
        spec.clean_center = 0.0;
        spec.nonnegative = true;
        let release = synthesize(&spec).unwrap();
        assert!(release
            .instances()
            .iter()
            .all(|i| i.metrics().iter().all(|&v| v >= 0.0)));
    }
}
