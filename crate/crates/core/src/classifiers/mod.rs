//! From-scratch probabilistic binary classifiers.
//!
//! All three classifiers score the positive (buggy) class in `[0, 1]` and
//! label at threshold 0.5, with the tie going to buggy. Trained models
//! are immutable, deterministic for identical training data, and
//! serializable to a versioned JSON document.

mod decision_tree;
mod logistic;
mod naive_bayes;

pub use decision_tree::{entropy, information_gain, DtNode, DtParams};
pub use logistic::{log_likelihood, log_likelihood_gradient, LrConfig, LrParams};
pub use naive_bayes::{Gaussian, NbParams};

use serde::{Deserialize, Serialize};

use crate::dataset::{Instance, Label, Release};
use crate::error::{Error, Result};
use crate::simplify::{PoolInstance, SimplifiedTds};

/// Supported classifier families.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ClassifierKind {
    #[serde(rename = "nb")]
    NaiveBayes,
    #[serde(rename = "lr")]
    LogisticRegression,
    #[serde(rename = "dt")]
    DecisionTree,
}

impl std::fmt::Display for ClassifierKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            ClassifierKind::NaiveBayes => "nb",
            ClassifierKind::LogisticRegression => "lr",
            ClassifierKind::DecisionTree => "dt",
        };
        write!(f, "{name}")
    }
}

/// Score and thresholded label for one instance.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub score: f64,
    pub label: Label,
}

impl Prediction {
    /// Labels buggy iff `score >= 0.5`.
    pub fn from_score(score: f64) -> Self {
        let label = if score >= 0.5 {
            Label::Buggy
        } else {
            Label::NonBuggy
        };
        Prediction { score, label }
    }
}

/// How the model was fitted; carried for reproducibility audits.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ModelProvenance {
    /// Set when the training data contained a single class and the model
    /// degenerated to a constant score.
    pub degenerate_single_class: Option<Label>,
    /// Logistic regression only: whether gradient ascent met its stopping
    /// rule before the iteration cap.
    pub converged: Option<bool>,
    pub iterations: Option<u32>,
    pub n_training_instances: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum ModelParams {
    NaiveBayes(NbParams),
    LogisticRegression(LrParams),
    DecisionTree(DtParams),
    /// Degenerate single-class fallback: always emits `score`.
    Constant { kind: ClassifierKind, score: f64 },
}

/// An immutable fitted model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    n_features: usize,
    params: ModelParams,
    provenance: ModelProvenance,
}

const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct ModelDocument {
    format_version: u32,
    model: TrainedModel,
}

impl TrainedModel {
    pub fn kind(&self) -> ClassifierKind {
        match &self.params {
            ModelParams::NaiveBayes(_) => ClassifierKind::NaiveBayes,
            ModelParams::LogisticRegression(_) => ClassifierKind::LogisticRegression,
            ModelParams::DecisionTree(_) => ClassifierKind::DecisionTree,
            ModelParams::Constant { kind, .. } => *kind,
        }
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn provenance(&self) -> &ModelProvenance {
        &self.provenance
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    /// Scores one instance. The instance must have the training arity.
    pub fn predict(&self, instance: &Instance) -> Result<Prediction> {
        if instance.metrics().len() != self.n_features {
            return Err(Error::Shape {
                expected: self.n_features,
                actual: instance.metrics().len(),
            });
        }
        let score = match &self.params {
            ModelParams::NaiveBayes(p) => p.score(instance.metrics()),
            ModelParams::LogisticRegression(p) => p.score(instance.metrics()),
            ModelParams::DecisionTree(p) => p.score(instance.metrics()),
            ModelParams::Constant { score, .. } => *score,
        };
        Ok(Prediction::from_score(score))
    }

    /// Scores every instance of a release in row order.
    pub fn predict_release(&self, release: &Release) -> Result<Vec<Prediction>> {
        release.instances().iter().map(|i| self.predict(i)).collect()
    }

    /// Serializes to the versioned JSON model document.
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&ModelDocument {
            format_version: MODEL_FORMAT_VERSION,
            model: self.clone(),
        })?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: ModelDocument = serde_json::from_str(text)?;
        if doc.format_version != MODEL_FORMAT_VERSION {
            return Err(Error::Parameter(format!(
                "unsupported model format version {}",
                doc.format_version
            )));
        }
        Ok(doc.model)
    }
}

fn check_nonempty(instances: &[PoolInstance]) -> Result<usize> {
    let first = instances
        .first()
        .ok_or_else(|| Error::Parameter("cannot train on an empty training set".into()))?;
    Ok(first.instance.metrics().len())
}

/// Detects single-class training data and builds the degenerate constant
/// model for it.
fn degenerate_model(
    instances: &[PoolInstance],
    kind: ClassifierKind,
    n_features: usize,
) -> Option<TrainedModel> {
    let first = instances[0].instance.label();
    if instances.iter().any(|p| p.instance.label() != first) {
        return None;
    }
    let score = if first.is_buggy() { 1.0 } else { 0.0 };
    Some(TrainedModel {
        n_features,
        params: ModelParams::Constant { kind, score },
        provenance: ModelProvenance {
            degenerate_single_class: Some(first),
            n_training_instances: instances.len(),
            ..Default::default()
        },
    })
}

/// Gaussian Naive Bayes on provenance-carrying instances.
pub fn train_nb_on(instances: &[PoolInstance]) -> Result<TrainedModel> {
    let n_features = check_nonempty(instances)?;
    if let Some(model) = degenerate_model(instances, ClassifierKind::NaiveBayes, n_features) {
        return Ok(model);
    }
    let params = NbParams::fit(instances);
    Ok(TrainedModel {
        n_features,
        params: ModelParams::NaiveBayes(params),
        provenance: ModelProvenance {
            n_training_instances: instances.len(),
            ..Default::default()
        },
    })
}

/// Logistic regression via batch gradient ascent with the default
/// configuration.
pub fn train_lr_on(instances: &[PoolInstance]) -> Result<TrainedModel> {
    train_lr_with(instances, &LrConfig::default())
}

pub fn train_lr_with(instances: &[PoolInstance], config: &LrConfig) -> Result<TrainedModel> {
    let n_features = check_nonempty(instances)?;
    if let Some(model) =
        degenerate_model(instances, ClassifierKind::LogisticRegression, n_features)
    {
        return Ok(model);
    }
    let (params, converged, iterations) = LrParams::fit(instances, config);
    Ok(TrainedModel {
        n_features,
        params: ModelParams::LogisticRegression(params),
        provenance: ModelProvenance {
            converged: Some(converged),
            iterations: Some(iterations),
            n_training_instances: instances.len(),
            ..Default::default()
        },
    })
}

/// Information-gain decision tree with binary numeric splits.
pub fn train_dt_on(instances: &[PoolInstance]) -> Result<TrainedModel> {
    let n_features = check_nonempty(instances)?;
    let params = DtParams::fit(instances)?;
    Ok(TrainedModel {
        n_features,
        params: ModelParams::DecisionTree(params),
        provenance: ModelProvenance {
            n_training_instances: instances.len(),
            ..Default::default()
        },
    })
}

pub fn train_nb(tds: &SimplifiedTds) -> Result<TrainedModel> {
    train_nb_on(tds.instances())
}

pub fn train_lr(tds: &SimplifiedTds) -> Result<TrainedModel> {
    train_lr_on(tds.instances())
}

pub fn train_dt(tds: &SimplifiedTds) -> Result<TrainedModel> {
    train_dt_on(tds.instances())
}

/// Trains the requested classifier family on a simplified training set.
pub fn train(kind: ClassifierKind, tds: &SimplifiedTds) -> Result<TrainedModel> {
    train_on(kind, tds.instances())
}

pub fn train_on(kind: ClassifierKind, instances: &[PoolInstance]) -> Result<TrainedModel> {
    match kind {
        ClassifierKind::NaiveBayes => train_nb_on(instances),
        ClassifierKind::LogisticRegression => train_lr_on(instances),
        ClassifierKind::DecisionTree => train_dt_on(instances),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::ReleaseId;
    use crate::simplify::InstanceOrigin;

    pub(crate) fn pool(rows: &[(&[f64], u32)]) -> Vec<PoolInstance> {
        rows.iter()
            .enumerate()
            .map(|(row, (metrics, bugs))| PoolInstance {
                origin: InstanceOrigin {
                    release: ReleaseId::new("fix", "1"),
                    row,
                },
                instance: Instance::new(metrics.to_vec(), *bugs).unwrap(),
            })
            .collect()
    }

    fn inst(metrics: &[f64]) -> Instance {
        Instance::new(metrics.to_vec(), 0).unwrap()
    }

    #[test]
    fn score_exactly_half_labels_buggy() {
        assert_eq!(Prediction::from_score(0.5).label, Label::Buggy);
        assert_eq!(Prediction::from_score(0.499).label, Label::NonBuggy);
    }

    #[test]
    fn nb_priors_are_class_frequencies() {
        let mut rows: Vec<(&[f64], u32)> = Vec::new();
        for _ in 0..30 {
            rows.push((&[1.0], 1));
        }
        for _ in 0..70 {
            rows.push((&[0.0], 0));
        }
        let model = train_nb_on(&pool(&rows)).unwrap();
        match model.params() {
            ModelParams::NaiveBayes(p) => assert_eq!(p.prior_buggy, 0.30),
            other => panic!("unexpected params {other:?}"),
        }
    }

    #[test]
    fn nb_midpoint_of_mirrored_classes_scores_half() {
        // buggy ~ {4, 6}, clean ~ {-1, 1}: equal priors and variances,
        // means mirrored around 2.5.
        let rows: Vec<(&[f64], u32)> = vec![
            (&[4.0], 1),
            (&[6.0], 1),
            (&[-1.0], 0),
            (&[1.0], 0),
        ];
        let model = train_nb_on(&pool(&rows)).unwrap();
        let p = model.predict(&inst(&[2.5])).unwrap();
        assert!((p.score - 0.5).abs() < 1e-9, "score {}", p.score);
    }

    #[test]
    fn nb_deep_inside_buggy_cluster_matches_closed_form() {
        // buggy ~ {4,5,6} (mean 5, pop var 2/3), clean ~ {-1,0,1}
        // (mean 0, same var). At x = 5 the normalizers cancel and
        // log-odds = 25 / (2 * 2/3) = 18.75.
        let rows: Vec<(&[f64], u32)> = vec![
            (&[4.0], 2),
            (&[5.0], 1),
            (&[6.0], 1),
            (&[-1.0], 0),
            (&[0.0], 0),
            (&[1.0], 0),
        ];
        let model = train_nb_on(&pool(&rows)).unwrap();
        let p = model.predict(&inst(&[5.0])).unwrap();
        let expected = 1.0 / (1.0 + (-18.75f64).exp());
        assert!(p.score > 0.9);
        assert!((p.score - expected).abs() < 1e-12);
    }

    #[test]
    fn nb_single_class_training_degenerates_to_constant() {
        let rows: Vec<(&[f64], u32)> = vec![(&[1.0], 1), (&[2.0], 3)];
        let model = train_nb_on(&pool(&rows)).unwrap();
        assert_eq!(
            model.provenance().degenerate_single_class,
            Some(Label::Buggy)
        );
        let p = model.predict(&inst(&[-100.0])).unwrap();
        assert_eq!(p.score, 1.0);
        assert_eq!(p.label, Label::Buggy);
    }

    #[test]
    fn nb_variance_floor_survives_constant_features() {
        let rows: Vec<(&[f64], u32)> = vec![(&[7.0, 1.0], 1), (&[7.0, 2.0], 1), (&[7.0, -1.0], 0), (&[7.0, -2.0], 0)];
        let model = train_nb_on(&pool(&rows)).unwrap();
        let p = model.predict(&inst(&[7.0, 1.5])).unwrap();
        assert!(p.score.is_finite());
        assert!(p.score > 0.5);
    }

    #[test]
    fn lr_zero_weights_score_half_everywhere() {
        let params = LrParams {
            weights: vec![0.0, 0.0, 0.0],
        };
        assert_eq!(params.score(&[3.0, -4.0]), 0.5);
        assert_eq!(params.score(&[1e6, 1e6]), 0.5);
    }

    #[test]
    fn lr_complement_identity_holds() {
        let params = LrParams {
            weights: vec![0.3, -1.2, 2.5],
        };
        for x in [[0.0, 0.0], [10.0, -3.0], [-7.5, 2.25], [100.0, 55.0]] {
            let sum = params.score(&x) + params.score_complement(&x);
            assert!((sum - 1.0).abs() < 1e-12, "sum {sum}");
        }
    }

    #[test]
    fn lr_separates_a_separable_fixture() {
        let rows: Vec<(&[f64], u32)> = vec![
            (&[0.0, 0.0], 0),
            (&[0.0, 1.0], 0),
            (&[1.0, 0.0], 0),
            (&[5.0, 5.0], 1),
            (&[5.0, 6.0], 1),
            (&[6.0, 5.0], 1),
        ];
        let data = pool(&rows);
        let model = train_lr_on(&data).unwrap();
        for p in &data {
            let pred = model.predict(&p.instance).unwrap();
            assert_eq!(pred.label, p.instance.label());
        }
    }

    #[test]
    fn lr_reports_non_convergence_at_tiny_iteration_cap() {
        let rows: Vec<(&[f64], u32)> = vec![(&[0.0], 0), (&[1.0], 1), (&[2.0], 0), (&[3.0], 1)];
        let config = LrConfig {
            max_iterations: 2,
            ..Default::default()
        };
        let model = train_lr_with(&pool(&rows), &config).unwrap();
        assert_eq!(model.provenance().converged, Some(false));
        assert_eq!(model.provenance().iterations, Some(2));
    }

    #[test]
    fn lr_gradient_matches_finite_differences() {
        let rows = vec![
            vec![0.5, -1.0],
            vec![1.5, 2.0],
            vec![-0.5, 0.25],
            vec![2.0, -0.75],
        ];
        let labels = vec![Label::NonBuggy, Label::Buggy, Label::NonBuggy, Label::Buggy];
        let w = vec![0.1, -0.4, 0.7];
        let grad = log_likelihood_gradient(&w, &rows, &labels);
        for i in 0..w.len() {
            let h = 1e-6;
            let mut wp = w.clone();
            wp[i] += h;
            let mut wm = w.clone();
            wm[i] -= h;
            let fd = (log_likelihood(&wp, &rows, &labels) - log_likelihood(&wm, &rows, &labels))
                / (2.0 * h);
            let rel = (grad[i] - fd).abs() / fd.abs().max(1e-12);
            assert!(rel < 1e-5, "component {i}: analytic {} fd {fd}", grad[i]);
        }
    }

    #[test]
    fn dt_entropy_degenerate_and_uniform() {
        assert_eq!(entropy(&[5, 0]), 0.0);
        assert_eq!(entropy(&[0, 9]), 0.0);
        assert_eq!(entropy(&[5, 5]), 1.0);
    }

    #[test]
    fn dt_perfect_split_has_gain_one_bit() {
        assert_eq!(information_gain((2, 2), (0, 2), (2, 0)), 1.0);

        let rows: Vec<(&[f64], u32)> = vec![(&[1.0], 0), (&[2.0], 0), (&[3.0], 1), (&[4.0], 1)];
        let model = train_dt_on(&pool(&rows)).unwrap();
        match model.params() {
            ModelParams::DecisionTree(p) => match &p.root {
                DtNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    assert_eq!(*feature, 0);
                    assert_eq!(*threshold, 2.5);
                    assert!(matches!(**left, DtNode::Leaf { buggy: 0, total: 2, .. }));
                    assert!(matches!(**right, DtNode::Leaf { buggy: 2, total: 2, .. }));
                }
                other => panic!("expected a split, got {other:?}"),
            },
            other => panic!("unexpected params {other:?}"),
        }
    }

    #[test]
    fn dt_leaf_scores_are_laplace_smoothed() {
        // A single indistinguishable column forces one leaf: 3 buggy, 1
        // clean -> (3 + 1) / (4 + 2).
        let rows: Vec<(&[f64], u32)> = vec![(&[5.0], 1), (&[5.0], 1), (&[5.0], 1), (&[5.0], 0)];
        let model = train_dt_on(&pool(&rows)).unwrap();
        let p = model.predict(&inst(&[5.0])).unwrap();
        assert!((p.score - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn dt_pure_leaves_reproduce_training_labels() {
        let rows: Vec<(&[f64], u32)> = vec![
            (&[1.0, 9.0], 0),
            (&[2.0, 8.0], 0),
            (&[1.5, 8.5], 0),
            (&[8.0, 1.0], 1),
            (&[9.0, 2.0], 1),
            (&[8.5, 1.5], 1),
        ];
        let data = pool(&rows);
        let model = train_dt_on(&data).unwrap();
        for p in &data {
            assert_eq!(
                model.predict(&p.instance).unwrap().label,
                p.instance.label()
            );
        }
    }

    #[test]
    fn dt_needs_min_leaf_instances() {
        let rows: Vec<(&[f64], u32)> = vec![(&[1.0], 0)];
        assert!(train_dt_on(&pool(&rows)).is_err());
    }

    #[test]
    fn training_is_deterministic() {
        let rows: Vec<(&[f64], u32)> = vec![
            (&[1.0, 0.5], 0),
            (&[2.0, 1.5], 1),
            (&[3.0, 0.1], 0),
            (&[4.0, 2.2], 1),
            (&[0.5, 0.9], 0),
        ];
        let data = pool(&rows);
        for kind in [
            ClassifierKind::NaiveBayes,
            ClassifierKind::LogisticRegression,
            ClassifierKind::DecisionTree,
        ] {
            let a = train_on(kind, &data).unwrap();
            let b = train_on(kind, &data).unwrap();
            assert_eq!(a, b, "{kind}");
        }
    }

    #[test]
    fn predict_rejects_arity_mismatch() {
        let rows: Vec<(&[f64], u32)> = vec![(&[1.0, 2.0], 0), (&[3.0, 4.0], 1)];
        let model = train_nb_on(&pool(&rows)).unwrap();
        assert!(matches!(
            model.predict(&inst(&[1.0])),
            Err(Error::Shape { .. })
        ));
    }

    #[test]
    fn model_json_round_trips() {
        let rows: Vec<(&[f64], u32)> = vec![
            (&[1.0, 2.0], 0),
            (&[3.0, 4.0], 1),
            (&[0.5, 1.0], 0),
            (&[4.0, 5.0], 1),
        ];
        for kind in [
            ClassifierKind::NaiveBayes,
            ClassifierKind::LogisticRegression,
            ClassifierKind::DecisionTree,
        ] {
            let model = train_on(kind, &pool(&rows)).unwrap();
            let text = model.to_json().unwrap();
            let back = TrainedModel::from_json(&text).unwrap();
            assert_eq!(model, back);
        }
    }

    #[test]
    fn scores_stay_in_unit_interval() {
        let rows: Vec<(&[f64], u32)> = vec![
            (&[0.0, 1.0], 0),
            (&[1.0, 3.0], 1),
            (&[-2.0, 0.5], 0),
            (&[5.0, 4.0], 1),
        ];
        let queries = [
            [0.0, 0.0],
            [1e3, -1e3],
            [-1e3, 1e3],
            [0.1, 0.2],
        ];
        for kind in [
            ClassifierKind::NaiveBayes,
            ClassifierKind::LogisticRegression,
            ClassifierKind::DecisionTree,
        ] {
            let model = train_on(kind, &pool(&rows)).unwrap();
            for q in &queries {
                let p = model.predict(&inst(q)).unwrap();
                assert!((0.0..=1.0).contains(&p.score), "{kind}: {}", p.score);
            }
        }
    }
}
