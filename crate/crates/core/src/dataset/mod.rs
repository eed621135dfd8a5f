//! Defect data sets: instances, releases, repositories and the
//! preprocessing applied before training-data selection.
//!
//! A release is one version of one project; each instance is a class file
//! described by a fixed-order vector of code metrics, a raw bug count and
//! the binary label derived from it. Metric values are preprocessed with
//! `ln(f + 1)` before any distance computation; the transform is recorded
//! on the release so it cannot be applied twice.

mod csv_io;
mod synthetic;

pub use csv_io::{parse_csv, parse_csv_path, serialize_csv, write_csv};
pub use synthetic::{synthesize, SynthesisSpec};

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Binary defect label. `Buggy` is the positive class everywhere.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Label {
    NonBuggy,
    Buggy,
}

impl Label {
    pub fn is_buggy(self) -> bool {
        matches!(self, Label::Buggy)
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Label::Buggy => write!(f, "buggy"),
            Label::NonBuggy => write!(f, "non-buggy"),
        }
    }
}

/// A class is non-buggy only if its bug count is zero; any positive count
/// makes it buggy.
pub fn binarize(bug_count: u32) -> Label {
    if bug_count > 0 {
        Label::Buggy
    } else {
        Label::NonBuggy
    }
}

/// One class file: a fixed-order metric vector plus its defect data.
///
/// Invariants: all metric values are finite, and `label()` always agrees
/// with `binarize(bug_count())`.
#[derive(Clone, Debug, PartialEq)]
pub struct Instance {
    metrics: Vec<f64>,
    bug_count: u32,
    label: Label,
}

impl Instance {
    pub fn new(metrics: Vec<f64>, bug_count: u32) -> Result<Self> {
        if let Some(bad) = metrics.iter().find(|v| !v.is_finite()) {
            return Err(Error::Parameter(format!(
                "non-finite metric value {bad} in instance"
            )));
        }
        Ok(Instance {
            metrics,
            label: binarize(bug_count),
            bug_count,
        })
    }

    pub fn metrics(&self) -> &[f64] {
        &self.metrics
    }

    pub fn bug_count(&self) -> u32 {
        self.bug_count
    }

    pub fn label(&self) -> Label {
        self.label
    }

    pub fn is_buggy(&self) -> bool {
        self.label.is_buggy()
    }
}

/// Ordered list of metric names; fixes the layout of every instance vector.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MetricSchema {
    names: Vec<String>,
}

/// The 20 static code metrics of the PROMISE class-level data sets.
pub const PROMISE20_METRICS: [&str; 20] = [
    "WMC", "DIT", "LCOM", "RFC", "CBO", "NOC", "CA", "CE", "DAM", "NPM", "MFA", "CAM", "MOA",
    "IC", "CBM", "AMC", "LCOM3", "MAX_CC", "AVG_CC", "LOC",
];

impl MetricSchema {
    pub fn new(names: Vec<String>) -> Result<Self> {
        if names.is_empty() {
            return Err(Error::Parameter("metric schema must not be empty".into()));
        }
        let mut seen = std::collections::HashSet::new();
        for name in &names {
            if !seen.insert(name.to_ascii_lowercase()) {
                return Err(Error::DuplicateColumn(name.clone()));
            }
        }
        Ok(MetricSchema { names })
    }

    /// The standard 20-metric schema used by the PROMISE class-level files.
    pub fn promise20() -> Self {
        MetricSchema {
            names: PROMISE20_METRICS.iter().map(|s| s.to_string()).collect(),
        }
    }

    pub fn arity(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }
}

/// Identity of a release: `(project, version)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ReleaseId {
    pub project: String,
    pub version: String,
}

impl ReleaseId {
    pub fn new(project: impl Into<String>, version: impl Into<String>) -> Self {
        ReleaseId {
            project: project.into(),
            version: version.into(),
        }
    }
}

impl fmt::Display for ReleaseId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.project, self.version)
    }
}

/// One version of one project: a nonempty, ordered list of instances that
/// all follow the same metric schema.
#[derive(Clone, Debug, PartialEq)]
pub struct Release {
    id: ReleaseId,
    schema: Arc<MetricSchema>,
    instances: Vec<Instance>,
    log_transformed: bool,
}

impl Release {
    pub fn new(
        project: impl Into<String>,
        version: impl Into<String>,
        schema: MetricSchema,
        instances: Vec<Instance>,
    ) -> Result<Self> {
        let id = ReleaseId::new(project, version);
        if instances.is_empty() {
            return Err(Error::EmptyRelease);
        }
        let arity = schema.arity();
        for (row, inst) in instances.iter().enumerate() {
            if inst.metrics.len() != arity {
                return Err(Error::Shape {
                    expected: arity,
                    actual: inst.metrics.len(),
                });
            }
            let _ = row;
        }
        Ok(Release {
            id,
            schema: Arc::new(schema),
            instances,
            log_transformed: false,
        })
    }

    pub fn id(&self) -> &ReleaseId {
        &self.id
    }

    pub fn project(&self) -> &str {
        &self.id.project
    }

    pub fn version(&self) -> &str {
        &self.id.version
    }

    pub fn schema(&self) -> &MetricSchema {
        &self.schema
    }

    pub fn instances(&self) -> &[Instance] {
        &self.instances
    }

    pub fn len(&self) -> usize {
        self.instances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instances.is_empty()
    }

    pub fn defect_count(&self) -> usize {
        self.instances.iter().filter(|i| i.is_buggy()).count()
    }

    /// Fraction of buggy instances in `[0, 1]`.
    pub fn defect_ratio(&self) -> f64 {
        self.defect_count() as f64 / self.instances.len() as f64
    }

    pub fn is_log_transformed(&self) -> bool {
        self.log_transformed
    }

    pub(crate) fn set_log_transformed(&mut self, flag: bool) {
        self.log_transformed = flag;
    }

    pub(crate) fn set_identity(&mut self, project: &str, version: &str) {
        self.id = ReleaseId::new(project, version);
    }
}

/// Replaces every metric value `f` with `ln(f + 1)`.
///
/// Values must be nonnegative; use [`log_transform_clamping`] for dirty data.
/// The returned release carries a transformed flag so a second application
/// is rejected instead of silently compounding.
pub fn log_transform(release: &Release) -> Result<Release> {
    log_transform_with(release, false)
}

/// Like [`log_transform`] but clamps negative metric values to 0 first.
pub fn log_transform_clamping(release: &Release) -> Result<Release> {
    log_transform_with(release, true)
}

fn log_transform_with(release: &Release, clamp: bool) -> Result<Release> {
    if release.log_transformed {
        return Err(Error::AlreadyTransformed(release.id.to_string()));
    }
    let mut instances = Vec::with_capacity(release.instances.len());
    let names = release.schema.names();
    for (row, inst) in release.instances.iter().enumerate() {
        let mut metrics = Vec::with_capacity(inst.metrics.len());
        for (j, &value) in inst.metrics.iter().enumerate() {
            let v = if value < 0.0 {
                if clamp {
                    0.0
                } else {
                    return Err(Error::NegativeMetric {
                        row: row + 1,
                        metric: names[j].clone(),
                        value,
                    });
                }
            } else {
                value
            };
            metrics.push((v + 1.0).ln());
        }
        instances.push(Instance {
            metrics,
            bug_count: inst.bug_count,
            label: inst.label,
        });
    }
    Ok(Release {
        id: release.id.clone(),
        schema: release.schema.clone(),
        instances,
        log_transformed: true,
    })
}

/// A collection of releases with unique `(project, version)` identities.
#[derive(Clone, Debug, Default)]
pub struct Repository {
    releases: Vec<Release>,
}

impl Repository {
    pub fn new(releases: Vec<Release>) -> Result<Self> {
        let mut seen = std::collections::HashSet::new();
        for release in &releases {
            if !seen.insert(release.id().clone()) {
                return Err(Error::Parameter(format!(
                    "duplicate release {} in repository",
                    release.id()
                )));
            }
        }
        Ok(Repository { releases })
    }

    pub fn releases(&self) -> &[Release] {
        &self.releases
    }

    pub fn len(&self) -> usize {
        self.releases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.releases.is_empty()
    }

    pub fn find(&self, project: &str, version: &str) -> Option<&Release> {
        self.releases
            .iter()
            .find(|r| r.project() == project && r.version() == version)
    }

    pub fn total_instances(&self) -> usize {
        self.releases.iter().map(Release::len).sum()
    }

    /// Distinct project names, in first-seen order.
    pub fn projects(&self) -> Vec<&str> {
        let mut seen = std::collections::HashSet::new();
        self.releases
            .iter()
            .map(Release::project)
            .filter(|p| seen.insert(*p))
            .collect()
    }
}

/// Builds the candidate training pool for `target`: every release whose
/// project differs from the target's. All versions of the target project
/// are excluded, not just the target release itself.
pub fn candidate_pool(repo: &Repository, target: &Release) -> Result<Repository> {
    if repo.find(target.project(), target.version()).is_none() {
        return Err(Error::Parameter(format!(
            "target release {} is not part of the repository",
            target.id()
        )));
    }
    let releases: Vec<Release> = repo
        .releases
        .iter()
        .filter(|r| r.project() != target.project())
        .cloned()
        .collect();
    if releases.is_empty() {
        return Err(Error::NoCandidates(target.project().to_string()));
    }
    Repository::new(releases)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn schema1() -> MetricSchema {
        MetricSchema::new(vec!["m0".into()]).unwrap()
    }

    fn release_of(project: &str, version: &str, values: &[(f64, u32)]) -> Release {
        let instances = values
            .iter()
            .map(|&(v, bugs)| Instance::new(vec![v], bugs).unwrap())
            .collect();
        Release::new(project, version, schema1(), instances).unwrap()
    }

    #[test]
    fn binarize_zero_is_non_buggy() {
        assert_eq!(binarize(0), Label::NonBuggy);
    }

    #[test]
    fn binarize_any_positive_count_is_buggy() {
        assert_eq!(binarize(1), Label::Buggy);
        assert_eq!(binarize(437), Label::Buggy);
    }

    #[test]
    fn instance_label_follows_bug_count() {
        let a = Instance::new(vec![1.0], 3).unwrap();
        assert!(a.is_buggy());
        let b = Instance::new(vec![1.0], 0).unwrap();
        assert!(!b.is_buggy());
    }

    #[test]
    fn instance_rejects_non_finite_metrics() {
        assert!(Instance::new(vec![f64::NAN], 0).is_err());
        assert!(Instance::new(vec![f64::INFINITY], 0).is_err());
    }

    #[test]
    fn log_transform_maps_known_values() {
        let release = release_of(
            "p",
            "1",
            &[(0.0, 0), (std::f64::consts::E - 1.0, 0), (10.0, 2)],
        );
        let transformed = log_transform(&release).unwrap();
        let values: Vec<f64> = transformed
            .instances()
            .iter()
            .map(|i| i.metrics()[0])
            .collect();
        assert_eq!(values[0], 0.0);
        assert!((values[1] - 1.0).abs() < 1e-12);
        assert!((values[2] - 11f64.ln()).abs() < 1e-9);
        // Bug data untouched.
        assert_eq!(transformed.instances()[2].bug_count(), 2);
        assert!(transformed.instances()[2].is_buggy());
        assert!(transformed.is_log_transformed());
    }

    #[test]
    fn log_transform_rejects_second_application() {
        let release = release_of("p", "1", &[(1.0, 0)]);
        let once = log_transform(&release).unwrap();
        assert!(matches!(
            log_transform(&once),
            Err(Error::AlreadyTransformed(_))
        ));
    }

    #[test]
    fn log_transform_negative_value_is_an_error_unless_clamped() {
        let release = release_of("p", "1", &[(-0.5, 0)]);
        match log_transform(&release) {
            Err(Error::NegativeMetric { row, metric, .. }) => {
                assert_eq!(row, 1);
                assert_eq!(metric, "m0");
            }
            other => panic!("expected NegativeMetric, got {other:?}"),
        }
        let clamped = log_transform_clamping(&release).unwrap();
        assert_eq!(clamped.instances()[0].metrics()[0], 0.0);
    }

    #[test]
    fn log_transform_preserves_column_order() {
        let release = release_of("p", "1", &[(0.0, 0), (3.5, 0), (1.2, 0), (100.0, 0)]);
        let transformed = log_transform(&release).unwrap();
        let raw: Vec<f64> = release.instances().iter().map(|i| i.metrics()[0]).collect();
        let out: Vec<f64> = transformed
            .instances()
            .iter()
            .map(|i| i.metrics()[0])
            .collect();
        for i in 0..raw.len() {
            for j in 0..raw.len() {
                assert_eq!(raw[i] < raw[j], out[i] < out[j]);
            }
        }
    }

    #[test]
    fn repository_rejects_duplicate_ids() {
        let r1 = release_of("p", "1", &[(1.0, 0)]);
        let r2 = release_of("p", "1", &[(2.0, 0)]);
        assert!(Repository::new(vec![r1, r2]).is_err());
    }

    #[test]
    fn candidate_pool_excludes_all_versions_of_target_project() {
        let repo = Repository::new(vec![
            release_of("a", "1", &[(1.0, 0)]),
            release_of("a", "2", &[(1.0, 0)]),
            release_of("b", "1", &[(1.0, 0)]),
            release_of("c", "1", &[(1.0, 0)]),
        ])
        .unwrap();
        let target = repo.find("a", "1").unwrap().clone();
        let pool = candidate_pool(&repo, &target).unwrap();
        assert_eq!(pool.len(), 2);
        assert!(pool.releases().iter().all(|r| r.project() != "a"));
    }

    #[test]
    fn candidate_pool_single_project_errors() {
        let repo = Repository::new(vec![
            release_of("a", "1", &[(1.0, 0)]),
            release_of("a", "2", &[(1.0, 0)]),
        ])
        .unwrap();
        let target = repo.find("a", "1").unwrap().clone();
        assert!(matches!(
            candidate_pool(&repo, &target),
            Err(Error::NoCandidates(_))
        ));
    }

    /// Release structure of the 34 PROMISE data sets: (project, number of
    /// releases, instances per release). Pool sizes are pure counting, so
    /// the published layout is reproducible from this metadata alone.
    const PROMISE_LAYOUT: [(&str, &[usize]); 10] = [
        ("ant", &[125, 178, 293, 351, 745]),
        ("camel", &[339, 608, 872, 965]),
        ("ivy", &[111, 241, 352]),
        ("jedit", &[272, 306]),
        ("lucene", &[195, 247, 340]),
        ("poi", &[237, 314, 385, 442]),
        ("synapse", &[157, 222, 256]),
        ("velocity", &[196, 214, 229]),
        ("xalan", &[723, 803, 885]),
        ("xerces", &[162, 440, 453, 588]),
    ];

    fn promise_layout_repo() -> Repository {
        let mut releases = Vec::new();
        for (project, sizes) in PROMISE_LAYOUT {
            for (i, &n) in sizes.iter().enumerate() {
                let rows: Vec<(f64, u32)> = (0..n).map(|j| (j as f64, 0)).collect();
                releases.push(release_of(project, &format!("v{i}"), &rows));
            }
        }
        Repository::new(releases).unwrap()
    }

    #[test]
    fn candidate_pool_counts_match_the_published_layout() {
        let repo = promise_layout_repo();
        assert_eq!(repo.len(), 34);
        assert_eq!(repo.total_instances(), 13246);

        // A 3-release project keeps 31 candidates, a 5-release one 29.
        let xalan = repo.find("xalan", "v1").unwrap().clone();
        assert_eq!(candidate_pool(&repo, &xalan).unwrap().len(), 31);
        let ant17 = repo.find("ant", "v4").unwrap().clone();
        assert_eq!(candidate_pool(&repo, &ant17).unwrap().len(), 29);

        // Mean pool size over all 34 targets.
        let mean: f64 = repo
            .releases()
            .iter()
            .map(|t| candidate_pool(&repo, t).unwrap().total_instances() as f64)
            .sum::<f64>()
            / repo.len() as f64;
        assert!((mean - 11824.0).abs() < 0.5, "mean pool size {mean}");
    }
}
