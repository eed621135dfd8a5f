//! Leave-one-release-out experiment orchestration.
//!
//! Every release of the repository becomes the test set once; the
//! candidate pool excludes all releases of the target's project. Each
//! configured (strategy, classifier, r) cell trains on the simplified
//! pool and predicts the whole target release. Cells that fail are
//! recorded with their reason and the run continues.
//!
//! Output order is fully deterministic: records are sorted by
//! (target, strategy, classifier, r) before they are returned, no matter
//! how the work was scheduled.

use std::collections::BTreeMap;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classifiers::{train_on, ClassifierKind, Prediction};
use crate::dataset::{candidate_pool, log_transform, log_transform_clamping, Label, Release, ReleaseId, Repository};
use crate::error::{Error, Result};
use crate::metrics::{auc, confusion, dpr, measures, wilcoxon_signed_rank, ConfusionMatrix, MeasureSet};
use crate::selector::{evaluate_rule, fit_rule, recommend, FilterChoice, PredictionPair, RhoRule, RuleEvaluation};
use crate::simplify::{flatten, select_rtds, simplify, PoolInstance, SimplifiedTds, Strategy};

/// Strategies available to the experiment harness: the four simplification
/// strategies, the no-simplification baseline, and DPR-driven filter
/// selection.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ExperimentStrategy {
    #[serde(rename = "none")]
    None,
    #[serde(rename = "rtds")]
    RTds,
    #[serde(rename = "itds")]
    ITds,
    #[serde(rename = "ritds1")]
    RiTds1,
    #[serde(rename = "ritds2")]
    RiTds2,
    #[serde(rename = "ritds-rho")]
    RiTdsRho,
}

impl ExperimentStrategy {
    /// Whether the release-count parameter `r` varies this strategy.
    pub fn uses_r(self) -> bool {
        matches!(
            self,
            ExperimentStrategy::RTds
                | ExperimentStrategy::RiTds1
                | ExperimentStrategy::RiTds2
                | ExperimentStrategy::RiTdsRho
        )
    }

    pub fn all() -> [ExperimentStrategy; 6] {
        [
            ExperimentStrategy::None,
            ExperimentStrategy::RTds,
            ExperimentStrategy::ITds,
            ExperimentStrategy::RiTds1,
            ExperimentStrategy::RiTds2,
            ExperimentStrategy::RiTdsRho,
        ]
    }
}

impl std::fmt::Display for ExperimentStrategy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            ExperimentStrategy::None => "none",
            ExperimentStrategy::RTds => "rtds",
            ExperimentStrategy::ITds => "itds",
            ExperimentStrategy::RiTds1 => "ritds1",
            ExperimentStrategy::RiTds2 => "ritds2",
            ExperimentStrategy::RiTdsRho => "ritds-rho",
        };
        write!(f, "{name}")
    }
}

impl std::str::FromStr for ExperimentStrategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "none" => Ok(ExperimentStrategy::None),
            "rtds" => Ok(ExperimentStrategy::RTds),
            "itds" => Ok(ExperimentStrategy::ITds),
            "ritds1" | "ritds-1" => Ok(ExperimentStrategy::RiTds1),
            "ritds2" | "ritds-2" => Ok(ExperimentStrategy::RiTds2),
            "ritds-rho" | "ritdsrho" | "rho" => Ok(ExperimentStrategy::RiTdsRho),
            other => Err(Error::Parameter(format!("unknown strategy `{other}`"))),
        }
    }
}

/// Which measure drives the filter-selection grouping.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum RhoMeasure {
    #[serde(rename = "f-measure")]
    FMeasure,
    #[serde(rename = "g-measure")]
    GMeasure,
}

impl RhoMeasure {
    fn extract(self, ms: &MeasureSet) -> Option<f64> {
        match self {
            RhoMeasure::FMeasure => ms.f_measure,
            RhoMeasure::GMeasure => ms.g_measure,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            RhoMeasure::FMeasure => "f-measure",
            RhoMeasure::GMeasure => "g-measure",
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub strategies: Vec<ExperimentStrategy>,
    pub classifiers: Vec<ClassifierKind>,
    /// Release counts for the r-dependent strategies.
    pub r_values: Vec<usize>,
    /// Instance-level neighbour count.
    pub k: usize,
    pub seed: u64,
    /// Measure used to fit the DPR rule for `ritds-rho`.
    pub rho_measure: RhoMeasure,
    /// Apply `ln(f + 1)` to releases that are not transformed yet.
    pub apply_log_transform: bool,
    /// Clamp negative metric values to 0 instead of failing.
    pub clamp_negatives: bool,
    /// Worker threads; `None` leaves the choice to the runtime.
    pub jobs: Option<usize>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            strategies: vec![
                ExperimentStrategy::RTds,
                ExperimentStrategy::RiTds1,
                ExperimentStrategy::RiTds2,
            ],
            classifiers: vec![ClassifierKind::NaiveBayes],
            r_values: vec![1, 2, 3],
            k: 10,
            seed: 0,
            rho_measure: RhoMeasure::FMeasure,
            apply_log_transform: true,
            clamp_negatives: false,
            jobs: None,
        }
    }
}

/// Outcome of one (target, strategy, classifier, r) cell.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EvaluationRecord {
    pub target: ReleaseId,
    pub strategy: ExperimentStrategy,
    pub classifier: ClassifierKind,
    /// 0 when the strategy does not use r.
    pub r: usize,
    pub k: usize,
    pub tds_size: usize,
    pub source_releases: Vec<ReleaseId>,
    pub confusion: Option<ConfusionMatrix>,
    pub measures: Option<MeasureSet>,
    /// DPR of the selected rTDS against the target; the feature the filter
    /// recommendation is made from.
    pub selection_dpr: Option<f64>,
    /// The training set contained no defective instance at all.
    pub training_dpr_degenerate: bool,
    /// Filter picked by the DPR rule (ritds-rho cells only).
    pub chosen_filter: Option<FilterChoice>,
    /// Training data was single-class; the model is a constant.
    pub degenerate_model: bool,
    pub error: Option<String>,
    /// Wall-clock seconds for the cell; excluded from serialized output so
    /// reports stay byte-identical across reruns.
    #[serde(skip)]
    pub runtime_secs: f64,
}

impl EvaluationRecord {
    fn failed(
        target: &ReleaseId,
        strategy: ExperimentStrategy,
        classifier: ClassifierKind,
        r: usize,
        k: usize,
        reason: String,
    ) -> Self {
        EvaluationRecord {
            target: target.clone(),
            strategy,
            classifier,
            r,
            k,
            tds_size: 0,
            source_releases: Vec::new(),
            confusion: None,
            measures: None,
            selection_dpr: None,
            training_dpr_degenerate: false,
            chosen_filter: None,
            degenerate_model: false,
            error: Some(reason),
            runtime_secs: 0.0,
        }
    }

    fn sort_key(&self) -> (ReleaseId, u8, u8, usize) {
        let s = match self.strategy {
            ExperimentStrategy::None => 0,
            ExperimentStrategy::RTds => 1,
            ExperimentStrategy::ITds => 2,
            ExperimentStrategy::RiTds1 => 3,
            ExperimentStrategy::RiTds2 => 4,
            ExperimentStrategy::RiTdsRho => 5,
        };
        let c = match self.classifier {
            ClassifierKind::NaiveBayes => 0,
            ClassifierKind::LogisticRegression => 1,
            ClassifierKind::DecisionTree => 2,
        };
        (self.target.clone(), s, c, self.r)
    }
}

fn preprocess(repo: &Repository, config: &ExperimentConfig) -> Result<Repository> {
    if !config.apply_log_transform {
        return Ok(repo.clone());
    }
    let releases = repo
        .releases()
        .iter()
        .map(|release| {
            if release.is_log_transformed() {
                Ok(release.clone())
            } else if config.clamp_negatives {
                log_transform_clamping(release)
            } else {
                log_transform(release)
            }
        })
        .collect::<Result<Vec<Release>>>()?;
    Repository::new(releases)
}

fn truth_of(release: &Release) -> Vec<Label> {
    release.instances().iter().map(|i| i.label()).collect()
}

/// Training set of one cell: instances, source releases, selection DPR (if
/// meaningful for the strategy) and whether that DPR is degenerate.
type BuiltTds = (Vec<PoolInstance>, Vec<ReleaseId>, Option<f64>, bool);

/// Per-(target, r) pairing of the two filter records.
type FilterCells<'a> = BTreeMap<(ReleaseId, usize), (Option<&'a EvaluationRecord>, Option<&'a EvaluationRecord>)>;

/// Trains a classifier on `instances` and evaluates it on the whole target
/// release, filling in confusion counts, measures, AUC and training DPR.
fn evaluate_cell(
    record: &mut EvaluationRecord,
    instances: &[PoolInstance],
    classifier: ClassifierKind,
    target: &Release,
) -> Result<()> {
    let model = train_on(classifier, instances)?;
    record.degenerate_model = model.provenance().degenerate_single_class.is_some();

    let predictions: Vec<Prediction> = model.predict_release(target)?;
    let truth = truth_of(target);
    let cm = confusion(&predictions, &truth)?;
    let mut ms = measures(&cm);

    let scores: Vec<f64> = predictions.iter().map(|p| p.score).collect();
    ms.auc = auc(&scores, &truth).ok();
    match dpr(instances.iter().map(|p| &p.instance), target) {
        Ok(outcome) => {
            ms.dpr = Some(outcome.value);
            record.training_dpr_degenerate = outcome.degenerate_training;
        }
        Err(_) => ms.dpr = None,
    }

    record.tds_size = instances.len();
    record.confusion = Some(cm);
    record.measures = Some(ms);
    Ok(())
}

fn run_target(
    repo: &Repository,
    target: &Release,
    config: &ExperimentConfig,
    strategies: &[ExperimentStrategy],
) -> Vec<EvaluationRecord> {
    let mut records = Vec::new();
    let id = target.id().clone();

    let pool = match candidate_pool(repo, target) {
        Ok(pool) => pool,
        Err(e) => {
            // Without a candidate pool no cell of this target can run.
            for &strategy in strategies {
                let rs: &[usize] = if strategy.uses_r() { &config.r_values } else { &[0] };
                for &r in rs {
                    for &classifier in &config.classifiers {
                        records.push(EvaluationRecord::failed(
                            &id,
                            strategy,
                            classifier,
                            r,
                            config.k,
                            e.to_string(),
                        ));
                    }
                }
            }
            return records;
        }
    };

    let flat_pool = flatten(&pool);

    // rTDS selections shared by every r-dependent strategy and classifier.
    let mut rtds_cache: BTreeMap<usize, Result<(Repository, f64, bool)>> = BTreeMap::new();
    let needs_rtds = strategies.iter().any(|s| s.uses_r());
    if needs_rtds {
        for &r in &config.r_values {
            let entry = select_rtds(&pool, target, r).map(|rtds| {
                let flat = flatten(&rtds);
                let outcome = dpr(flat.iter().map(|p| &p.instance), target);
                let (value, degenerate) = match outcome {
                    Ok(o) => (o.value, o.degenerate_training),
                    Err(_) => (f64::NAN, false),
                };
                (rtds, value, degenerate)
            });
            rtds_cache.insert(r, entry);
        }
    }

    for &strategy in strategies {
        if strategy == ExperimentStrategy::RiTdsRho {
            continue; // derived after the base cells exist
        }
        let rs: &[usize] = if strategy.uses_r() { &config.r_values } else { &[0] };
        for &r in rs {
            // Build the training set once per (strategy, r).
            let built: Result<BuiltTds> = (|| {
                match strategy {
                    ExperimentStrategy::None => {
                        let sources = pool.releases().iter().map(|p| p.id().clone()).collect();
                        Ok((flat_pool.clone(), sources, None, false))
                    }
                    ExperimentStrategy::ITds => {
                        let tds = simplify(&pool, target, Strategy::ITds, 0, config.k)?;
                        Ok((
                            tds.instances().to_vec(),
                            tds.source_releases().to_vec(),
                            None,
                            false,
                        ))
                    }
                    ExperimentStrategy::RTds
                    | ExperimentStrategy::RiTds1
                    | ExperimentStrategy::RiTds2 => {
                        let (rtds, sel_dpr, degenerate) = match rtds_cache
                            .get(&r)
                            .expect("r cached")
                        {
                            Ok(v) => v.clone(),
                            Err(e) => return Err(Error::Parameter(e.to_string())),
                        };
                        let sel = if sel_dpr.is_nan() { None } else { Some(sel_dpr) };
                        let sources: Vec<ReleaseId> =
                            rtds.releases().iter().map(|p| p.id().clone()).collect();
                        let instances = match strategy {
                            ExperimentStrategy::RTds => {
                                let tds = SimplifiedTds::new(
                                    flatten(&rtds),
                                    Strategy::RTds,
                                    r,
                                    config.k,
                                    sources.clone(),
                                )?;
                                tds.instances().to_vec()
                            }
                            ExperimentStrategy::RiTds1 => {
                                crate::simplify::filter_ritds1(&rtds, target, config.k)?
                                    .instances()
                                    .to_vec()
                            }
                            ExperimentStrategy::RiTds2 => {
                                crate::simplify::filter_ritds2(&rtds, target, config.k)?
                                    .instances()
                                    .to_vec()
                            }
                            _ => unreachable!(),
                        };
                        Ok((instances, sources, sel, degenerate))
                    }
                    ExperimentStrategy::RiTdsRho => unreachable!(),
                }
            })();

            for &classifier in &config.classifiers {
                let start = Instant::now();
                let mut record = EvaluationRecord {
                    target: id.clone(),
                    strategy,
                    classifier,
                    r,
                    k: config.k,
                    tds_size: 0,
                    source_releases: Vec::new(),
                    confusion: None,
                    measures: None,
                    selection_dpr: None,
                    training_dpr_degenerate: false,
                    chosen_filter: None,
                    degenerate_model: false,
                    error: None,
                    runtime_secs: 0.0,
                };
                match &built {
                    Ok((instances, sources, sel_dpr, _)) => {
                        record.source_releases = sources.clone();
                        record.selection_dpr = *sel_dpr;
                        if let Err(e) = evaluate_cell(&mut record, instances, classifier, target) {
                            record.error = Some(e.to_string());
                        }
                    }
                    Err(e) => record.error = Some(e.to_string()),
                }
                record.runtime_secs = start.elapsed().as_secs_f64();
                records.push(record);
            }
        }
    }

    records
}

/// Fitted DPR rule plus its evaluation, per classifier.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RhoRuleReport {
    pub classifier: ClassifierKind,
    pub measure: String,
    pub n_pairs: usize,
    pub rule: RhoRule,
    pub evaluation: RuleEvaluation,
}

/// Builds filter-selection pairs from riTDS-1 / riTDS-2 records: one pair
/// per (target, r) with defined measures and a usable selection DPR.
pub fn build_pairs(
    records: &[EvaluationRecord],
    classifier: ClassifierKind,
    measure: RhoMeasure,
) -> Vec<PredictionPair> {
    // (measure_1, measure_2, selection dpr) per (target, r).
    type PairCell = (Option<f64>, Option<f64>, Option<f64>);
    let mut by_cell: BTreeMap<(ReleaseId, usize), PairCell> = BTreeMap::new();
    for rec in records {
        if rec.classifier != classifier || rec.error.is_some() {
            continue;
        }
        let value = rec.measures.as_ref().and_then(|ms| measure.extract(ms));
        let entry = by_cell
            .entry((rec.target.clone(), rec.r))
            .or_insert((None, None, None));
        match rec.strategy {
            ExperimentStrategy::RiTds1 => {
                entry.0 = value;
                entry.2 = rec.selection_dpr;
            }
            ExperimentStrategy::RiTds2 => {
                entry.1 = value;
                entry.2 = entry.2.or(rec.selection_dpr);
            }
            _ => {}
        }
    }
    by_cell
        .into_iter()
        .filter_map(|((target, r), (m1, m2, sel_dpr))| {
            let dpr = sel_dpr?;
            if !(dpr.is_finite() && dpr > 0.0) {
                return None;
            }
            Some(PredictionPair {
                target: format!("{target}#r{r}"),
                dpr,
                measure_1: m1?,
                measure_2: m2?,
            })
        })
        .collect()
}

/// Fits one DPR rule per classifier present in the records.
pub fn fit_rho_rules(records: &[EvaluationRecord], measure: RhoMeasure) -> Vec<RhoRuleReport> {
    let mut classifiers: Vec<ClassifierKind> = records.iter().map(|r| r.classifier).collect();
    classifiers.sort_by_key(|c| format!("{c}"));
    classifiers.dedup();

    let mut reports = Vec::new();
    for classifier in classifiers {
        let pairs = build_pairs(records, classifier, measure);
        let Ok(rule) = fit_rule(&pairs) else { continue };
        let Ok(evaluation) = evaluate_rule(&pairs, &rule) else { continue };
        reports.push(RhoRuleReport {
            classifier,
            measure: measure.name().to_string(),
            n_pairs: pairs.len(),
            rule,
            evaluation,
        });
    }
    reports
}

/// Runs the full leave-one-release-out matrix.
pub fn run_experiment(repo: &Repository, config: &ExperimentConfig) -> Result<Vec<EvaluationRecord>> {
    if config.strategies.is_empty() || config.classifiers.is_empty() {
        return Err(Error::Parameter(
            "strategy and classifier sets must be nonempty".into(),
        ));
    }
    if config.k == 0 {
        return Err(Error::Parameter("k must be at least 1".into()));
    }
    if config.strategies.iter().any(|s| s.uses_r()) && config.r_values.is_empty() {
        return Err(Error::Parameter("r value set must be nonempty".into()));
    }
    if repo.projects().len() < 2 {
        return Err(Error::Parameter(
            "cross-project prediction needs at least 2 projects".into(),
        ));
    }

    let repo = preprocess(repo, config)?;

    // ritds-rho cells are derived from the two base filters, which must be
    // computed even when not requested in the output.
    let wants_rho = config.strategies.contains(&ExperimentStrategy::RiTdsRho);
    let mut base: Vec<ExperimentStrategy> = config
        .strategies
        .iter()
        .copied()
        .filter(|s| *s != ExperimentStrategy::RiTdsRho)
        .collect();
    if wants_rho {
        for s in [ExperimentStrategy::RiTds1, ExperimentStrategy::RiTds2] {
            if !base.contains(&s) {
                base.push(s);
            }
        }
    }

    let mut targets: Vec<&Release> = repo.releases().iter().collect();
    targets.sort_by(|a, b| a.id().cmp(b.id()));

    let run_all = || -> Vec<EvaluationRecord> {
        targets
            .par_iter()
            .flat_map(|target| run_target(&repo, target, config, &base))
            .collect()
    };
    let mut records: Vec<EvaluationRecord> = match config.jobs {
        Some(jobs) => rayon::ThreadPoolBuilder::new()
            .num_threads(jobs.max(1))
            .build()
            .map_err(|e| Error::Parameter(e.to_string()))?
            .install(run_all),
        None => run_all(),
    };

    if wants_rho {
        let rho_records = derive_rho_records(&records, config);
        records.extend(rho_records);
    }

    // Drop the internal base cells the caller did not ask for.
    records.retain(|r| config.strategies.contains(&r.strategy));
    records.sort_by_key(|r| r.sort_key());
    Ok(records)
}

/// Builds ritds-rho records by fitting the per-classifier DPR rule and
/// copying the evaluation of whichever base filter it recommends.
fn derive_rho_records(
    records: &[EvaluationRecord],
    config: &ExperimentConfig,
) -> Vec<EvaluationRecord> {
    let mut out = Vec::new();
    for &classifier in &config.classifiers {
        let pairs = build_pairs(records, classifier, config.rho_measure);
        let rule = fit_rule(&pairs).ok();

        let mut cells: FilterCells = BTreeMap::new();
        for rec in records {
            if rec.classifier != classifier {
                continue;
            }
            let entry = cells.entry((rec.target.clone(), rec.r)).or_insert((None, None));
            match rec.strategy {
                ExperimentStrategy::RiTds1 => entry.0 = Some(rec),
                ExperimentStrategy::RiTds2 => entry.1 = Some(rec),
                _ => {}
            }
        }

        for ((target, r), (rec1, rec2)) in cells {
            let mut record = EvaluationRecord::failed(
                &target,
                ExperimentStrategy::RiTdsRho,
                classifier,
                r,
                config.k,
                String::new(),
            );
            let outcome = (|| -> std::result::Result<EvaluationRecord, String> {
                let rule = rule.as_ref().ok_or("no DPR rule could be fitted")?;
                let rec1 = rec1.ok_or("missing riTDS-1 cell")?;
                let rec2 = rec2.ok_or("missing riTDS-2 cell")?;
                let sel_dpr = rec1
                    .selection_dpr
                    .or(rec2.selection_dpr)
                    .ok_or("selection DPR undefined for this target")?;
                let choice = recommend(sel_dpr, rule);
                let source = match choice {
                    FilterChoice::RiTds1 => rec1,
                    FilterChoice::RiTds2 => rec2,
                };
                if let Some(e) = &source.error {
                    return Err(format!("recommended filter cell failed: {e}"));
                }
                let mut derived = source.clone();
                derived.strategy = ExperimentStrategy::RiTdsRho;
                derived.chosen_filter = Some(choice);
                Ok(derived)
            })();
            match outcome {
                Ok(derived) => record = derived,
                Err(reason) => record.error = Some(reason),
            }
            out.push(record);
        }
    }
    out
}

/// One row of the summary table: means per (strategy, classifier, r) with
/// undefined-measure exclusion counts.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SummaryRow {
    pub strategy: ExperimentStrategy,
    pub classifier: ClassifierKind,
    pub r: usize,
    pub cells: usize,
    pub failed_cells: usize,
    pub mean_tds_size: f64,
    pub mean_precision: Option<f64>,
    pub mean_pd: Option<f64>,
    pub mean_pf: Option<f64>,
    pub mean_f_measure: Option<f64>,
    pub mean_g_measure: Option<f64>,
    pub mean_accuracy: Option<f64>,
    pub mean_auc: Option<f64>,
    pub undefined_precision: usize,
    pub undefined_f_measure: usize,
    pub undefined_g_measure: usize,
    pub undefined_auc: usize,
}

fn mean(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        None
    } else {
        Some(values.iter().sum::<f64>() / values.len() as f64)
    }
}

/// Aggregates records into per-cell means. Undefined measures are excluded
/// from their mean and counted instead of being treated as zero.
pub fn summarize(records: &[EvaluationRecord]) -> Vec<SummaryRow> {
    let mut groups: BTreeMap<(u8, u8, usize), Vec<&EvaluationRecord>> = BTreeMap::new();
    for rec in records {
        let (_, s, c, r) = rec.sort_key();
        groups.entry((s, c, r)).or_default().push(rec);
    }

    groups
        .into_values()
        .map(|group| {
            let ok: Vec<&&EvaluationRecord> =
                group.iter().filter(|r| r.error.is_none()).collect();
            let first = group[0];
            let collect = |f: &dyn Fn(&MeasureSet) -> Option<f64>| -> (Vec<f64>, usize) {
                let mut values = Vec::new();
                let mut undefined = 0;
                for rec in &ok {
                    match rec.measures.as_ref().and_then(f) {
                        Some(v) => values.push(v),
                        None => undefined += 1,
                    }
                }
                (values, undefined)
            };
            let (precision, undefined_precision) = collect(&|m| m.precision);
            let (pd, _) = collect(&|m| m.pd);
            let (pf, _) = collect(&|m| m.pf);
            let (f, undefined_f_measure) = collect(&|m| m.f_measure);
            let (g, undefined_g_measure) = collect(&|m| m.g_measure);
            let (acc, _) = collect(&|m| Some(m.accuracy));
            let (auc_values, undefined_auc) = collect(&|m| m.auc);

            SummaryRow {
                strategy: first.strategy,
                classifier: first.classifier,
                r: first.r,
                cells: group.len(),
                failed_cells: group.len() - ok.len(),
                mean_tds_size: mean(
                    &ok.iter().map(|r| r.tds_size as f64).collect::<Vec<_>>(),
                )
                .unwrap_or(0.0),
                mean_precision: mean(&precision),
                mean_pd: mean(&pd),
                mean_pf: mean(&pf),
                mean_f_measure: mean(&f),
                mean_g_measure: mean(&g),
                mean_accuracy: mean(&acc),
                mean_auc: mean(&auc_values),
                undefined_precision,
                undefined_f_measure,
                undefined_g_measure,
                undefined_auc,
            }
        })
        .collect()
}

/// One paired signed-rank comparison between a two-step variant and the
/// instance-level baseline.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct WilcoxonRow {
    pub comparison: String,
    pub classifier: ClassifierKind,
    pub r: usize,
    pub measure: String,
    pub n: usize,
    /// Mean(variant) / mean(baseline).
    pub ratio_of_means: Option<f64>,
    pub statistic: Option<f64>,
    pub p_value: Option<f64>,
    pub note: Option<String>,
}

/// Pairs riTDS-1 and riTDS-2 against iTDS per (classifier, r, measure)
/// across targets, mirroring the published comparison design.
pub fn wilcoxon_table(records: &[EvaluationRecord]) -> Vec<WilcoxonRow> {
    let mut itds: BTreeMap<(ReleaseId, u8), &MeasureSet> = BTreeMap::new();
    for rec in records {
        if rec.strategy == ExperimentStrategy::ITds && rec.error.is_none() {
            if let Some(ms) = &rec.measures {
                let (_, _, c, _) = rec.sort_key();
                itds.insert((rec.target.clone(), c), ms);
            }
        }
    }
    if itds.is_empty() {
        return Vec::new();
    }

    let mut rows = Vec::new();
    for variant in [ExperimentStrategy::RiTds1, ExperimentStrategy::RiTds2] {
        let mut groups: BTreeMap<(u8, usize), Vec<&EvaluationRecord>> = BTreeMap::new();
        for rec in records {
            if rec.strategy == variant && rec.error.is_none() && rec.measures.is_some() {
                let (_, _, c, _) = rec.sort_key();
                groups.entry((c, rec.r)).or_default().push(rec);
            }
        }
        for ((c, r), group) in groups {
            for (measure_name, extract) in [
                ("f-measure", (|m: &MeasureSet| m.f_measure) as fn(&MeasureSet) -> Option<f64>),
                ("g-measure", |m: &MeasureSet| m.g_measure),
            ] {
                let mut a = Vec::new();
                let mut b = Vec::new();
                for rec in &group {
                    let Some(base) = itds.get(&(rec.target.clone(), c)) else {
                        continue;
                    };
                    if let (Some(x), Some(y)) = (
                        rec.measures.as_ref().and_then(extract),
                        extract(base),
                    ) {
                        a.push(x);
                        b.push(y);
                    }
                }
                let classifier = group[0].classifier;
                let ratio = match (mean(&a), mean(&b)) {
                    (Some(ma), Some(mb)) if mb != 0.0 => Some(ma / mb),
                    _ => None,
                };
                let mut row = WilcoxonRow {
                    comparison: format!("{variant}-vs-itds"),
                    classifier,
                    r,
                    measure: measure_name.to_string(),
                    n: a.len(),
                    ratio_of_means: ratio,
                    statistic: None,
                    p_value: None,
                    note: None,
                };
                match wilcoxon_signed_rank(&a, &b) {
                    Ok(result) => {
                        row.statistic = Some(result.statistic);
                        row.p_value = Some(result.p_value);
                    }
                    Err(e) => row.note = Some(e.to_string()),
                }
                rows.push(row);
            }
        }
    }
    rows
}
