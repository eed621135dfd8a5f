//! Evaluation measures for binary defect predictors.
//!
//! Measures with an undefined denominator are reported as `None` rather
//! than silently coerced to zero; aggregation layers count the exclusions.
//! AUC uses the rank (Mann-Whitney) formulation: the probability that a
//! randomly chosen defective instance scores above a randomly chosen
//! clean one, with ties counted half.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::classifiers::Prediction;
use crate::dataset::{Instance, Label, Release};
use crate::error::{Error, Result};

/// Counts of the four prediction outcomes; buggy is the positive class.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub true_pos: usize,
    pub false_pos: usize,
    pub true_neg: usize,
    pub false_neg: usize,
}

impl ConfusionMatrix {
    pub fn new(true_pos: usize, false_pos: usize, true_neg: usize, false_neg: usize) -> Self {
        ConfusionMatrix {
            true_pos,
            false_pos,
            true_neg,
            false_neg,
        }
    }

    pub fn total(&self) -> usize {
        self.true_pos + self.false_pos + self.true_neg + self.false_neg
    }
}

/// Tallies predictions against ground truth.
pub fn confusion(predictions: &[Prediction], truth: &[Label]) -> Result<ConfusionMatrix> {
    if predictions.len() != truth.len() {
        return Err(Error::Shape {
            expected: truth.len(),
            actual: predictions.len(),
        });
    }
    if predictions.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut cm = ConfusionMatrix::default();
    for (pred, &actual) in predictions.iter().zip(truth) {
        match (pred.label.is_buggy(), actual.is_buggy()) {
            (true, true) => cm.true_pos += 1,
            (true, false) => cm.false_pos += 1,
            (false, false) => cm.true_neg += 1,
            (false, true) => cm.false_neg += 1,
        }
    }
    Ok(cm)
}

/// The scalar evaluation measures; `None` marks an undefined denominator.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct MeasureSet {
    pub precision: Option<f64>,
    pub pd: Option<f64>,
    pub pf: Option<f64>,
    pub f_measure: Option<f64>,
    pub g_measure: Option<f64>,
    pub accuracy: f64,
    pub auc: Option<f64>,
    pub dpr: Option<f64>,
}

/// Derives all confusion-matrix measures. `auc` and `dpr` are not
/// derivable from counts alone and stay `None` here.
pub fn measures(cm: &ConfusionMatrix) -> MeasureSet {
    let tp = cm.true_pos as f64;
    let fp = cm.false_pos as f64;
    let tn = cm.true_neg as f64;
    let fn_ = cm.false_neg as f64;

    let ratio = |num: f64, den: f64| if den > 0.0 { Some(num / den) } else { None };
    let precision = ratio(tp, tp + fp);
    let pd = ratio(tp, tp + fn_);
    let pf = ratio(fp, fp + tn);

    let f_measure = match (precision, pd) {
        (Some(p), Some(r)) if p + r > 0.0 => Some(2.0 * r * p / (r + p)),
        _ => None,
    };
    let g_measure = match (pd, pf) {
        (Some(r), Some(f)) if r + (1.0 - f) > 0.0 => {
            Some(2.0 * r * (1.0 - f) / (r + (1.0 - f)))
        }
        _ => None,
    };

    MeasureSet {
        precision,
        pd,
        pf,
        f_measure,
        g_measure,
        accuracy: (tp + tn) / cm.total() as f64,
        auc: None,
        dpr: None,
    }
}

/// Area under the ROC curve by midranks.
///
/// Equal to the fraction of (defective, clean) pairs ranked correctly,
/// ties counted half; errors when the truth contains a single class.
pub fn auc(scores: &[f64], truth: &[Label]) -> Result<f64> {
    if scores.len() != truth.len() {
        return Err(Error::Shape {
            expected: truth.len(),
            actual: scores.len(),
        });
    }
    let n_pos = truth.iter().filter(|l| l.is_buggy()).count();
    let n_neg = truth.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::UndefinedAuc);
    }

    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].partial_cmp(&scores[b]).expect("finite scores"));

    // Midranks: tied scores all receive the mean of their 1-based positions.
    let mut rank_sum_pos = 0.0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j < order.len() && scores[order[j]] == scores[order[i]] {
            j += 1;
        }
        let midrank = (i + 1 + j) as f64 / 2.0;
        for &idx in &order[i..j] {
            if truth[idx].is_buggy() {
                rank_sum_pos += midrank;
            }
        }
        i = j;
    }

    let u = rank_sum_pos - (n_pos * (n_pos + 1)) as f64 / 2.0;
    Ok(u / (n_pos as f64 * n_neg as f64))
}

/// Defect-proneness ratio outcome.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DprOutcome {
    pub value: f64,
    /// Set when the training set has no defects at all: the ratio is 0 but
    /// carries no ranking information.
    pub degenerate_training: bool,
}

/// Ratio of the defect proportion in the training instances to the defect
/// proportion in the test release.
pub fn dpr<'a, I>(training: I, test: &Release) -> Result<DprOutcome>
where
    I: IntoIterator<Item = &'a Instance>,
{
    let mut total = 0usize;
    let mut buggy = 0usize;
    for inst in training {
        total += 1;
        if inst.is_buggy() {
            buggy += 1;
        }
    }
    if total == 0 {
        return Err(Error::Parameter("empty training set".into()));
    }
    let test_ratio = test.defect_ratio();
    if test_ratio == 0.0 {
        return Err(Error::UndefinedDpr);
    }
    let train_ratio = buggy as f64 / total as f64;
    Ok(DprOutcome {
        value: train_ratio / test_ratio,
        degenerate_training: buggy == 0,
    })
}

/// Ratio of two defect proportions directly.
pub fn dpr_from_ratios(train_ratio: f64, test_ratio: f64) -> Result<f64> {
    if test_ratio <= 0.0 {
        return Err(Error::UndefinedDpr);
    }
    Ok(train_ratio / test_ratio)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WilcoxonMethod {
    /// All paired differences were zero; no evidence either way.
    Degenerate,
    /// Exact null distribution, enumerated over sign assignments.
    Exact,
    /// Normal approximation with tie correction.
    NormalApproximation,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WilcoxonResult {
    /// Signed rank sum `W+ - W-`; negating all differences negates it.
    pub statistic: f64,
    /// Two-sided p-value for the null of identical medians.
    pub p_value: f64,
    /// Number of nonzero differences actually used.
    pub n: usize,
    pub method: WilcoxonMethod,
}

const WILCOXON_MIN_PAIRS: usize = 5;
const WILCOXON_EXACT_MAX: usize = 20;

/// Two-sided Wilcoxon signed-rank test on paired samples.
///
/// Zero differences are dropped. With up to [`WILCOXON_EXACT_MAX`] nonzero
/// pairs the exact null distribution is used; beyond that, a normal
/// approximation with tie correction.
pub fn wilcoxon_signed_rank(a: &[f64], b: &[f64]) -> Result<WilcoxonResult> {
    if a.len() != b.len() {
        return Err(Error::Shape {
            expected: a.len(),
            actual: b.len(),
        });
    }
    let diffs: Vec<f64> = a
        .iter()
        .zip(b)
        .map(|(x, y)| x - y)
        .filter(|d| *d != 0.0)
        .collect();
    if diffs.is_empty() {
        return Ok(WilcoxonResult {
            statistic: 0.0,
            p_value: 1.0,
            n: 0,
            method: WilcoxonMethod::Degenerate,
        });
    }
    let n = diffs.len();
    if n < WILCOXON_MIN_PAIRS {
        return Err(Error::SampleSize {
            required: WILCOXON_MIN_PAIRS,
            found: n,
        });
    }

    let ranks = midranks(&diffs);
    let w_plus: f64 = diffs
        .iter()
        .zip(&ranks)
        .filter(|(d, _)| **d > 0.0)
        .map(|(_, r)| *r)
        .sum();
    let w_minus: f64 = ranks.iter().sum::<f64>() - w_plus;
    let statistic = w_plus - w_minus;
    let w_small = w_plus.min(w_minus);

    let (p_value, method) = if n <= WILCOXON_EXACT_MAX {
        (exact_p(&ranks, w_small), WilcoxonMethod::Exact)
    } else {
        (approx_p(&diffs, w_small), WilcoxonMethod::NormalApproximation)
    };

    Ok(WilcoxonResult {
        statistic,
        p_value,
        n,
        method,
    })
}

/// Midranks of `|diffs|`, 1-based, ties averaged.
fn midranks(diffs: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..diffs.len()).collect();
    order.sort_by(|&a, &b| {
        diffs[a]
            .abs()
            .partial_cmp(&diffs[b].abs())
            .expect("finite differences")
    });
    let mut ranks = vec![0.0; diffs.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j < order.len() && diffs[order[j]].abs() == diffs[order[i]].abs() {
            j += 1;
        }
        let midrank = (i + 1 + j) as f64 / 2.0;
        for &idx in &order[i..j] {
            ranks[idx] = midrank;
        }
        i = j;
    }
    ranks
}

/// Exact two-sided p-value: the distribution of `W+` is tabulated by
/// dynamic programming over doubled ranks (midranks are half-integers, so
/// doubling makes every rank an exact integer index).
fn exact_p(ranks: &[f64], w_small: f64) -> f64 {
    let doubled: Vec<usize> = ranks.iter().map(|r| (2.0 * r).round() as usize).collect();
    let max_sum: usize = doubled.iter().sum();
    let mut ways = vec![0u64; max_sum + 1];
    ways[0] = 1;
    for &r in &doubled {
        for s in (r..=max_sum).rev() {
            ways[s] += ways[s - r];
        }
    }
    let cutoff = (2.0 * w_small).round() as usize;
    let below: u64 = ways[..=cutoff.min(max_sum)].iter().sum();
    let total = 2f64.powi(ranks.len() as i32);
    (2.0 * below as f64 / total).min(1.0)
}

/// Normal approximation with tie correction on the variance.
fn approx_p(diffs: &[f64], w_small: f64) -> f64 {
    let n = diffs.len() as f64;
    let mean = n * (n + 1.0) / 4.0;

    let mut sorted: Vec<f64> = diffs.iter().map(|d| d.abs()).collect();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite differences"));
    let mut tie_term = 0.0;
    let mut i = 0;
    while i < sorted.len() {
        let mut j = i;
        while j < sorted.len() && sorted[j] == sorted[i] {
            j += 1;
        }
        let t = (j - i) as f64;
        tie_term += t * t * t - t;
        i = j;
    }
    let variance = n * (n + 1.0) * (2.0 * n + 1.0) / 24.0 - tie_term / 48.0;
    let z = (w_small - mean) / variance.sqrt();
    let normal = Normal::new(0.0, 1.0).expect("unit normal");
    (2.0 * normal.cdf(z)).min(1.0)
}
