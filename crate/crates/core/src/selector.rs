//! Choosing between the two instance filters by defect-proneness ratio.
//!
//! Each cross-project prediction yields a pair of measure values, one per
//! filter. Pairs are grouped by which filter won; a threshold sweep over
//! the DPR axis then fits the decision rule that best reproduces the
//! grouping. Two sweep directions exist: under `Plus` the test-set-driven
//! filter is recommended when `DPR >= rho`, under `Minus` when
//! `DPR < rho`. Combining both fits yields the two-sided ranges a single
//! threshold cannot express.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::ConfusionMatrix;

/// One cross-project prediction evaluated under both filters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PredictionPair {
    /// Identifier of the target release (free-form).
    pub target: String,
    pub dpr: f64,
    /// Measure achieved by the test-set-driven filter (riTDS-1).
    pub measure_1: f64,
    /// Measure achieved by the training-set-driven filter (riTDS-2).
    pub measure_2: f64,
}

/// Which instance filter to apply.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FilterChoice {
    #[serde(rename = "ritds1")]
    RiTds1,
    #[serde(rename = "ritds2")]
    RiTds2,
}

impl std::fmt::Display for FilterChoice {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            FilterChoice::RiTds1 => write!(f, "ritds1"),
            FilterChoice::RiTds2 => write!(f, "ritds2"),
        }
    }
}

/// Groups each pair by the filter that achieved the strictly greater
/// measure; ties go to the training-set-driven filter.
pub fn group(pairs: &[PredictionPair]) -> Vec<FilterChoice> {
    pairs
        .iter()
        .map(|p| {
            if p.measure_1 > p.measure_2 {
                FilterChoice::RiTds1
            } else {
                FilterChoice::RiTds2
            }
        })
        .collect()
}

/// Sweep direction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RhoAssumption {
    /// riTDS-1 recommended iff `DPR >= rho`.
    Plus,
    /// riTDS-2 recommended iff `DPR >= rho` (mirror).
    Minus,
    /// Union of a `Plus` and a `Minus` fit.
    Combined,
}

/// Half-open interval `[low, high)` on the DPR axis.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DprInterval {
    pub low: f64,
    pub high: f64,
}

impl DprInterval {
    pub fn contains(&self, dpr: f64) -> bool {
        dpr >= self.low && dpr < self.high
    }
}

/// A fitted filter-selection rule.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RhoRule {
    pub assumption: RhoAssumption,
    /// The fitted `rho` (for `Combined`, the Plus-side threshold).
    pub threshold: f64,
    /// Minus-side threshold, present for `Combined` rules.
    pub threshold_minus: Option<f64>,
    /// Recommendation accuracy on the fitting pairs.
    pub accuracy: f64,
    /// DPR regions where riTDS-1 is recommended.
    pub ranges: Vec<DprInterval>,
}

/// Applies a fitted rule to one DPR value.
pub fn recommend(dpr: f64, rule: &RhoRule) -> FilterChoice {
    if rule.ranges.iter().any(|iv| iv.contains(dpr)) {
        FilterChoice::RiTds1
    } else {
        FilterChoice::RiTds2
    }
}

/// Recommendation accuracy of predicted choices against actual groups,
/// i.e. plain classification accuracy with riTDS-1 as the positive class.
fn recommendation_accuracy(groups: &[FilterChoice], predicted: &[FilterChoice]) -> f64 {
    let mut cm = ConfusionMatrix::default();
    for (&actual, &pred) in groups.iter().zip(predicted) {
        match (pred == FilterChoice::RiTds1, actual == FilterChoice::RiTds1) {
            (true, true) => cm.true_pos += 1,
            (true, false) => cm.false_pos += 1,
            (false, false) => cm.true_neg += 1,
            (false, true) => cm.false_neg += 1,
        }
    }
    (cm.true_pos + cm.true_neg) as f64 / cm.total() as f64
}

fn ranges_for(assumption: RhoAssumption, rho: f64) -> Vec<DprInterval> {
    match assumption {
        RhoAssumption::Plus => vec![DprInterval {
            low: rho,
            high: f64::INFINITY,
        }],
        RhoAssumption::Minus => vec![DprInterval {
            low: 0.0,
            high: rho,
        }],
        RhoAssumption::Combined => unreachable!("combined rules are built by combine_rules"),
    }
}

fn next_above(x: f64) -> f64 {
    // Smallest f64 strictly greater than a positive finite x.
    f64::from_bits(x.to_bits() + 1)
}

fn validate_pairs(pairs: &[PredictionPair]) -> Result<(f64, f64)> {
    if pairs.len() < 2 {
        return Err(Error::Parameter(format!(
            "rho sweep needs at least 2 pairs, got {}",
            pairs.len()
        )));
    }
    let mut min = f64::INFINITY;
    let mut max = f64::NEG_INFINITY;
    for p in pairs {
        if !(p.dpr.is_finite() && p.dpr > 0.0) {
            return Err(Error::Parameter(format!(
                "pair {} has invalid DPR {}",
                p.target, p.dpr
            )));
        }
        if !(p.measure_1.is_finite() && p.measure_2.is_finite()) {
            return Err(Error::Parameter(format!(
                "pair {} has non-finite measures",
                p.target
            )));
        }
        min = min.min(p.dpr);
        max = max.max(p.dpr);
    }
    if min == max {
        return Err(Error::Parameter(
            "degenerate DPR spread: all pairs share one DPR value".into(),
        ));
    }
    Ok((min, max))
}

/// Fits the threshold under one sweep direction.
///
/// Candidate thresholds are `min + i * (max - min) / 100` for
/// `i = 0..=100`, plus a sentinel just above `max` so the
/// "always the other filter" rule is attainable. Ties in accuracy resolve
/// to the smallest threshold.
pub fn sweep_rho(pairs: &[PredictionPair], assumption: RhoAssumption) -> Result<RhoRule> {
    if assumption == RhoAssumption::Combined {
        return Err(Error::Parameter(
            "sweep one assumption at a time; use combine_rules for the union".into(),
        ));
    }
    let (min, max) = validate_pairs(pairs)?;
    let groups = group(pairs);

    let step = (max - min) / 100.0;
    let grid = (0..=100)
        .map(|i| min + i as f64 * step)
        .chain(std::iter::once(next_above(max)));

    let mut best: Option<(f64, f64)> = None; // (rho, accuracy)
    for rho in grid {
        let predicted: Vec<FilterChoice> = pairs
            .iter()
            .map(|p| {
                let ge = p.dpr >= rho;
                let pick_1 = match assumption {
                    RhoAssumption::Plus => ge,
                    RhoAssumption::Minus => !ge,
                    RhoAssumption::Combined => unreachable!(),
                };
                if pick_1 {
                    FilterChoice::RiTds1
                } else {
                    FilterChoice::RiTds2
                }
            })
            .collect();
        let acc = recommendation_accuracy(&groups, &predicted);
        if best.is_none_or(|(_, b)| acc > b) {
            best = Some((rho, acc));
        }
    }
    let (threshold, accuracy) = best.expect("grid is nonempty");

    Ok(RhoRule {
        assumption,
        threshold,
        threshold_minus: None,
        accuracy,
        ranges: ranges_for(assumption, threshold),
    })
}

/// Builds the two-sided rule implied by a `Plus` and a `Minus` fit.
///
/// With `rho_minus <= rho_plus` the riTDS-1 region is
/// `[0, rho_minus) U [rho_plus, inf)`; otherwise it is the band
/// `[rho_plus, rho_minus)`.
fn combined_ranges(rho_plus: f64, rho_minus: f64) -> Vec<DprInterval> {
    if rho_minus <= rho_plus {
        vec![
            DprInterval {
                low: 0.0,
                high: rho_minus,
            },
            DprInterval {
                low: rho_plus,
                high: f64::INFINITY,
            },
        ]
    } else {
        vec![DprInterval {
            low: rho_plus,
            high: rho_minus,
        }]
    }
}

/// Fits both sweep directions, forms their combination, and returns
/// whichever of the three rules scores the highest recommendation accuracy
/// on the fitting pairs (combination preferred on ties, then `Plus`).
pub fn fit_rule(pairs: &[PredictionPair]) -> Result<RhoRule> {
    let plus = sweep_rho(pairs, RhoAssumption::Plus)?;
    let minus = sweep_rho(pairs, RhoAssumption::Minus)?;
    let groups = group(pairs);

    let ranges = combined_ranges(plus.threshold, minus.threshold);
    let combined_rule = RhoRule {
        assumption: RhoAssumption::Combined,
        threshold: plus.threshold,
        threshold_minus: Some(minus.threshold),
        accuracy: 0.0,
        ranges,
    };
    let predicted: Vec<FilterChoice> = pairs
        .iter()
        .map(|p| recommend(p.dpr, &combined_rule))
        .collect();
    let combined_accuracy = recommendation_accuracy(&groups, &predicted);
    let combined_rule = RhoRule {
        accuracy: combined_accuracy,
        ..combined_rule
    };

    let mut best = combined_rule;
    for rule in [plus, minus] {
        if rule.accuracy > best.accuracy {
            best = rule;
        }
    }
    Ok(best)
}

/// A rule compared against the single-filter baselines.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RuleEvaluation {
    pub rule_accuracy: f64,
    pub always_ritds1_accuracy: f64,
    pub always_ritds2_accuracy: f64,
    /// Mean measure obtained by following the rule's per-pair choices.
    pub mean_measure_rule: f64,
    pub mean_measure_always_ritds1: f64,
    pub mean_measure_always_ritds2: f64,
    /// Mean of the per-pair best filter: the upper envelope.
    pub mean_measure_oracle: f64,
}

/// Evaluates a fitted rule on a set of pairs.
pub fn evaluate_rule(pairs: &[PredictionPair], rule: &RhoRule) -> Result<RuleEvaluation> {
    if pairs.is_empty() {
        return Err(Error::EmptyInput);
    }
    let groups = group(pairs);
    let n = pairs.len() as f64;

    let predicted: Vec<FilterChoice> = pairs.iter().map(|p| recommend(p.dpr, rule)).collect();
    let all_1 = vec![FilterChoice::RiTds1; pairs.len()];
    let all_2 = vec![FilterChoice::RiTds2; pairs.len()];

    let mean_by = |choice: &dyn Fn(usize) -> f64| -> f64 {
        (0..pairs.len()).map(choice).sum::<f64>() / n
    };

    Ok(RuleEvaluation {
        rule_accuracy: recommendation_accuracy(&groups, &predicted),
        always_ritds1_accuracy: recommendation_accuracy(&groups, &all_1),
        always_ritds2_accuracy: recommendation_accuracy(&groups, &all_2),
        mean_measure_rule: mean_by(&|i| match predicted[i] {
            FilterChoice::RiTds1 => pairs[i].measure_1,
            FilterChoice::RiTds2 => pairs[i].measure_2,
        }),
        mean_measure_always_ritds1: mean_by(&|i| pairs[i].measure_1),
        mean_measure_always_ritds2: mean_by(&|i| pairs[i].measure_2),
        mean_measure_oracle: mean_by(&|i| pairs[i].measure_1.max(pairs[i].measure_2)),
    })
}
