//! Binary decision tree grown by greedy information-gain splits.
//!
//! Candidate thresholds are the midpoints between consecutive distinct
//! sorted values of each feature. Recursion stops at pure nodes, when no
//! split leaves both children with at least `MIN_LEAF` instances, or when
//! the best achievable gain is zero. No pruning is applied. Leaf scores
//! are Laplace-smoothed buggy fractions.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::simplify::PoolInstance;

pub const MIN_LEAF: usize = 2;

/// Shannon entropy, in bits, of a discrete distribution given as counts.
pub fn entropy(counts: &[usize]) -> f64 {
    let total: usize = counts.iter().sum();
    if total == 0 {
        return 0.0;
    }
    counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / total as f64;
            -p * p.log2()
        })
        .sum()
}

/// Information gain, in bits, of splitting a parent with class counts
/// `(buggy, clean)` into the two given children.
pub fn information_gain(
    parent: (usize, usize),
    left: (usize, usize),
    right: (usize, usize),
) -> f64 {
    let n = (parent.0 + parent.1) as f64;
    let nl = (left.0 + left.1) as f64;
    let nr = (right.0 + right.1) as f64;
    entropy(&[parent.0, parent.1])
        - nl / n * entropy(&[left.0, left.1])
        - nr / n * entropy(&[right.0, right.1])
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "node", rename_all = "kebab-case")]
pub enum DtNode {
    Split {
        feature: usize,
        threshold: f64,
        left: Box<DtNode>,
        right: Box<DtNode>,
    },
    Leaf {
        buggy: usize,
        total: usize,
        score: f64,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DtParams {
    pub root: DtNode,
}

struct BestSplit {
    feature: usize,
    threshold: f64,
    gain: f64,
}

fn leaf(rows: &[&PoolInstance]) -> DtNode {
    let buggy = rows.iter().filter(|p| p.instance.is_buggy()).count();
    let total = rows.len();
    DtNode::Leaf {
        buggy,
        total,
        score: (buggy + 1) as f64 / (total + 2) as f64,
    }
}

fn best_split(rows: &[&PoolInstance], n_features: usize) -> Option<BestSplit> {
    let buggy_total = rows.iter().filter(|p| p.instance.is_buggy()).count();
    let parent = (buggy_total, rows.len() - buggy_total);
    let mut best: Option<BestSplit> = None;

    let mut column: Vec<(f64, bool)> = Vec::with_capacity(rows.len());
    for feature in 0..n_features {
        column.clear();
        column.extend(
            rows.iter()
                .map(|p| (p.instance.metrics()[feature], p.instance.is_buggy())),
        );
        column.sort_unstable_by(|a, b| a.0.partial_cmp(&b.0).expect("finite metrics"));

        // Walk thresholds left to right, maintaining child class counts.
        let mut left = (0usize, 0usize);
        let mut i = 0;
        while i < column.len() {
            // Consume the tie group so a threshold never splits equal values.
            let value = column[i].0;
            while i < column.len() && column[i].0 == value {
                if column[i].1 {
                    left.0 += 1;
                } else {
                    left.1 += 1;
                }
                i += 1;
            }
            if i == column.len() {
                break;
            }
            let n_left = left.0 + left.1;
            let n_right = rows.len() - n_left;
            if n_left < MIN_LEAF || n_right < MIN_LEAF {
                continue;
            }
            let right = (parent.0 - left.0, parent.1 - left.1);
            let gain = information_gain(parent, left, right);
            let threshold = (value + column[i].0) / 2.0;
            let better = match &best {
                None => gain > 0.0,
                Some(b) => gain > b.gain,
            };
            if better {
                best = Some(BestSplit {
                    feature,
                    threshold,
                    gain,
                });
            }
        }
    }
    best
}

fn grow(rows: &[&PoolInstance], n_features: usize) -> DtNode {
    let buggy = rows.iter().filter(|p| p.instance.is_buggy()).count();
    if buggy == 0 || buggy == rows.len() || rows.len() < 2 * MIN_LEAF {
        return leaf(rows);
    }
    let Some(split) = best_split(rows, n_features) else {
        return leaf(rows);
    };
    let (left_rows, right_rows): (Vec<&PoolInstance>, Vec<&PoolInstance>) = rows
        .iter()
        .partition(|p| p.instance.metrics()[split.feature] <= split.threshold);
    DtNode::Split {
        feature: split.feature,
        threshold: split.threshold,
        left: Box::new(grow(&left_rows, n_features)),
        right: Box::new(grow(&right_rows, n_features)),
    }
}

impl DtParams {
    pub(crate) fn fit(instances: &[PoolInstance]) -> Result<DtParams> {
        if instances.len() < MIN_LEAF {
            return Err(Error::Parameter(format!(
                "decision tree needs at least {MIN_LEAF} training instances, got {}",
                instances.len()
            )));
        }
        let n_features = instances[0].instance.metrics().len();
        let rows: Vec<&PoolInstance> = instances.iter().collect();
        Ok(DtParams {
            root: grow(&rows, n_features),
        })
    }

    /// Buggy probability at the leaf this metric vector falls into.
    pub fn score(&self, metrics: &[f64]) -> f64 {
        let mut node = &self.root;
        loop {
            match node {
                DtNode::Leaf { score, .. } => return *score,
                DtNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    node = if metrics[*feature] <= *threshold {
                        left
                    } else {
                        right
                    };
                }
            }
        }
    }
}
