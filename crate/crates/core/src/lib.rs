//! Training-data selection and defect prediction for cross-project defect
//! prediction (CPDP).
//!
//! The crate ingests PROMISE-style defect data sets, simplifies candidate
//! training data at release and instance granularity (`rTDS`, `iTDS` and
//! the two-step `riTDS` with either a test-set-driven or a
//! training-set-driven filter), trains from-scratch classifiers on the
//! result, scores them with the usual defect-prediction measures, and fits
//! the defect-proneness-ratio rule that picks between the two filters for
//! a given target release.
//!
//! Modules follow the pipeline:
//!
//! * [`dataset`] — parsing, preprocessing, candidate pools, synthesis
//! * [`simplify`] — distributional characteristics, distances, filters
//! * [`classifiers`] — Gaussian Naive Bayes, logistic regression, decision tree
//! * [`metrics`] — confusion measures, AUC, DPR, Wilcoxon signed-rank
//! * [`selector`] — DPR threshold sweeps and filter recommendation
//! * [`experiment`] — leave-one-release-out orchestration and summaries

pub mod classifiers;
pub mod dataset;
mod error;
pub mod experiment;
pub mod metrics;
pub mod reports;
pub mod selector;
pub mod simplify;
pub mod storage;

pub use error::{Error, Result};
