//! Report emission: JSON-lines records, CSV summaries and the fitted DPR
//! rules.
//!
//! Every writer is deterministic for identical records; wall-clock timings
//! are kept out of these files and go to a separate timings CSV.

use std::io::Write;
use std::path::Path;

use crate::error::Result;
use crate::experiment::{EvaluationRecord, RhoRuleReport, SummaryRow, WilcoxonRow};

fn fmt_opt(value: Option<f64>) -> String {
    value.map(|v| format!("{v:.6}")).unwrap_or_default()
}

/// One record per line, schema version `records.v1`.
pub fn write_records_jsonl(records: &[EvaluationRecord], path: impl AsRef<Path>) -> Result<()> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    for record in records {
        serde_json::to_writer(&mut out, record)?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_records_jsonl(path: impl AsRef<Path>) -> Result<Vec<EvaluationRecord>> {
    let text = std::fs::read_to_string(path)?;
    text.lines()
        .filter(|line| !line.trim().is_empty())
        .map(|line| Ok(serde_json::from_str(line)?))
        .collect()
}

pub fn write_summary_csv(rows: &[SummaryRow], path: impl AsRef<Path>) -> Result<()> {
    let mut writer = csv::Writer::from_path(path)?;
    writer.write_record([
        "strategy",
        "classifier",
        "r",
        "cells",
        "failed_cells",
        "mean_tds_size",
        "mean_precision",
        "mean_pd",
        "mean_pf",
        "mean_f_measure",
        "mean_g_measure",
        "mean_accuracy",
        "mean_auc",
        "undefined_precision",
        "undefined_f_measure",
        "undefined_g_measure",
        "undefined_auc",
    ])?;
    for row in rows {
        writer.write_record([
            row.strategy.to_string(),
            row.classifier.to_string(),
            row.r.to_string(),
            row.cells.to_string(),
            row.failed_cells.to_string(),
            format!("{:.2}", row.mean_tds_size),
            fmt_opt(row.mean_precision),
            fmt_opt(row.mean_pd),
            fmt_opt(row.mean_pf),
            fmt_opt(row.mean_f_measure),
            fmt_opt(row.mean_g_measure),
            fmt_opt(row.mean_accuracy),
            fmt_opt(row.mean_auc),
            row.undefined_precision.to_string(),
            row.undefined_f_measure.to_string(),
            row.undefined_g_measure.to_string(),
            row.undefined_auc.to_string(),
        ])?;
    }
    writer.flush()?;
    Ok(())
}

pub fn write_wilcoxon_csv(rows: &[WilcoxonRow], path: impl AsRef<Path>) -> Result<()> {
    let mut writer = csv::Writer::from_path(path)?;
    writer.write_record([
        "comparison",
        "classifier",
        "r",
        "measure",
        "n",
        "ratio_of_means",
        "statistic",
        "p_value",
        "note",
    ])?;
    for row in rows {
        writer.write_record([
            row.comparison.clone(),
            row.classifier.to_string(),
            row.r.to_string(),
            row.measure.clone(),
            row.n.to_string(),
            fmt_opt(row.ratio_of_means),
            fmt_opt(row.statistic),
            fmt_opt(row.p_value),
            row.note.clone().unwrap_or_default(),
        ])?;
    }
    writer.flush()?;
    Ok(())
}

#[derive(serde::Serialize)]
struct RhoRulesDocument<'a> {
    format_version: u32,
    rules: &'a [RhoRuleReport],
}

pub fn write_rho_rules_json(reports: &[RhoRuleReport], path: impl AsRef<Path>) -> Result<()> {
    let doc = RhoRulesDocument {
        format_version: 1,
        rules: reports,
    };
    std::fs::write(path, serde_json::to_string_pretty(&doc)?)?;
    Ok(())
}

/// Per-cell wall-clock timings. Not part of the deterministic outputs.
pub fn write_timings_csv(records: &[EvaluationRecord], path: impl AsRef<Path>) -> Result<()> {
    let mut writer = csv::Writer::from_path(path)?;
    writer.write_record(["target", "strategy", "classifier", "r", "runtime_secs"])?;
    for record in records {
        writer.write_record([
            record.target.to_string(),
            record.strategy.to_string(),
            record.classifier.to_string(),
            record.r.to_string(),
            format!("{:.6}", record.runtime_secs),
        ])?;
    }
    writer.flush()?;
    Ok(())
}
