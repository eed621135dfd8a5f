//! Reading and writing releases as PROMISE-style CSV.
//!
//! Input files must carry a header row with every schema metric plus a
//! `bug` column. Column matching is by name, case-insensitive; extra
//! columns (project name, version, class name) are permitted and ignored.

use std::fs::File;
use std::io::Read;
use std::path::Path;

use super::{Instance, MetricSchema, Release};
use crate::error::{Error, Result};

struct ColumnMap {
    metrics: Vec<usize>,
    bug: usize,
    project: Option<usize>,
    version: Option<usize>,
}

fn map_columns(header: &csv::StringRecord, schema: &MetricSchema) -> Result<ColumnMap> {
    let lowered: Vec<String> = header
        .iter()
        .map(|h| h.trim().to_ascii_lowercase())
        .collect();

    let mut metrics = Vec::with_capacity(schema.arity());
    for name in schema.names() {
        let wanted = name.to_ascii_lowercase();
        let hits: Vec<usize> = lowered
            .iter()
            .enumerate()
            .filter(|(_, h)| **h == wanted)
            .map(|(i, _)| i)
            .collect();
        match hits.as_slice() {
            [] => return Err(Error::MissingColumn(name.clone())),
            [i] => metrics.push(*i),
            _ => return Err(Error::DuplicateColumn(name.clone())),
        }
    }

    let bug_hits: Vec<usize> = lowered
        .iter()
        .enumerate()
        .filter(|(_, h)| h.as_str() == "bug" || h.as_str() == "bugs")
        .map(|(i, _)| i)
        .collect();
    let bug = match bug_hits.as_slice() {
        [] => return Err(Error::MissingColumn("bug".into())),
        [i] => *i,
        _ => return Err(Error::DuplicateColumn("bug".into())),
    };

    // PROMISE exports use two `name` columns: project name first, class
    // name second. Only the first is interpreted.
    let project = lowered
        .iter()
        .position(|h| h == "name" || h == "project");
    let version = lowered.iter().position(|h| h == "version");

    Ok(ColumnMap {
        metrics,
        bug,
        project,
        version,
    })
}

fn parse_cell(record: &csv::StringRecord, idx: usize, row: usize, column: &str) -> Result<f64> {
    let raw = record.get(idx).unwrap_or("").trim();
    let value: f64 = raw.parse().map_err(|_| Error::Cell {
        row,
        column: column.to_string(),
        message: format!("expected a number, found `{raw}`"),
    })?;
    if !value.is_finite() {
        return Err(Error::Cell {
            row,
            column: column.to_string(),
            message: format!("non-finite value `{raw}`"),
        });
    }
    Ok(value)
}

/// Parses a PROMISE-style CSV stream into a release.
///
/// The project and version are taken from `name`/`version` columns when
/// present and are empty otherwise (see [`parse_csv_path`]). Row order is
/// preserved; labels are derived from the bug counts.
pub fn parse_csv<R: Read>(source: R, schema: &MetricSchema) -> Result<Release> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(source);

    let header = reader.headers()?.clone();
    let columns = map_columns(&header, schema)?;
    let names = schema.names();

    let mut project = String::new();
    let mut version = String::new();
    let mut instances = Vec::new();

    for (i, record) in reader.records().enumerate() {
        let record = record?;
        let row = i + 1;
        if instances.is_empty() {
            if let Some(p) = columns.project {
                project = record.get(p).unwrap_or("").trim().to_string();
            }
            if let Some(v) = columns.version {
                version = record.get(v).unwrap_or("").trim().to_string();
            }
        }
        let mut metrics = Vec::with_capacity(names.len());
        for (j, &idx) in columns.metrics.iter().enumerate() {
            metrics.push(parse_cell(&record, idx, row, &names[j])?);
        }
        let bug_value = parse_cell(&record, columns.bug, row, "bug")?;
        if bug_value < 0.0 || bug_value.fract() != 0.0 {
            return Err(Error::Cell {
                row,
                column: "bug".into(),
                message: format!("expected a nonnegative integer, found `{bug_value}`"),
            });
        }
        let instance = Instance::new(metrics, bug_value as u32).map_err(|e| Error::Cell {
            row,
            column: "bug".into(),
            message: e.to_string(),
        })?;
        instances.push(instance);
    }

    if instances.is_empty() {
        return Err(Error::EmptyInput);
    }
    Release::new(project, version, schema.clone(), instances)
}

/// Parses a CSV file, falling back to the file stem for the release
/// identity when the file has no `name`/`version` columns.
///
/// A stem like `ant-1.3` splits at the last `-` into project `ant` and
/// version `1.3`.
pub fn parse_csv_path(path: impl AsRef<Path>, schema: &MetricSchema) -> Result<Release> {
    let path = path.as_ref();
    let release = parse_csv(File::open(path)?, schema)?;
    if !release.project().is_empty() {
        return Ok(release);
    }
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().to_string())
        .unwrap_or_default();
    let (project, version) = match stem.rsplit_once('-') {
        Some((p, v)) => (p.to_string(), v.to_string()),
        None => (stem, String::new()),
    };
    let mut renamed = release;
    renamed.id.project = project;
    if renamed.id.version.is_empty() {
        renamed.id.version = version;
    }
    Ok(renamed)
}

/// Serializes a release into canonical CSV: `name,version` first, then the
/// schema metrics in schema order, then `bug`. Parsing the output yields an
/// identical release.
pub fn serialize_csv(release: &Release) -> String {
    let mut writer = csv::WriterBuilder::new().from_writer(Vec::new());
    let mut header: Vec<String> = vec!["name".into(), "version".into()];
    header.extend(release.schema().names().iter().cloned());
    header.push("bug".into());
    writer.write_record(&header).expect("in-memory write");

    for inst in release.instances() {
        let mut fields: Vec<String> = Vec::with_capacity(header.len());
        fields.push(release.project().to_string());
        fields.push(release.version().to_string());
        for v in inst.metrics() {
            fields.push(format!("{v}"));
        }
        fields.push(inst.bug_count().to_string());
        writer.write_record(&fields).expect("in-memory write");
    }
    String::from_utf8(writer.into_inner().expect("in-memory flush")).expect("csv is utf-8")
}

pub fn write_csv(release: &Release, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, serialize_csv(release))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::Label;

    fn schema3() -> MetricSchema {
        MetricSchema::new(vec!["wmc".into(), "dit".into(), "loc".into()]).unwrap()
    }

    #[test]
    fn parses_header_and_one_row() {
        let csv = "name,version,name,wmc,dit,loc,bug\nant,1.3,A.java,3,1,120,3\n";
        let release = parse_csv(csv.as_bytes(), &schema3()).unwrap();
        assert_eq!(release.project(), "ant");
        assert_eq!(release.version(), "1.3");
        assert_eq!(release.len(), 1);
        let inst = &release.instances()[0];
        assert_eq!(inst.metrics(), &[3.0, 1.0, 120.0]);
        assert_eq!(inst.bug_count(), 3);
        assert_eq!(inst.label(), Label::Buggy);
    }

    #[test]
    fn zero_bug_row_is_non_buggy() {
        let csv = "wmc,dit,loc,bug\n1,1,10,0\n";
        let release = parse_csv(csv.as_bytes(), &schema3()).unwrap();
        assert_eq!(release.instances()[0].label(), Label::NonBuggy);
    }

    #[test]
    fn header_matching_is_case_insensitive_and_ignores_extras() {
        let csv = "Project,WMC,DIT,LOC,extra,Bug\np,1,2,3,zzz,1\n";
        let release = parse_csv(csv.as_bytes(), &schema3()).unwrap();
        assert_eq!(release.project(), "p");
        assert_eq!(release.instances()[0].metrics(), &[1.0, 2.0, 3.0]);
    }

    #[test]
    fn missing_metric_column_is_reported_by_name() {
        let csv = "wmc,dit,bug\n1,2,0\n";
        match parse_csv(csv.as_bytes(), &schema3()) {
            Err(Error::MissingColumn(name)) => assert_eq!(name, "loc"),
            other => panic!("expected MissingColumn, got {other:?}"),
        }
    }

    #[test]
    fn missing_bug_column_is_an_error() {
        let csv = "wmc,dit,loc\n1,2,3\n";
        assert!(matches!(
            parse_csv(csv.as_bytes(), &schema3()),
            Err(Error::MissingColumn(c)) if c == "bug"
        ));
    }

    #[test]
    fn non_numeric_cell_reports_row_and_column() {
        let csv = "wmc,dit,loc,bug\n1,2,3,0\n1,x,3,0\n";
        match parse_csv(csv.as_bytes(), &schema3()) {
            Err(Error::Cell { row, column, .. }) => {
                assert_eq!(row, 2);
                assert_eq!(column, "dit");
            }
            other => panic!("expected Cell error, got {other:?}"),
        }
    }

    #[test]
    fn header_without_rows_is_empty_input() {
        let csv = "wmc,dit,loc,bug\n";
        assert!(matches!(
            parse_csv(csv.as_bytes(), &schema3()),
            Err(Error::EmptyInput)
        ));
    }

    #[test]
    fn fractional_bug_count_is_rejected() {
        let csv = "wmc,dit,loc,bug\n1,2,3,0.5\n";
        assert!(matches!(
            parse_csv(csv.as_bytes(), &schema3()),
            Err(Error::Cell { .. })
        ));
    }

    #[test]
    fn integral_float_bug_count_is_accepted() {
        let csv = "wmc,dit,loc,bug\n1,2,3,2.0\n";
        let release = parse_csv(csv.as_bytes(), &schema3()).unwrap();
        assert_eq!(release.instances()[0].bug_count(), 2);
    }

    #[test]
    fn round_trip_is_identity() {
        let csv = "name,version,wmc,dit,loc,bug\np,2.5,0.125,7,1e3,0\np,2.5,3.25,0,42.5,4\n";
        let first = parse_csv(csv.as_bytes(), &schema3()).unwrap();
        let text = serialize_csv(&first);
        let second = parse_csv(text.as_bytes(), &schema3()).unwrap();
        assert_eq!(first, second);
        rounds_again(&second, &schema3());
    }

    fn rounds_again(release: &Release, schema: &MetricSchema) {
        let text = serialize_csv(release);
        let reparsed = parse_csv(text.as_bytes(), schema).unwrap();
        assert_eq!(*release, reparsed);
    }
}
