//! On-disk layout of ingested repositories.
//!
//! A repository directory holds one canonical CSV per release plus a
//! `manifest.json` recording the schema and whether each release has
//! already been log-transformed. Directories without a manifest are read
//! as raw, untransformed CSVs.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::dataset::{parse_csv_path, write_csv, MetricSchema, Release, Repository};
use crate::error::{Error, Result};

pub const MANIFEST_FILE: &str = "manifest.json";
const MANIFEST_VERSION: u32 = 1;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ManifestRelease {
    pub project: String,
    pub version: String,
    pub file: String,
    pub log_transformed: bool,
    pub instances: usize,
    pub defects: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RepoManifest {
    pub format_version: u32,
    pub schema: Vec<String>,
    pub releases: Vec<ManifestRelease>,
}

fn release_file_name(release: &Release) -> String {
    let clean = |s: &str| {
        s.chars()
            .map(|c| if c.is_alphanumeric() || c == '.' || c == '_' { c } else { '_' })
            .collect::<String>()
    };
    format!("{}-{}.csv", clean(release.project()), clean(release.version()))
}

/// Writes every release as canonical CSV plus the manifest.
pub fn write_repo(repo: &Repository, dir: impl AsRef<Path>) -> Result<()> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir)?;
    let schema = match repo.releases().first() {
        Some(first) => first.schema().names().to_vec(),
        None => return Err(Error::EmptyInput),
    };

    let mut releases = Vec::with_capacity(repo.len());
    for release in repo.releases() {
        let file = release_file_name(release);
        write_csv(release, dir.join(&file))?;
        releases.push(ManifestRelease {
            project: release.project().to_string(),
            version: release.version().to_string(),
            file,
            log_transformed: release.is_log_transformed(),
            instances: release.len(),
            defects: release.defect_count(),
        });
    }

    let manifest = RepoManifest {
        format_version: MANIFEST_VERSION,
        schema,
        releases,
    };
    std::fs::write(
        dir.join(MANIFEST_FILE),
        serde_json::to_string_pretty(&manifest)?,
    )?;
    Ok(())
}

fn csv_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| p.extension().map(|e| e == "csv").unwrap_or(false))
        .collect();
    files.sort();
    Ok(files)
}

/// Loads a repository directory.
///
/// With a manifest, the recorded schema and transform flags are honored;
/// without one, every `*.csv` in the directory is parsed raw against
/// `default_schema`.
pub fn load_repo(dir: impl AsRef<Path>, default_schema: &MetricSchema) -> Result<Repository> {
    let dir = dir.as_ref();
    let manifest_path = dir.join(MANIFEST_FILE);

    if manifest_path.exists() {
        let manifest: RepoManifest = serde_json::from_str(&std::fs::read_to_string(&manifest_path)?)?;
        if manifest.format_version != MANIFEST_VERSION {
            return Err(Error::Parameter(format!(
                "unsupported repository manifest version {}",
                manifest.format_version
            )));
        }
        let schema = MetricSchema::new(manifest.schema.clone())?;
        let mut releases = Vec::with_capacity(manifest.releases.len());
        for entry in &manifest.releases {
            let mut release = parse_csv_path(dir.join(&entry.file), &schema)?;
            release.set_identity(&entry.project, &entry.version);
            release.set_log_transformed(entry.log_transformed);
            releases.push(release);
        }
        return Repository::new(releases);
    }

    let files = csv_files(dir)?;
    if files.is_empty() {
        return Err(Error::EmptyInput);
    }
    let releases = files
        .iter()
        .map(|f| parse_csv_path(f, default_schema))
        .collect::<Result<Vec<Release>>>()?;
    Repository::new(releases)
}
