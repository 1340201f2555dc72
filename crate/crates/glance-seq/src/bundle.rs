//! Dataset bundles: a directory with normalized `glances.csv`, `labels.csv`,
//! and a `manifest.txt` carrying content hashes.
//!
//! Bundles are what `ingest` produces and the other subcommands consume.
//! The normalized files are plain instances of the ingest schema, so a
//! bundle is also directly re-ingestable and diffable.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use thiserror::Error;

use crate::dataset::{ingest, Dataset, IngestError, IngestReport};
use crate::io_util::{sha256_hex, write_atomic};

const BUNDLE_TAG: &str = "glance-seq dataset bundle v1";

#[derive(Debug, Error)]
pub enum BundleError {
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Manifest { path: String, message: String },
}

/// Render the normalized glances file: epochs in id order, events in time
/// order.
pub fn glances_csv(dataset: &Dataset) -> String {
    let mut out = String::from("epoch_id,t_ms,region\n");
    for epoch in dataset.iter() {
        for event in epoch.events() {
            let _ = writeln!(out, "{},{},{}", epoch.id(), event.t_ms, event.region.name());
        }
    }
    out
}

/// Render the normalized labels file: epochs in id order, variables in name
/// order.
pub fn labels_csv(dataset: &Dataset) -> String {
    let mut out = String::from("epoch_id,variable,value\n");
    for epoch in dataset.iter() {
        for (variable, value) in epoch.labels() {
            let _ = writeln!(out, "{},{variable},{value}", epoch.id());
        }
    }
    out
}

/// Write a dataset bundle into `dir`.
pub fn write_bundle(dir: &Path, dataset: &Dataset) -> Result<(), BundleError> {
    let io_err = |path: &Path, source| BundleError::Io {
        path: path.display().to_string(),
        source,
    };
    fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    let glances = glances_csv(dataset);
    let labels = labels_csv(dataset);
    let mut manifest = String::new();
    let _ = writeln!(manifest, "{BUNDLE_TAG}");
    let _ = writeln!(manifest, "epochs = {}", dataset.len());
    let _ = writeln!(manifest, "glances_sha256 = {}", sha256_hex(glances.as_bytes()));
    let _ = writeln!(manifest, "labels_sha256 = {}", sha256_hex(labels.as_bytes()));

    for (name, contents) in [
        ("glances.csv", glances.as_str()),
        ("labels.csv", labels.as_str()),
        ("manifest.txt", manifest.as_str()),
    ] {
        let path = dir.join(name);
        write_atomic(&path, contents).map_err(|e| io_err(&path, e))?;
    }
    Ok(())
}

/// Read a dataset directory. `manifest.txt`, when present, must match the
/// file contents; a directory holding only the two CSV files is accepted so
/// externally converted datasets can be pointed at directly.
pub fn read_bundle(dir: &Path) -> Result<(Dataset, IngestReport), BundleError> {
    let glances_path = dir.join("glances.csv");
    let labels_path = dir.join("labels.csv");
    let manifest_path = dir.join("manifest.txt");
    if manifest_path.exists() {
        let manifest_name = manifest_path.display().to_string();
        let manifest = fs::read_to_string(&manifest_path).map_err(|source| BundleError::Io {
            path: manifest_name.clone(),
            source,
        })?;
        let mut lines = manifest.lines();
        if lines.next() != Some(BUNDLE_TAG) {
            return Err(BundleError::Manifest {
                path: manifest_name,
                message: format!("bad tag, expected {BUNDLE_TAG:?}"),
            });
        }
        for (file, key) in [(&glances_path, "glances_sha256"), (&labels_path, "labels_sha256")] {
            let expected = manifest
                .lines()
                .find_map(|l| l.strip_prefix(&format!("{key} = ")))
                .ok_or_else(|| BundleError::Manifest {
                    path: manifest_name.clone(),
                    message: format!("missing field {key}"),
                })?;
            let bytes = fs::read(file).map_err(|source| BundleError::Io {
                path: file.display().to_string(),
                source,
            })?;
            let actual = sha256_hex(&bytes);
            if actual != expected {
                return Err(BundleError::Manifest {
                    path: manifest_name.clone(),
                    message: format!(
                        "{} does not match manifest hash (expected {expected}, found {actual})",
                        file.display()
                    ),
                });
            }
        }
    }
    Ok(ingest(&glances_path, &labels_path)?)
}
