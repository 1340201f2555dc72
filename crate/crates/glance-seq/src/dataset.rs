//! Baseline-epoch ingestion, binary-problem enumeration, and splits.
//!
//! The ingest schema is two CSV files:
//!
//! - `glances.csv` with header `epoch_id,t_ms,region`, rows sorted by
//!   `(epoch_id, t_ms)`, regions named by the eight canonical snake_case
//!   names;
//! - `labels.csv` with header `epoch_id,variable,value`, one row per label,
//!   validated against the [`crate::schema`] vocabulary.
//!
//! Structural problems (bad header, malformed row, unknown region or label,
//! duplicate epoch) abort ingestion with an error naming file and line.
//! Epochs that parse but violate the event-encoding invariants are rejected
//! individually and reported with exactly one reason each.

use std::collections::btree_map::Entry;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use thiserror::Error;

use glance_seq_core::epoch::{Epoch, GlanceEvent, MalformedEpoch, SampledSequence};
use glance_seq_core::{resample_epoch, GlanceRegion};

use crate::schema;

/// A validated, immutable epoch collection.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Dataset {
    epochs: BTreeMap<String, Epoch>,
}

impl Dataset {
    pub fn from_epochs(epochs: impl IntoIterator<Item = Epoch>) -> Self {
        Self {
            epochs: epochs
                .into_iter()
                .map(|e| (e.id().to_owned(), e))
                .collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.epochs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.epochs.is_empty()
    }

    pub fn get(&self, epoch_id: &str) -> Option<&Epoch> {
        self.epochs.get(epoch_id)
    }

    /// Epochs in id order.
    pub fn iter(&self) -> impl Iterator<Item = &Epoch> {
        self.epochs.values()
    }

    /// Resample every epoch once; keyed by epoch id.
    pub fn resample_all(&self) -> BTreeMap<String, SampledSequence> {
        self.epochs
            .iter()
            .map(|(id, e)| (id.clone(), resample_epoch(e)))
            .collect()
    }
}

/// What happened during ingestion: accepted count plus one reason per
/// rejected epoch.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct IngestReport {
    pub accepted: usize,
    pub rejected: Vec<(String, MalformedEpoch)>,
}

impl IngestReport {
    pub fn total(&self) -> usize {
        self.accepted + self.rejected.len()
    }

    pub fn reason_counts(&self) -> BTreeMap<&'static str, usize> {
        let mut counts = BTreeMap::new();
        for (_, reason) in &self.rejected {
            *counts.entry(reason.code()).or_insert(0) += 1;
        }
        counts
    }

    /// Line-oriented report: a summary header, one `REJECT <id> <reason>`
    /// line per rejected epoch, and per-reason totals.
    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "accepted {} of {} epochs ({} rejected)",
            self.accepted,
            self.total(),
            self.rejected.len()
        );
        for (id, reason) in &self.rejected {
            let _ = writeln!(out, "REJECT {id} {}", reason.code());
        }
        for (code, count) in self.reason_counts() {
            let _ = writeln!(out, "reason {code}: {count}");
        }
        out
    }
}

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{file}:{line}: {message}")]
    Parse {
        file: String,
        line: usize,
        message: String,
    },
    #[error("{file}:{line}: duplicate epoch {epoch_id}")]
    DuplicateEpoch {
        file: String,
        line: usize,
        epoch_id: String,
    },
}

fn parse_err(file: &str, line: usize, message: impl Into<String>) -> IngestError {
    IngestError::Parse {
        file: file.to_owned(),
        line,
        message: message.into(),
    }
}

/// Ingest the two-file CSV schema from disk.
pub fn ingest(
    glances_path: &Path,
    labels_path: &Path,
) -> Result<(Dataset, IngestReport), IngestError> {
    let open = |path: &Path| -> Result<BufReader<File>, IngestError> {
        File::open(path).map(BufReader::new).map_err(|source| IngestError::Io {
            path: path.display().to_string(),
            source,
        })
    };
    ingest_readers(
        open(glances_path)?,
        &glances_path.display().to_string(),
        open(labels_path)?,
        &labels_path.display().to_string(),
    )
}

/// Ingest from arbitrary readers; `glances_name`/`labels_name` appear in
/// error messages.
pub fn ingest_readers(
    glances: impl BufRead,
    glances_name: &str,
    labels: impl BufRead,
    labels_name: &str,
) -> Result<(Dataset, IngestReport), IngestError> {
    let groups = parse_glances(glances, glances_name)?;
    let known_ids: BTreeSet<&str> = groups.iter().map(|(id, _)| id.as_str()).collect();
    let mut labels_by_id = parse_labels(labels, labels_name, &known_ids)?;

    let mut epochs = Vec::new();
    let mut report = IngestReport::default();
    for (id, events) in groups {
        let labels = labels_by_id.remove(id.as_str()).unwrap_or_default();
        match Epoch::new(&id, events, labels) {
            Ok(epoch) => {
                report.accepted += 1;
                epochs.push(epoch);
            }
            Err(reason) => report.rejected.push((id, reason)),
        }
    }
    Ok((Dataset::from_epochs(epochs), report))
}

fn parse_glances(
    reader: impl BufRead,
    file: &str,
) -> Result<Vec<(String, Vec<GlanceEvent>)>, IngestError> {
    let mut lines = reader.lines().enumerate();
    let header = match lines.next() {
        Some((_, Ok(line))) => line,
        Some((_, Err(source))) => {
            return Err(IngestError::Io { path: file.to_owned(), source })
        }
        None => return Err(parse_err(file, 1, "missing header `epoch_id,t_ms,region`")),
    };
    if header.trim_end_matches('\r') != "epoch_id,t_ms,region" {
        return Err(parse_err(
            file,
            1,
            format!("bad header {header:?}, expected `epoch_id,t_ms,region`"),
        ));
    }

    let mut groups: Vec<(String, Vec<GlanceEvent>)> = Vec::new();
    let mut finished: BTreeSet<String> = BTreeSet::new();
    for (idx, line) in lines {
        let line_no = idx + 1;
        let line = line.map_err(|source| IngestError::Io { path: file.to_owned(), source })?;
        let line = line.trim_end_matches('\r');
        if line.is_empty() {
            continue;
        }
        let mut fields = line.split(',');
        let (Some(id), Some(t_ms), Some(region), None) =
            (fields.next(), fields.next(), fields.next(), fields.next())
        else {
            return Err(parse_err(file, line_no, format!("expected 3 fields, got {line:?}")));
        };
        if id.is_empty() {
            return Err(parse_err(file, line_no, "empty epoch_id"));
        }
        let t_ms: u64 = t_ms
            .parse()
            .map_err(|_| parse_err(file, line_no, format!("bad t_ms {t_ms:?}")))?;
        let region = GlanceRegion::from_name(region)
            .ok_or_else(|| parse_err(file, line_no, format!("unknown region {region:?}")))?;

        match groups.last_mut() {
            Some((current, events)) if current == id => {
                events.push(GlanceEvent::new(region, t_ms));
            }
            _ => {
                if finished.contains(id) {
                    return Err(IngestError::DuplicateEpoch {
                        file: file.to_owned(),
                        line: line_no,
                        epoch_id: id.to_owned(),
                    });
                }
                if let Some((prev, _)) = groups.last() {
                    finished.insert(prev.clone());
                }
                groups.push((id.to_owned(), vec![GlanceEvent::new(region, t_ms)]));
            }
        }
    }
    Ok(groups)
}

type LabelMap = BTreeMap<String, BTreeMap<String, String>>;

fn parse_labels(
    reader: impl BufRead,
    file: &str,
    known_ids: &BTreeSet<&str>,
) -> Result<LabelMap, IngestError> {
    let mut lines = reader.lines().enumerate();
    let header = match lines.next() {
        Some((_, Ok(line))) => line,
        Some((_, Err(source))) => {
            return Err(IngestError::Io { path: file.to_owned(), source })
        }
        None => return Err(parse_err(file, 1, "missing header `epoch_id,variable,value`")),
    };
    if header.trim_end_matches('\r') != "epoch_id,variable,value" {
        return Err(parse_err(
            file,
            1,
            format!("bad header {header:?}, expected `epoch_id,variable,value`"),
        ));
    }

    let mut labels: LabelMap = BTreeMap::new();
    for (idx, line) in lines {
        let line_no = idx + 1;
        let line = line.map_err(|source| IngestError::Io { path: file.to_owned(), source })?;
        let line = line.trim_end_matches('\r');
        if line.is_empty() {
            continue;
        }
        let mut fields = line.split(',');
        let (Some(id), Some(variable), Some(value), None) =
            (fields.next(), fields.next(), fields.next(), fields.next())
        else {
            return Err(parse_err(file, line_no, format!("expected 3 fields, got {line:?}")));
        };
        if !known_ids.contains(id) {
            return Err(parse_err(file, line_no, format!("label for unknown epoch {id:?}")));
        }
        if schema::variable(variable).is_none() {
            return Err(parse_err(file, line_no, format!("unknown variable {variable:?}")));
        }
        if !schema::is_valid_label(variable, value) {
            return Err(parse_err(
                file,
                line_no,
                format!("unknown value {value:?} for variable {variable:?}"),
            ));
        }
        match labels.entry(id.to_owned()).or_default().entry(variable.to_owned()) {
            Entry::Vacant(slot) => {
                slot.insert(value.to_owned());
            }
            Entry::Occupied(_) => {
                return Err(parse_err(
                    file,
                    line_no,
                    format!("duplicate label {variable:?} for epoch {id:?}"),
                ));
            }
        }
    }
    Ok(labels)
}

/// A pair of label values with their disjoint epoch-id sets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryProblem {
    pub name: String,
    pub variable: String,
    pub value_1: String,
    pub value_2: String,
    pub epochs_1: Vec<String>,
    pub epochs_2: Vec<String>,
}

impl BinaryProblem {
    pub fn class_sizes(&self) -> (usize, usize) {
        (self.epochs_1.len(), self.epochs_2.len())
    }
}

/// Default minimum epochs per class for a problem to be considered.
pub const DEFAULT_MIN_EPOCHS: usize = 100;

/// Enumerate value pairs per variable, in schema order, dropping any pair
/// where either side has fewer than `min_epochs` labeled epochs.
///
/// `behavior` and `distraction` pair only against their baseline value; all
/// other variables pair every value combination. The problem name is
/// `"variable (value_1 vs value_2)"`.
pub fn enumerate_problems(dataset: &Dataset, min_epochs: usize) -> Vec<BinaryProblem> {
    // ids per (variable, value), epochs in id order
    let mut members: BTreeMap<(&str, &str), Vec<String>> = BTreeMap::new();
    for epoch in dataset.iter() {
        for (variable, value) in epoch.labels() {
            if let Some(spec) = schema::variable(variable) {
                if let Some(&value) = spec.values.iter().find(|&&v| v == value) {
                    members
                        .entry((spec.name, value))
                        .or_default()
                        .push(epoch.id().to_owned());
                }
            }
        }
    }

    let mut problems = Vec::new();
    for spec in schema::VARIABLES {
        let pairs: Vec<(&str, &str)> = if spec.baseline_only {
            spec.values[1..].iter().map(|&v| (spec.values[0], v)).collect()
        } else {
            let mut pairs = Vec::new();
            for (i, &a) in spec.values.iter().enumerate() {
                for &b in &spec.values[i + 1..] {
                    pairs.push((a, b));
                }
            }
            pairs
        };
        for (value_1, value_2) in pairs {
            let epochs_1 = members.get(&(spec.name, value_1)).cloned().unwrap_or_default();
            let epochs_2 = members.get(&(spec.name, value_2)).cloned().unwrap_or_default();
            if epochs_1.len() >= min_epochs && epochs_2.len() >= min_epochs {
                problems.push(BinaryProblem {
                    name: format!("{} ({value_1} vs {value_2})", spec.name),
                    variable: spec.name.to_owned(),
                    value_1: value_1.to_owned(),
                    value_2: value_2.to_owned(),
                    epochs_1,
                    epochs_2,
                });
            }
        }
    }
    problems
}

/// Per-class stratified split of a problem's epoch ids.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitSets {
    pub train_1: Vec<String>,
    pub train_2: Vec<String>,
    pub test_1: Vec<String>,
    pub test_2: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("split leaves an empty part (class sizes {n1}/{n2} at train fraction {train_percent}%)")]
pub struct DegenerateSplit {
    pub n1: usize,
    pub n2: usize,
    pub train_percent: u32,
}

/// Shuffle each class with the seeded generator and take
/// `round_half_up(train_fraction · n)` ids for training. Deterministic given
/// `seed`; errors if any of the four parts would be empty.
pub fn split(
    problem: &BinaryProblem,
    train_fraction: f64,
    seed: u64,
) -> Result<SplitSets, DegenerateSplit> {
    assert!(
        train_fraction > 0.0 && train_fraction < 1.0,
        "train_fraction must be in (0, 1)"
    );
    let degenerate = || DegenerateSplit {
        n1: problem.epochs_1.len(),
        n2: problem.epochs_2.len(),
        train_percent: (train_fraction * 100.0).round() as u32,
    };
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut split_class = |ids: &[String]| -> Result<(Vec<String>, Vec<String>), DegenerateSplit> {
        let mut shuffled = ids.to_vec();
        shuffled.shuffle(&mut rng);
        let train_len = round_half_up(train_fraction * shuffled.len() as f64);
        if train_len == 0 || train_len >= shuffled.len() {
            return Err(degenerate());
        }
        let test = shuffled.split_off(train_len);
        Ok((shuffled, test))
    };
    let (train_1, test_1) = split_class(&problem.epochs_1)?;
    let (train_2, test_2) = split_class(&problem.epochs_2)?;
    Ok(SplitSets { train_1, train_2, test_1, test_2 })
}

fn round_half_up(x: f64) -> usize {
    (x + 0.5) as usize
}
