//! CSV export for transition matrices and their differences.
//!
//! One header line with the eight region names, then eight rows in region
//! code order. Probability (and difference) cells carry six fractional
//! digits; the parallel `.counts.csv` carries integer tallies.

use std::io;
use std::path::Path;

use glance_seq_core::{DiffMatrix, GlanceRegion, TransitionMatrix};

use crate::io_util::write_atomic;

fn header() -> String {
    let names: Vec<&str> = GlanceRegion::ALL.iter().map(|r| r.name()).collect();
    names.join(",")
}

pub fn probability_csv(probs: &[[f64; 8]; 8]) -> String {
    let mut out = header();
    out.push('\n');
    for row in probs {
        let cells: Vec<String> = row.iter().map(|p| format!("{p:.6}")).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

pub fn counts_csv(counts: &[[u64; 8]; 8]) -> String {
    let mut out = header();
    out.push('\n');
    for row in counts {
        let cells: Vec<String> = row.iter().map(|c| c.to_string()).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

/// Write `<stem>.csv` (probabilities) and `<stem>.counts.csv` (tallies).
pub fn write_transition_matrix(stem: &Path, matrix: &TransitionMatrix) -> io::Result<()> {
    write_atomic(&stem.with_extension("csv"), &probability_csv(matrix.probs()))?;
    write_atomic(&stem.with_extension("counts.csv"), &counts_csv(matrix.counts()))
}

/// Write a difference matrix as `<stem>.csv`; differences carry no counts.
pub fn write_diff_matrix(stem: &Path, diff: &DiffMatrix) -> io::Result<()> {
    write_atomic(&stem.with_extension("csv"), &probability_csv(diff.delta()))
}

/// Parse a probability/difference CSV produced by this module.
pub fn parse_matrix_csv(text: &str) -> Result<[[f64; 8]; 8], String> {
    let mut lines = text.lines();
    let head = lines.next().ok_or("empty matrix file")?;
    if head != header() {
        return Err(format!("bad matrix header {head:?}"));
    }
    let mut out = [[0.0; 8]; 8];
    for (i, row) in out.iter_mut().enumerate() {
        let line = lines.next().ok_or_else(|| format!("missing row {i}"))?;
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != 8 {
            return Err(format!("row {i} has {} cells", cells.len()));
        }
        for (j, cell) in cells.iter().enumerate() {
            row[j] = cell.parse().map_err(|_| format!("bad cell {cell:?} at ({i},{j})"))?;
        }
    }
    if lines.next().is_some() {
        return Err("trailing data after 8 rows".into());
    }
    Ok(out)
}
