//! Repeated-split evaluation, matrix exports, and synthetic-data oracles.
//!
//! For each repeat `r` the harness splits a problem with seed
//! `master_seed + r`, SMOTE-balances the training halves (seed `+ 1`),
//! trains both models (seed `+ 2`), and scores the held-out epochs of both
//! classes. Raw accuracy (correct / total) and balanced accuracy (mean
//! per-class recall) are always both recorded because they diverge sharply
//! on imbalanced test sets; the headline column is configurable. Repeats and
//! problems are independently seeded, so the harness parallelizes them
//! freely without affecting results.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io;
use std::path::Path;

use rayon::prelude::*;
use thiserror::Error;

use glance_seq_core::epoch::SEQUENCE_LEN;
use glance_seq_core::{
    classify, matrix_difference, sample_sequence, train_binary, transition_matrix,
    ClassifierError, DiscreteHmm, SampledSequence, SmoteConfig, TrainConfig,
};

use crate::dataset::{split, BinaryProblem, Dataset, DegenerateSplit};
use crate::matrix_io::{write_diff_matrix, write_transition_matrix};

/// Which accuracy fills the headline `accuracy_mean`/`accuracy_std` columns.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MetricKind {
    #[default]
    Balanced,
    Raw,
    /// Report both; the headline stays balanced.
    Both,
}

impl MetricKind {
    pub fn parse(text: &str) -> Option<Self> {
        match text {
            "balanced" => Some(Self::Balanced),
            "raw" => Some(Self::Raw),
            "both" => Some(Self::Both),
            _ => None,
        }
    }

    /// Name of the headline metric.
    pub fn headline(self) -> &'static str {
        match self {
            MetricKind::Raw => "raw",
            MetricKind::Balanced | MetricKind::Both => "balanced",
        }
    }
}

/// Harness settings. `n_repeats` must be at least 2 (the standard deviation
/// is undefined otherwise).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExperimentConfig {
    pub n_repeats: usize,
    pub train_fraction: f64,
    pub train_config: TrainConfig,
    pub smote_config: SmoteConfig,
    pub metric: MetricKind,
    pub master_seed: u64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            n_repeats: 10,
            train_fraction: 0.8,
            train_config: TrainConfig::default(),
            smote_config: SmoteConfig::default(),
            metric: MetricKind::default(),
            master_seed: 0,
        }
    }
}

/// One repeat's outcome. `confusion[i][j]` counts true class `i+1` epochs
/// predicted as class `j+1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RepeatOutcome {
    pub seed: u64,
    pub raw_accuracy: f64,
    pub balanced_accuracy: f64,
    pub confusion: [[usize; 2]; 2],
}

/// Aggregated result for one problem.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemResult {
    pub problem_name: String,
    pub variable: String,
    pub value_1: String,
    pub value_2: String,
    pub n1: usize,
    pub n2: usize,
    /// Headline metric aggregates, per `metric`.
    pub accuracy_mean: f64,
    pub accuracy_std: f64,
    pub raw_mean: f64,
    pub raw_std: f64,
    pub balanced_mean: f64,
    pub balanced_std: f64,
    pub metric: MetricKind,
    pub per_repeat: Vec<RepeatOutcome>,
}

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("n_repeats must be at least 2 to report a standard deviation")]
    TooFewRepeats,
    #[error(transparent)]
    Split(#[from] DegenerateSplit),
    #[error(transparent)]
    Classifier(#[from] ClassifierError),
    #[error("problem references unknown epoch {0}")]
    UnknownEpoch(String),
    #[error("writing matrices: {0}")]
    Io(#[from] io::Error),
}

/// Sample mean and standard deviation (n − 1 divisor).
pub fn mean_and_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

fn sequences_for(
    ids: &[String],
    seqs: &BTreeMap<String, SampledSequence>,
) -> Result<Vec<SampledSequence>, ExperimentError> {
    ids.iter()
        .map(|id| {
            seqs.get(id)
                .copied()
                .ok_or_else(|| ExperimentError::UnknownEpoch(id.clone()))
        })
        .collect()
}

/// Run the full repeated-split protocol for one problem.
pub fn run_problem(
    problem: &BinaryProblem,
    dataset: &Dataset,
    cfg: &ExperimentConfig,
) -> Result<ProblemResult, ExperimentError> {
    let seqs = dataset.resample_all();
    run_problem_with_sequences(problem, &seqs, cfg)
}

/// As [`run_problem`], with resampled sequences supplied by the caller so a
/// batch run resamples the dataset once.
pub fn run_problem_with_sequences(
    problem: &BinaryProblem,
    seqs: &BTreeMap<String, SampledSequence>,
    cfg: &ExperimentConfig,
) -> Result<ProblemResult, ExperimentError> {
    if cfg.n_repeats < 2 {
        return Err(ExperimentError::TooFewRepeats);
    }
    let per_repeat: Vec<RepeatOutcome> = (0..cfg.n_repeats)
        .into_par_iter()
        .map(|r| run_repeat(problem, seqs, cfg, cfg.master_seed.wrapping_add(r as u64)))
        .collect::<Result<_, _>>()?;

    let raw: Vec<f64> = per_repeat.iter().map(|o| o.raw_accuracy).collect();
    let balanced: Vec<f64> = per_repeat.iter().map(|o| o.balanced_accuracy).collect();
    let (raw_mean, raw_std) = mean_and_std(&raw);
    let (balanced_mean, balanced_std) = mean_and_std(&balanced);
    let (accuracy_mean, accuracy_std) = match cfg.metric.headline() {
        "raw" => (raw_mean, raw_std),
        _ => (balanced_mean, balanced_std),
    };
    Ok(ProblemResult {
        problem_name: problem.name.clone(),
        variable: problem.variable.clone(),
        value_1: problem.value_1.clone(),
        value_2: problem.value_2.clone(),
        n1: problem.epochs_1.len(),
        n2: problem.epochs_2.len(),
        accuracy_mean,
        accuracy_std,
        raw_mean,
        raw_std,
        balanced_mean,
        balanced_std,
        metric: cfg.metric,
        per_repeat,
    })
}

fn run_repeat(
    problem: &BinaryProblem,
    seqs: &BTreeMap<String, SampledSequence>,
    cfg: &ExperimentConfig,
    seed: u64,
) -> Result<RepeatOutcome, ExperimentError> {
    let sets = split(problem, cfg.train_fraction, seed)?;
    let train_1 = sequences_for(&sets.train_1, seqs)?;
    let train_2 = sequences_for(&sets.train_2, seqs)?;
    let test_1 = sequences_for(&sets.test_1, seqs)?;
    let test_2 = sequences_for(&sets.test_2, seqs)?;

    let smote_cfg = SmoteConfig {
        seed: seed.wrapping_add(1),
        ..cfg.smote_config
    };
    let train_cfg = TrainConfig {
        seed: seed.wrapping_add(2),
        ..cfg.train_config
    };
    let clf = train_binary(
        &problem.name,
        (&problem.value_1, &problem.value_2),
        &train_1,
        &train_2,
        &train_cfg,
        &smote_cfg,
    )?;

    let mut confusion = [[0usize; 2]; 2];
    for (true_idx, test) in [(0, &test_1), (1, &test_2)] {
        for seq in test {
            let predicted = classify(&clf, seq).chosen_class.index();
            confusion[true_idx][predicted] += 1;
        }
    }
    let total = (test_1.len() + test_2.len()) as f64;
    let raw_accuracy = (confusion[0][0] + confusion[1][1]) as f64 / total;
    let recall_1 = confusion[0][0] as f64 / test_1.len() as f64;
    let recall_2 = confusion[1][1] as f64 / test_2.len() as f64;
    Ok(RepeatOutcome {
        seed,
        raw_accuracy,
        balanced_accuracy: (recall_1 + recall_2) / 2.0,
        confusion,
    })
}

/// Batch outcome: successful problem results sorted ascending by headline
/// accuracy mean, plus any per-problem failures (which do not abort the
/// run).
#[derive(Debug, Clone, Default)]
pub struct RunSummary {
    pub results: Vec<ProblemResult>,
    pub failures: Vec<(String, String)>,
}

/// Run every problem in `problems`.
pub fn run_all(
    problems: &[BinaryProblem],
    dataset: &Dataset,
    cfg: &ExperimentConfig,
) -> RunSummary {
    let seqs = dataset.resample_all();
    let outcomes: Vec<(String, Result<ProblemResult, ExperimentError>)> = problems
        .par_iter()
        .map(|p| (p.name.clone(), run_problem_with_sequences(p, &seqs, cfg)))
        .collect();

    let mut summary = RunSummary::default();
    for (name, outcome) in outcomes {
        match outcome {
            Ok(result) => summary.results.push(result),
            Err(err) => summary.failures.push((name, err.to_string())),
        }
    }
    summary.results.sort_by(|a, b| {
        a.accuracy_mean
            .total_cmp(&b.accuracy_mean)
            .then_with(|| a.problem_name.cmp(&b.problem_name))
    });
    summary
}

/// Export the class transition matrices and their difference for a problem:
/// `<stem>_class1.csv` (+ `.counts.csv`), `<stem>_class2.csv`
/// (+ `.counts.csv`), `<stem>_diff.csv`.
pub fn export_problem_matrices(
    problem: &BinaryProblem,
    dataset: &Dataset,
    out_dir: &Path,
    stem: &str,
) -> Result<(), ExperimentError> {
    let seqs = dataset.resample_all();
    let class_1 = sequences_for(&problem.epochs_1, &seqs)?;
    let class_2 = sequences_for(&problem.epochs_2, &seqs)?;
    let m1 = transition_matrix(&class_1)
        .map_err(|_| ExperimentError::Classifier(ClassifierError::EmptyClass))?;
    let m2 = transition_matrix(&class_2)
        .map_err(|_| ExperimentError::Classifier(ClassifierError::EmptyClass))?;
    let diff = matrix_difference(&m1, &m2);
    write_transition_matrix(&out_dir.join(format!("{stem}_class1")), &m1)?;
    write_transition_matrix(&out_dir.join(format!("{stem}_class2")), &m2)?;
    write_diff_matrix(&out_dir.join(format!("{stem}_diff")), &diff)?;
    Ok(())
}

/// A planted pair of generators for synthetic experiments.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSpec {
    pub model_1: DiscreteHmm,
    pub model_2: DiscreteHmm,
    pub n_per_class: usize,
    pub seed: u64,
}

/// Draw `n_per_class` 25-sample sequences from each model. Sequence `i` of
/// class `c` uses seed `spec.seed + c·n_per_class + i`, so the dataset is
/// reproducible element by element.
pub fn generate_synthetic(spec: &SyntheticSpec) -> (Vec<SampledSequence>, Vec<SampledSequence>) {
    let draw = |model: &DiscreteHmm, class_idx: u64| -> Vec<SampledSequence> {
        (0..spec.n_per_class)
            .map(|i| {
                let seed = spec
                    .seed
                    .wrapping_add(class_idx * spec.n_per_class as u64)
                    .wrapping_add(i as u64);
                SampledSequence::new(&sample_sequence(model, SEQUENCE_LEN, seed))
                    .expect("sampled length 25")
            })
            .collect()
    };
    (draw(&spec.model_1, 0), draw(&spec.model_2, 1))
}

/// Monte-Carlo estimate of the accuracy of the oracle that knows both
/// generating models: sample `n_samples` sequences from each, classify by
/// true-model log-likelihood (ties to class 1), return the mean accuracy.
/// In expectation this upper-bounds any trained classifier on the same pair.
pub fn bayes_accuracy_estimate(
    model_1: &DiscreteHmm,
    model_2: &DiscreteHmm,
    n_samples: usize,
    seed: u64,
) -> f64 {
    bayes_accuracy_estimate_with_len(model_1, model_2, SEQUENCE_LEN, n_samples, seed)
}

/// As [`bayes_accuracy_estimate`] with an explicit sequence length, so tests
/// can cross-check short lengths exhaustively.
pub fn bayes_accuracy_estimate_with_len(
    model_1: &DiscreteHmm,
    model_2: &DiscreteHmm,
    len: usize,
    n_samples: usize,
    seed: u64,
) -> f64 {
    use glance_seq_core::forward_log_likelihood;
    let mut correct = 0usize;
    for class_idx in 0..2u64 {
        let model = if class_idx == 0 { model_1 } else { model_2 };
        for i in 0..n_samples {
            let draw_seed = seed
                .wrapping_add(class_idx * n_samples as u64)
                .wrapping_add(i as u64);
            let obs = sample_sequence(model, len, draw_seed);
            let l1 = forward_log_likelihood(model_1, &obs);
            let l2 = forward_log_likelihood(model_2, &obs);
            let chosen = if l1 >= l2 { 0 } else { 1 };
            if chosen == class_idx as usize {
                correct += 1;
            }
        }
    }
    correct as f64 / (2 * n_samples) as f64
}

/// Render the results CSV.
pub fn results_csv(results: &[ProblemResult], n_repeats: usize) -> String {
    let mut out = String::from(
        "problem,variable,class1,class2,n1,n2,raw_mean,raw_std,balanced_mean,balanced_std,n_repeats,headline_metric\n",
    );
    for r in results {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{:.6},{:.6},{:.6},{:.6},{},{}",
            r.problem_name,
            r.variable,
            r.value_1,
            r.value_2,
            r.n1,
            r.n2,
            r.raw_mean,
            r.raw_std,
            r.balanced_mean,
            r.balanced_std,
            n_repeats,
            r.metric.headline(),
        );
    }
    out
}

/// Render the aligned human-readable table (problems as given, typically
/// already sorted ascending by accuracy).
pub fn results_table(results: &[ProblemResult]) -> String {
    let headers = [
        "Binary Classification Problem",
        "Accuracy (Avg)",
        "Accuracy (Std)",
        "Class 1 Size",
        "Class 2 Size",
    ];
    let rows: Vec<[String; 5]> = results
        .iter()
        .map(|r| {
            [
                r.problem_name.clone(),
                format!("{:.1}%", r.accuracy_mean * 100.0),
                format!("{:.1}%", r.accuracy_std * 100.0),
                r.n1.to_string(),
                r.n2.to_string(),
            ]
        })
        .collect();
    let mut widths: Vec<usize> = headers.iter().map(|h| h.len()).collect();
    for row in &rows {
        for (w, cell) in widths.iter_mut().zip(row.iter()) {
            *w = (*w).max(cell.len());
        }
    }
    let mut out = String::new();
    let mut push_row = |cells: &[String]| {
        for (i, (cell, width)) in cells.iter().zip(&widths).enumerate() {
            if i == 0 {
                let _ = write!(out, "{cell:<width$}");
            } else {
                let _ = write!(out, "  {cell:>width$}");
            }
        }
        out.push('\n');
    };
    push_row(&headers.map(str::to_owned));
    for row in &rows {
        push_row(row);
    }
    out
}
