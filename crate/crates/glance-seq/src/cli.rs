//! The `glance-seq` command-line interface.
//!
//! Subcommands: `ingest` (CSV pair → validated bundle), `evaluate`
//! (repeated-split accuracy table + matrix exports), `train` (serialize one
//! classifier), `stream` (sliding-window replay of an event file), and
//! `synth` (generate a synthetic bundle and report its Bayes accuracy).
//!
//! Exit codes: 0 success, 2 usage or parse error, 3 data degeneracy (no
//! usable epochs, class too small to split). `GLANCE_SEQ_THREADS` caps
//! worker parallelism; `--config` layers `key = value` defaults under
//! explicit flags.

use std::fs;
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use glance_seq_core::classifier::{select_hidden_states, DEFAULT_HIDDEN_CANDIDATES};
use glance_seq_core::{
    sliding_window_classify, train_binary, SampledSequence, SmoteConfig, TrainConfig,
};

use crate::bundle::{read_bundle, write_bundle, BundleError};
use crate::config::{parse_overrides, Overrides};
use crate::dataset::{enumerate_problems, ingest, BinaryProblem, DEFAULT_MIN_EPOCHS};
use crate::experiment::{
    bayes_accuracy_estimate, export_problem_matrices, results_csv, results_table, run_all,
    ExperimentConfig, ExperimentError, MetricKind,
};
use crate::io_util::write_atomic;
use crate::model_io::{read_classifier, write_classifier};
use crate::stream_io::{format_emission, read_events};
use crate::synth::{load_spec, synthetic_dataset};

#[derive(Parser)]
#[command(
    name = "glance-seq",
    version,
    about = "Classify six-second driver glance sequences with per-class hidden Markov models"
)]
struct Cli {
    /// Config file with `key = value` lines; explicit flags win over it.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Validate a glances/labels CSV pair into a dataset bundle.
    Ingest(IngestArgs),
    /// Run the repeated-split evaluation and export results and matrices.
    Evaluate(EvaluateArgs),
    /// Train one binary classifier and serialize it.
    Train(TrainArgs),
    /// Replay an event stream through a trained classifier.
    Stream(StreamArgs),
    /// Generate a synthetic dataset bundle from a spec file.
    Synth(SynthArgs),
}

#[derive(Args)]
struct IngestArgs {
    /// Glance events CSV (`epoch_id,t_ms,region`).
    #[arg(long, value_name = "PATH")]
    glances: PathBuf,
    /// Labels CSV (`epoch_id,variable,value`).
    #[arg(long, value_name = "PATH")]
    labels: PathBuf,
    /// Output bundle directory.
    #[arg(long, value_name = "DATASET_PATH")]
    out: PathBuf,
}

#[derive(Args)]
struct EvaluateArgs {
    /// Dataset bundle directory.
    #[arg(long, value_name = "PATH")]
    dataset: PathBuf,
    /// Problem names to run, or `all`.
    #[arg(long, value_name = "NAME", num_args = 1.., default_values_t = [String::from("all")])]
    problems: Vec<String>,
    /// Number of repeated splits (at least 2).
    #[arg(long, value_name = "N")]
    repeats: Option<usize>,
    /// Master seed; repeat r derives its own seeds from seed + r.
    #[arg(long, value_name = "S")]
    seed: Option<u64>,
    /// Headline metric: balanced, raw, or both.
    #[arg(long, value_name = "METRIC")]
    metric: Option<String>,
    /// Minimum epochs per class for a problem to qualify.
    #[arg(long, value_name = "N")]
    min_epochs: Option<usize>,
    /// Output directory for results.csv, results.txt, and matrices/.
    #[arg(long, value_name = "DIR")]
    out: PathBuf,
}

#[derive(Args)]
struct TrainArgs {
    /// Dataset bundle directory.
    #[arg(long, value_name = "PATH")]
    dataset: PathBuf,
    /// Problem name from the evaluate enumeration.
    #[arg(long, value_name = "NAME")]
    problem: String,
    /// Hidden-state count, or `auto` to search 2..=12.
    #[arg(long, value_name = "N|auto")]
    hidden: Option<String>,
    /// Training seed.
    #[arg(long, value_name = "S")]
    seed: Option<u64>,
    /// Minimum epochs per class for a problem to qualify.
    #[arg(long, value_name = "N")]
    min_epochs: Option<usize>,
    /// Output classifier directory.
    #[arg(long, value_name = "MODEL_PATH")]
    out: PathBuf,
}

#[derive(Args)]
struct StreamArgs {
    /// Classifier directory written by `train`.
    #[arg(long, value_name = "MODEL_PATH")]
    model: PathBuf,
    /// Event stream file (`t_ms,region`), or `-` for stdin.
    #[arg(long, value_name = "PATH|-")]
    events: String,
    /// Milliseconds between window emissions.
    #[arg(long, value_name = "MS")]
    step_ms: Option<u64>,
    /// Abstain when the log-likelihood margin falls below this.
    #[arg(long, value_name = "T")]
    threshold: Option<f64>,
}

#[derive(Args)]
struct SynthArgs {
    /// TOML spec naming the two generating models.
    #[arg(long, value_name = "PATH")]
    spec: PathBuf,
    /// Output bundle directory.
    #[arg(long, value_name = "PREFIX")]
    out: PathBuf,
}

/// A command failure: message plus process exit code.
#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Self { code: 2, message: message.into() }
    }

    fn degenerate(message: impl Into<String>) -> Self {
        Self { code: 3, message: message.into() }
    }
}

macro_rules! usage_from {
    ($($ty:ty),*) => {
        $(impl From<$ty> for Failure {
            fn from(err: $ty) -> Self {
                Failure::usage(err.to_string())
            }
        })*
    };
}

usage_from!(
    crate::dataset::IngestError,
    BundleError,
    crate::model_io::ModelIoError,
    crate::synth::SynthError,
    crate::config::ConfigError,
    std::io::Error
);

impl From<ExperimentError> for Failure {
    fn from(err: ExperimentError) -> Self {
        match err {
            ExperimentError::TooFewRepeats => Failure::usage(err.to_string()),
            ExperimentError::Split(_) | ExperimentError::Classifier(_) => {
                Failure::degenerate(err.to_string())
            }
            _ => Failure::usage(err.to_string()),
        }
    }
}

/// Parse arguments from the environment and run; returns the process exit
/// code.
pub fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let _ = err.print();
            return err.exit_code();
        }
    };
    match configure_threads().and_then(|()| dispatch(cli)) {
        Ok(()) => 0,
        Err(failure) => {
            eprintln!("error: {}", failure.message);
            failure.code
        }
    }
}

fn configure_threads() -> Result<(), Failure> {
    let Some(value) = std::env::var_os("GLANCE_SEQ_THREADS") else {
        return Ok(());
    };
    let threads: usize = value
        .to_str()
        .and_then(|v| v.parse().ok())
        .filter(|&n| n > 0)
        .ok_or_else(|| {
            Failure::usage(format!("GLANCE_SEQ_THREADS must be a positive integer, got {value:?}"))
        })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| Failure::usage(format!("thread pool: {e}")))
}

fn dispatch(cli: Cli) -> Result<(), Failure> {
    let overrides = match &cli.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
            parse_overrides(&text)?
        }
        None => Overrides::default(),
    };
    match cli.command {
        Cmd::Ingest(args) => cmd_ingest(args),
        Cmd::Evaluate(args) => cmd_evaluate(args, &overrides),
        Cmd::Train(args) => cmd_train(args, &overrides),
        Cmd::Stream(args) => cmd_stream(args, &overrides),
        Cmd::Synth(args) => cmd_synth(args),
    }
}

fn cmd_ingest(args: IngestArgs) -> Result<(), Failure> {
    let (dataset, report) = ingest(&args.glances, &args.labels)?;
    write_atomic(&args.out.join("ingest_report.txt"), &report.render())?;
    if report.accepted == 0 {
        return Err(Failure::degenerate(format!(
            "no usable epochs ({} rejected); see {}",
            report.rejected.len(),
            args.out.join("ingest_report.txt").display()
        )));
    }
    write_bundle(&args.out, &dataset)?;
    println!(
        "accepted {} of {} epochs into {}",
        report.accepted,
        report.total(),
        args.out.display()
    );
    Ok(())
}

/// Resolve the training/SMOTE knobs shared by evaluate and train.
fn resolve_train_config(
    overrides: &Overrides,
    seed_flag: Option<u64>,
    n_hidden: usize,
) -> (TrainConfig, SmoteConfig) {
    let defaults = TrainConfig::default();
    let train = TrainConfig {
        n_hidden,
        max_iters: overrides.max_iters.unwrap_or(defaults.max_iters),
        rel_tol: overrides.rel_tol.unwrap_or(defaults.rel_tol),
        n_restarts: overrides.restarts.unwrap_or(defaults.n_restarts),
        floor: overrides.floor.unwrap_or(defaults.floor),
        seed: seed_flag.or(overrides.seed).unwrap_or(defaults.seed),
    };
    let smote = SmoteConfig {
        k_neighbors: overrides.k_neighbors.unwrap_or_else(|| SmoteConfig::default().k_neighbors),
        seed: train.seed,
    };
    (train, smote)
}

fn parse_hidden(value: &str) -> Result<Option<usize>, Failure> {
    if value == "auto" {
        return Ok(None);
    }
    value
        .parse::<usize>()
        .ok()
        .filter(|&n| n >= 1)
        .map(Some)
        .ok_or_else(|| Failure::usage(format!("--hidden must be a positive integer or `auto`, got {value:?}")))
}

fn select_problems<'a>(
    requested: &[String],
    available: &'a [BinaryProblem],
) -> Result<Vec<&'a BinaryProblem>, Failure> {
    if requested.len() == 1 && requested[0] == "all" {
        return Ok(available.iter().collect());
    }
    let mut selected = Vec::with_capacity(requested.len());
    for name in requested {
        match available.iter().find(|p| &p.name == name) {
            Some(p) => selected.push(p),
            None => {
                let names: Vec<&str> = available.iter().map(|p| p.name.as_str()).collect();
                return Err(Failure::usage(format!(
                    "unknown problem {name:?}; valid names:\n  {}",
                    names.join("\n  ")
                )));
            }
        }
    }
    Ok(selected)
}

/// L1 mass of the difference between the two class transition matrices.
fn diff_l1_mass(problem: &BinaryProblem, dataset: &crate::dataset::Dataset) -> Option<f64> {
    use glance_seq_core::{matrix_difference, transition_matrix};
    let seqs = dataset.resample_all();
    let collect = |ids: &[String]| -> Vec<glance_seq_core::SampledSequence> {
        ids.iter().filter_map(|id| seqs.get(id).copied()).collect()
    };
    let m1 = transition_matrix(&collect(&problem.epochs_1)).ok()?;
    let m2 = transition_matrix(&collect(&problem.epochs_2)).ok()?;
    let diff = matrix_difference(&m1, &m2);
    Some(diff.delta().iter().flatten().map(|d| d.abs()).sum())
}

/// File-name slug for a problem: lowercase alphanumerics with `_`.
fn slug(name: &str) -> String {
    let mut out = String::with_capacity(name.len());
    let mut last_underscore = true;
    for c in name.chars() {
        if c.is_ascii_alphanumeric() {
            out.push(c.to_ascii_lowercase());
            last_underscore = false;
        } else if !last_underscore {
            out.push('_');
            last_underscore = true;
        }
    }
    while out.ends_with('_') {
        out.pop();
    }
    out
}

fn cmd_evaluate(args: EvaluateArgs, overrides: &Overrides) -> Result<(), Failure> {
    let repeats = args.repeats.or(overrides.repeats).unwrap_or(10);
    if repeats < 2 {
        return Err(Failure::usage(
            "--repeats must be at least 2: the standard deviation is undefined for one repeat",
        ));
    }
    let metric_name = args
        .metric
        .clone()
        .or_else(|| overrides.metric.clone())
        .unwrap_or_else(|| "balanced".to_owned());
    let metric = MetricKind::parse(&metric_name).ok_or_else(|| {
        Failure::usage(format!("--metric must be balanced, raw, or both, got {metric_name:?}"))
    })?;
    let hidden = match overrides.hidden.as_deref() {
        Some(value) => parse_hidden(value)?
            .ok_or_else(|| Failure::usage("hidden = auto is only valid for `train`"))?,
        None => TrainConfig::default().n_hidden,
    };
    let (train_config, smote_config) = resolve_train_config(overrides, args.seed, hidden);
    let cfg = ExperimentConfig {
        n_repeats: repeats,
        train_fraction: overrides.train_fraction.unwrap_or(0.8),
        train_config,
        smote_config,
        metric,
        master_seed: args.seed.or(overrides.seed).unwrap_or(0),
    };

    let (dataset, _) = read_bundle(&args.dataset)?;
    let min_epochs = args.min_epochs.or(overrides.min_epochs).unwrap_or(DEFAULT_MIN_EPOCHS);
    let problems = enumerate_problems(&dataset, min_epochs);
    let requested_all = args.problems.len() == 1 && args.problems[0] == "all";
    if problems.is_empty() && requested_all {
        eprintln!("warning: no problems meet the {min_epochs}-epoch threshold; writing empty results");
        write_atomic(&args.out.join("results.csv"), &results_csv(&[], repeats))?;
        write_atomic(&args.out.join("results.txt"), &results_table(&[]))?;
        return Ok(());
    }
    let selected = select_problems(&args.problems, &problems)?;
    let selected_owned: Vec<BinaryProblem> = selected.into_iter().cloned().collect();

    let summary = run_all(&selected_owned, &dataset, &cfg);
    for (name, message) in &summary.failures {
        eprintln!("problem {name:?} failed: {message}");
    }

    write_atomic(&args.out.join("results.csv"), &results_csv(&summary.results, repeats))?;
    write_atomic(&args.out.join("results.txt"), &results_table(&summary.results))?;
    let matrices_dir = args.out.join("matrices");
    for problem in &selected_owned {
        export_problem_matrices(problem, &dataset, &matrices_dir, &slug(&problem.name))?;
    }

    print!("{}", results_table(&summary.results));
    // diagnostic: aggregate transition-probability difference per problem
    // (better-separated problems tend to carry more mass here)
    for problem in &selected_owned {
        if let Some(mass) = diff_l1_mass(problem, &dataset) {
            println!("diff_l1 {} {mass:.6}", problem.name);
        }
    }
    if summary.results.is_empty() {
        return Err(Failure::degenerate("every selected problem failed"));
    }
    Ok(())
}

fn cmd_train(args: TrainArgs, overrides: &Overrides) -> Result<(), Failure> {
    let (dataset, _) = read_bundle(&args.dataset)?;
    let min_epochs = args.min_epochs.or(overrides.min_epochs).unwrap_or(DEFAULT_MIN_EPOCHS);
    let problems = enumerate_problems(&dataset, min_epochs);
    let problem = select_problems(std::slice::from_ref(&args.problem), &problems)?[0];

    let seqs = dataset.resample_all();
    let class_seqs = |ids: &[String]| -> Vec<SampledSequence> {
        ids.iter().filter_map(|id| seqs.get(id).copied()).collect()
    };
    let class_1 = class_seqs(&problem.epochs_1);
    let class_2 = class_seqs(&problem.epochs_2);
    if class_1.len() < 2 || class_2.len() < 2 {
        return Err(Failure::degenerate(format!(
            "problem {:?} has a degenerate class ({} vs {} epochs)",
            problem.name,
            class_1.len(),
            class_2.len()
        )));
    }

    let hidden_arg = args
        .hidden
        .clone()
        .or_else(|| overrides.hidden.clone())
        .unwrap_or_else(|| TrainConfig::default().n_hidden.to_string());
    let (base_config, smote_config) = resolve_train_config(overrides, args.seed, 1);
    let n_hidden = match parse_hidden(&hidden_arg)? {
        Some(n) => n,
        None => select_hidden_states(
            &class_1,
            &class_2,
            &DEFAULT_HIDDEN_CANDIDATES,
            &base_config,
            &smote_config,
            0.2,
        )
        .map_err(|e| Failure::degenerate(e.to_string()))?,
    };
    let train_config = TrainConfig { n_hidden, ..base_config };

    let classifier = train_binary(
        &problem.name,
        (&problem.value_1, &problem.value_2),
        &class_1,
        &class_2,
        &train_config,
        &smote_config,
    )
    .map_err(|e| Failure::degenerate(e.to_string()))?;
    write_classifier(&args.out, &classifier)?;
    println!(
        "trained {:?} with {n_hidden} hidden states into {}",
        problem.name,
        args.out.display()
    );
    Ok(())
}

fn cmd_stream(args: StreamArgs, overrides: &Overrides) -> Result<(), Failure> {
    let classifier = read_classifier(&args.model)?;
    let events = if args.events == "-" {
        read_events(std::io::stdin().lock(), "stdin")?
    } else {
        let path = Path::new(&args.events);
        let file = fs::File::open(path)
            .map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
        read_events(BufReader::new(file), &path.display().to_string())?
    };
    let step_ms = args.step_ms.or(overrides.step_ms).unwrap_or(250);
    if step_ms == 0 {
        return Err(Failure::usage("--step-ms must be positive"));
    }
    let threshold = args.threshold.or(overrides.threshold).unwrap_or(0.0);
    let emissions = sliding_window_classify(&events, &classifier, step_ms, threshold)
        .map_err(|e| Failure::usage(e.to_string()))?;
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    for emission in &emissions {
        writeln!(out, "{}", format_emission(&classifier, emission))
            .map_err(|e| Failure::usage(e.to_string()))?;
    }
    Ok(())
}

fn cmd_synth(args: SynthArgs) -> Result<(), Failure> {
    let request = load_spec(&args.spec)?;
    let dataset = synthetic_dataset(
        &request.spec,
        &request.label_variable,
        (&request.label_values.0, &request.label_values.1),
    )?;
    write_bundle(&args.out, &dataset)?;
    // independent draw stream for the estimate
    let bayes_seed = request.spec.seed.wrapping_add(0x9E37_79B9);
    let estimate = bayes_accuracy_estimate(
        &request.spec.model_1,
        &request.spec.model_2,
        request.bayes_samples,
        bayes_seed,
    );
    println!(
        "wrote {} epochs per class to {}",
        request.spec.n_per_class,
        args.out.display()
    );
    println!("bayes_accuracy_estimate = {estimate:.4}");
    Ok(())
}
