//! Synthetic dataset construction and the TOML spec file behind `synth`.
//!
//! A spec file names two generating models, a per-class count, a seed, and
//! the label variable/value pair used to tag the generated epochs:
//!
//! ```toml
//! n_per_class = 500
//! seed = 42
//! label_variable = "distraction"                        # optional
//! label_values = ["not_distracted", "adjusting_radio"]  # optional
//!
//! [model_1]
//! pi = [0.5, 0.5]
//! a = [[0.9, 0.1], [0.1, 0.9]]
//! b = [[0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0],
//!      [0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0]]
//!
//! [model_2]
//! # ...
//! ```
//!
//! Generated sequences are collapsed back to transition events, so the
//! output is an ordinary dataset bundle that `evaluate` and `train` accept.

use std::fs;
use std::path::Path;

use serde::Deserialize;
use thiserror::Error;

use glance_seq_core::{DiscreteHmm, Epoch};

use crate::dataset::Dataset;
use crate::experiment::{generate_synthetic, SyntheticSpec};
use crate::schema;

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Spec { path: String, message: String },
    #[error("label {variable:?}={value:?} is not in the schema")]
    BadLabel { variable: String, value: String },
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SpecFile {
    n_per_class: usize,
    seed: u64,
    #[serde(default = "default_label_variable")]
    label_variable: String,
    #[serde(default = "default_label_values")]
    label_values: [String; 2],
    #[serde(default = "default_bayes_samples")]
    bayes_samples: usize,
    model_1: ModelSpec,
    model_2: ModelSpec,
}

fn default_label_variable() -> String {
    "distraction".into()
}

fn default_label_values() -> [String; 2] {
    ["not_distracted".into(), "adjusting_radio".into()]
}

fn default_bayes_samples() -> usize {
    10_000
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelSpec {
    pi: Vec<f64>,
    a: Vec<Vec<f64>>,
    b: Vec<Vec<f64>>,
}

impl ModelSpec {
    fn build(&self, which: &str, path: &str) -> Result<DiscreteHmm, SynthError> {
        DiscreteHmm::new(
            self.pi.clone(),
            self.a.concat(),
            self.b.concat(),
        )
        .map_err(|e| SynthError::Spec {
            path: path.to_owned(),
            message: format!("{which}: {e}"),
        })
    }
}

/// A fully validated synth request.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthRequest {
    pub spec: SyntheticSpec,
    pub label_variable: String,
    pub label_values: (String, String),
    pub bayes_samples: usize,
}

/// Load and validate a spec file.
pub fn load_spec(path: &Path) -> Result<SynthRequest, SynthError> {
    let name = path.display().to_string();
    let text = fs::read_to_string(path).map_err(|source| SynthError::Io {
        path: name.clone(),
        source,
    })?;
    parse_spec(&text, &name)
}

pub fn parse_spec(text: &str, name: &str) -> Result<SynthRequest, SynthError> {
    let file: SpecFile = toml::from_str(text).map_err(|e| SynthError::Spec {
        path: name.to_owned(),
        message: e.to_string(),
    })?;
    if file.n_per_class == 0 {
        return Err(SynthError::Spec {
            path: name.to_owned(),
            message: "n_per_class must be at least 1".into(),
        });
    }
    for value in &file.label_values {
        if !schema::is_valid_label(&file.label_variable, value) {
            return Err(SynthError::BadLabel {
                variable: file.label_variable.clone(),
                value: value.clone(),
            });
        }
    }
    let [value_1, value_2] = file.label_values;
    Ok(SynthRequest {
        spec: SyntheticSpec {
            model_1: file.model_1.build("model_1", name)?,
            model_2: file.model_2.build("model_2", name)?,
            n_per_class: file.n_per_class,
            seed: file.seed,
        },
        label_variable: file.label_variable,
        label_values: (value_1, value_2),
        bayes_samples: file.bayes_samples,
    })
}

/// Materialize the generated sequences as labeled epochs. Sequences are
/// collapsed to transition events, so resampling the resulting dataset
/// reproduces them exactly.
pub fn synthetic_dataset(
    spec: &SyntheticSpec,
    label_variable: &str,
    label_values: (&str, &str),
) -> Result<Dataset, SynthError> {
    for value in [label_values.0, label_values.1] {
        if !schema::is_valid_label(label_variable, value) {
            return Err(SynthError::BadLabel {
                variable: label_variable.to_owned(),
                value: value.to_owned(),
            });
        }
    }
    let (class_1, class_2) = generate_synthetic(spec);
    let mut epochs = Vec::with_capacity(2 * spec.n_per_class);
    for (value, seqs) in [(label_values.0, &class_1), (label_values.1, &class_2)] {
        for (i, seq) in seqs.iter().enumerate() {
            let id = format!("syn_{value}_{i:05}");
            let labels = std::collections::BTreeMap::from([(
                label_variable.to_owned(),
                value.to_owned(),
            )]);
            let epoch = Epoch::new(id, seq.to_events(), labels)
                .expect("collapsed sequences form valid epochs");
            epochs.push(epoch);
        }
    }
    Ok(Dataset::from_epochs(epochs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use glance_seq_core::{resample_epoch, SampledSequence};

    const SPEC: &str = r#"
n_per_class = 12
seed = 7

[model_1]
pi = [1.0]
a = [[1.0]]
b = [[0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0]]

[model_2]
pi = [1.0]
a = [[1.0]]
b = [[0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0]]
"#;

    #[test]
    fn spec_parses_with_defaults() {
        let req = parse_spec(SPEC, "spec.toml").expect("parses");
        assert_eq!(req.spec.n_per_class, 12);
        assert_eq!(req.label_variable, "distraction");
        assert_eq!(req.label_values.0, "not_distracted");
        assert_eq!(req.bayes_samples, 10_000);
        assert_eq!(req.spec.model_1.n_hidden(), 1);
    }

    #[test]
    fn bad_specs_are_rejected() {
        assert!(parse_spec("nonsense = true", "s").is_err());
        let bad_label =
            SPEC.replace("seed = 7", "seed = 7\nlabel_values = [\"clear\", \"raining\"]");
        assert!(matches!(
            parse_spec(&bad_label, "s"),
            Err(SynthError::BadLabel { .. })
        ));
        let bad_row = SPEC.replace("pi = [1.0]", "pi = [0.7]");
        assert!(matches!(parse_spec(&bad_row, "s"), Err(SynthError::Spec { .. })));
    }

    #[test]
    fn dataset_round_trips_the_generated_sequences() {
        let req = parse_spec(SPEC, "spec.toml").expect("parses");
        let dataset = synthetic_dataset(
            &req.spec,
            &req.label_variable,
            (&req.label_values.0, &req.label_values.1),
        )
        .expect("valid");
        assert_eq!(dataset.len(), 24);
        let (class_1, _) = generate_synthetic(&req.spec);
        let epoch = dataset.get("syn_not_distracted_00000").expect("exists");
        assert_eq!(epoch.label("distraction"), Some("not_distracted"));
        let seq: SampledSequence = resample_epoch(epoch);
        assert_eq!(seq, class_1[0]);
    }
}
