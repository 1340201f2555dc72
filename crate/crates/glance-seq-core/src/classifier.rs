//! Paired-HMM binary classification.
//!
//! One model is trained per class on SMOTE-balanced corpora; a probe
//! sequence is assigned to the class whose model gives it the higher forward
//! log-likelihood. Exact ties (including two impossible sequences) go to
//! class 1 so the decision is deterministic.

use alloc::string::String;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use thiserror::Error;

use crate::epoch::{
    GlanceEvent, SampledSequence, EPOCH_DURATION_MS, SAMPLE_PERIOD_MS, SEQUENCE_LEN,
};
use crate::hmm::{baum_welch_train, forward_log_likelihood, DiscreteHmm, TrainConfig, TrainError};
use crate::math;
use crate::smote::{smote_oversample, SmoteConfig, SmoteError};

/// Finite stand-in for a `-inf` log-likelihood when computing margins, so a
/// one-sided impossible probe still yields a finite, orderable confidence.
pub const IMPOSSIBLE_LOG_LIKELIHOOD: f64 = -1.0e9;

/// Default hidden-state-count search space for automatic selection.
pub const DEFAULT_HIDDEN_CANDIDATES: [usize; 11] = [2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12];

/// Which side of a binary problem a prediction picked.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ChosenClass {
    Class1,
    Class2,
}

impl ChosenClass {
    /// 1-based class number.
    pub fn number(self) -> u8 {
        match self {
            ChosenClass::Class1 => 1,
            ChosenClass::Class2 => 2,
        }
    }

    /// 0-based index, convenient for confusion matrices.
    pub fn index(self) -> usize {
        self.number() as usize - 1
    }
}

/// Outcome of classifying one sequence. `margin` is the log-likelihood gap
/// in favor of the chosen class, never negative; `-inf` log-likelihoods are
/// mapped to [`IMPOSSIBLE_LOG_LIKELIHOOD`] before the gap is taken.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prediction {
    pub chosen_class: ChosenClass,
    pub loglik_1: f64,
    pub loglik_2: f64,
    pub margin: f64,
}

/// A trained pair of per-class models for one binary problem.
#[derive(Debug, Clone, PartialEq)]
pub struct BinaryClassifier {
    pub problem_name: String,
    pub class_names: (String, String),
    pub model_1: DiscreteHmm,
    pub model_2: DiscreteHmm,
    pub train_config: TrainConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum ClassifierError {
    #[error("a class has no training sequences")]
    EmptyClass,
    #[error("class too small to split for validation")]
    ClassTooSmall,
    #[error(transparent)]
    Train(#[from] TrainError),
    #[error(transparent)]
    Smote(#[from] SmoteError),
}

/// Oversample the smaller class with SMOTE until both classes have the same
/// number of sequences. Equal-sized classes pass through untouched.
pub fn balance_classes(
    class1: &[SampledSequence],
    class2: &[SampledSequence],
    smote_cfg: &SmoteConfig,
) -> Result<(Vec<SampledSequence>, Vec<SampledSequence>), ClassifierError> {
    if class1.is_empty() || class2.is_empty() {
        return Err(ClassifierError::EmptyClass);
    }
    let mut one = class1.to_vec();
    let mut two = class2.to_vec();
    if one.len() < two.len() {
        one.extend(smote_oversample(class1, two.len(), smote_cfg)?);
    } else if two.len() < one.len() {
        two.extend(smote_oversample(class2, one.len(), smote_cfg)?);
    }
    Ok((one, two))
}

/// Train the two per-class models on SMOTE-balanced corpora. Deterministic
/// given `cfg.seed` and `smote_cfg.seed`.
pub fn train_binary(
    problem_name: &str,
    class_names: (&str, &str),
    class1: &[SampledSequence],
    class2: &[SampledSequence],
    cfg: &TrainConfig,
    smote_cfg: &SmoteConfig,
) -> Result<BinaryClassifier, ClassifierError> {
    let (balanced1, balanced2) = balance_classes(class1, class2, smote_cfg)?;
    let model_1 = baum_welch_train(&balanced1, cfg)?;
    let model_2 = baum_welch_train(&balanced2, cfg)?;
    Ok(BinaryClassifier {
        problem_name: problem_name.into(),
        class_names: (class_names.0.into(), class_names.1.into()),
        model_1,
        model_2,
        train_config: *cfg,
    })
}

/// Maximum-log-likelihood decision between the two class models.
pub fn classify(classifier: &BinaryClassifier, seq: &SampledSequence) -> Prediction {
    let loglik_1 = forward_log_likelihood(&classifier.model_1, seq.states());
    let loglik_2 = forward_log_likelihood(&classifier.model_2, seq.states());
    let finite_1 = loglik_1.max(IMPOSSIBLE_LOG_LIKELIHOOD);
    let finite_2 = loglik_2.max(IMPOSSIBLE_LOG_LIKELIHOOD);
    let chosen_class = if finite_1 >= finite_2 {
        ChosenClass::Class1
    } else {
        ChosenClass::Class2
    };
    Prediction {
        chosen_class,
        loglik_1,
        loglik_2,
        margin: (finite_1 - finite_2).abs(),
    }
}

/// Pick the hidden-state count with the best balanced accuracy on an
/// internal validation split.
///
/// The split is drawn once from `cfg.seed` and shared by every candidate;
/// `validation_fraction` of each class (rounded half-up, clamped so both
/// parts stay non-empty) is held out. Ties prefer the smaller state count.
pub fn select_hidden_states(
    class1: &[SampledSequence],
    class2: &[SampledSequence],
    candidates: &[usize],
    cfg: &TrainConfig,
    smote_cfg: &SmoteConfig,
    validation_fraction: f64,
) -> Result<usize, ClassifierError> {
    assert!(
        !candidates.is_empty() && validation_fraction > 0.0 && validation_fraction < 1.0,
        "candidates must be non-empty and 0 < validation_fraction < 1"
    );
    let mut rng = ChaCha12Rng::seed_from_u64(cfg.seed);
    let (train1, val1) = validation_split(class1, validation_fraction, &mut rng)?;
    let (train2, val2) = validation_split(class2, validation_fraction, &mut rng)?;

    let mut best: Option<(f64, usize)> = None;
    for &n_hidden in candidates {
        let candidate_cfg = TrainConfig { n_hidden, ..*cfg };
        let clf = train_binary("selection", ("1", "2"), &train1, &train2, &candidate_cfg, smote_cfg)?;
        let score = balanced_accuracy(&clf, &val1, &val2);
        let better = match best {
            None => true,
            Some((best_score, best_n)) => {
                score > best_score || (score == best_score && n_hidden < best_n)
            }
        };
        if better {
            best = Some((score, n_hidden));
        }
    }
    Ok(best.expect("candidates is non-empty").1)
}

fn validation_split(
    class: &[SampledSequence],
    validation_fraction: f64,
    rng: &mut ChaCha12Rng,
) -> Result<(Vec<SampledSequence>, Vec<SampledSequence>), ClassifierError> {
    if class.is_empty() {
        return Err(ClassifierError::EmptyClass);
    }
    if class.len() < 2 {
        return Err(ClassifierError::ClassTooSmall);
    }
    let mut indices: Vec<usize> = (0..class.len()).collect();
    indices.shuffle(rng);
    let train_len = math::round_half_up((1.0 - validation_fraction) * class.len() as f64)
        .clamp(1, class.len() - 1);
    let train = indices[..train_len].iter().map(|&i| class[i]).collect();
    let val = indices[train_len..].iter().map(|&i| class[i]).collect();
    Ok((train, val))
}

/// Mean per-class recall of `classifier` on held-out members of both classes.
pub fn balanced_accuracy(
    classifier: &BinaryClassifier,
    held_out_1: &[SampledSequence],
    held_out_2: &[SampledSequence],
) -> f64 {
    let recall = |seqs: &[SampledSequence], want: ChosenClass| {
        if seqs.is_empty() {
            return 0.0;
        }
        let hits = seqs
            .iter()
            .filter(|s| classify(classifier, s).chosen_class == want)
            .count();
        hits as f64 / seqs.len() as f64
    };
    (recall(held_out_1, ChosenClass::Class1) + recall(held_out_2, ChosenClass::Class2)) / 2.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum StreamError {
    #[error("stream timestamp at event {index} does not increase")]
    NonMonotonicTimestamps { index: usize },
}

/// One sliding-window classification, emitted at `time_ms`. `abstain` is set
/// when the margin fell below the confidence threshold; the prediction is
/// reported either way.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindowEmission {
    pub time_ms: u64,
    pub prediction: Prediction,
    pub abstain: bool,
}

/// Classify a live glance stream with a six-second sliding window.
///
/// Windows end at `first_event + 6000 + k·step_ms` for `k = 0, 1, ...` while
/// they stay within the stream; each window is resampled to 25 states with
/// the same zero-order hold used for epochs and then classified. Streams may
/// contain repeated regions (a stream is a sensor replay, not an event-based
/// epoch encoding); only strictly increasing timestamps are required.
pub fn sliding_window_classify(
    events: &[GlanceEvent],
    classifier: &BinaryClassifier,
    step_ms: u64,
    confidence_threshold: f64,
) -> Result<Vec<WindowEmission>, StreamError> {
    assert!(step_ms > 0, "step_ms must be positive");
    for (index, pair) in events.windows(2).enumerate() {
        if pair[1].t_ms <= pair[0].t_ms {
            return Err(StreamError::NonMonotonicTimestamps { index: index + 1 });
        }
    }
    let mut emissions = Vec::new();
    let (Some(first), Some(last)) = (events.first(), events.last()) else {
        return Ok(emissions);
    };
    let mut end = first.t_ms + EPOCH_DURATION_MS;
    while end <= last.t_ms {
        let window_start = end - EPOCH_DURATION_MS;
        let mut states = [first.region; SEQUENCE_LEN];
        for (i, state) in states.iter_mut().enumerate() {
            let sample_t = window_start + SAMPLE_PERIOD_MS * i as u64;
            let pos = events.partition_point(|e| e.t_ms <= sample_t);
            *state = events[pos - 1].region; // pos >= 1: first event <= window_start
        }
        let prediction = classify(classifier, &SampledSequence::from_array(states));
        emissions.push(WindowEmission {
            time_ms: end,
            prediction,
            abstain: prediction.margin < confidence_threshold,
        });
        end += step_ms;
    }
    Ok(emissions)
}

/// Resample one window of a validated stream; exposed for tests and replay
/// tooling.
pub fn resample_stream_window(
    events: &[GlanceEvent],
    window_start: u64,
) -> Option<SampledSequence> {
    if events.first()?.t_ms > window_start {
        return None;
    }
    let mut states = [events[0].region; SEQUENCE_LEN];
    for (i, state) in states.iter_mut().enumerate() {
        let sample_t = window_start + SAMPLE_PERIOD_MS * i as u64;
        let pos = events.partition_point(|e| e.t_ms <= sample_t);
        *state = events[pos - 1].region;
    }
    Some(SampledSequence::from_array(states))
}
