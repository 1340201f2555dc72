//! Core models for six-second driver glance sequences.
//!
//! A glance recording is an event-based timeline: the gaze region at the
//! start of the epoch followed by timestamped region changes. This crate
//! turns those timelines into fixed-length categorical sequences (25 samples
//! at 4 Hz), fits one discrete hidden Markov model per class, and decides
//! between two classes by maximum log-likelihood. Class imbalance is handled
//! by a categorical SMOTE variant that synthesizes minority sequences from
//! nearest neighbors.
//!
//! The crate is `no_std`-compatible (`alloc` required); disable the default
//! `std` feature for embedded targets. All operations are pure functions over
//! immutable inputs and all randomness flows from explicit 64-bit seeds, so
//! results are reproducible bit-for-bit.
//!
//! Module map:
//!
//! - [`region`]: the eight-value gaze-region alphabet
//! - [`epoch`]: glance events, six-second epochs, 4 Hz resampling, and the
//!   time-weighted information-loss metric
//! - [`transition`]: region-to-region transition matrices and their
//!   differences
//! - [`hmm`]: scaled forward likelihood, Baum-Welch training with seeded
//!   restarts, generative sampling
//! - [`smote`]: Hamming-neighbor minority oversampling for fixed-length
//!   categorical sequences
//! - [`classifier`]: the paired-HMM binary classifier, hidden-state-count
//!   selection, and sliding-window streaming classification

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod classifier;
pub mod epoch;
pub mod hmm;
#[cfg(any(test, feature = "reference"))]
pub mod reference;
pub mod region;
pub mod smote;
pub mod transition;

pub use classifier::{
    classify, sliding_window_classify, train_binary, BinaryClassifier, ChosenClass,
    ClassifierError, Prediction, StreamError, WindowEmission,
};
pub use epoch::{
    information_loss, resample_epoch, resample_events, Epoch, GlanceEvent, MalformedEpoch,
    SampledSequence, EPOCH_DURATION_MS, SAMPLE_PERIOD_MS, SEQUENCE_LEN,
};
pub use hmm::{
    baum_welch_train, forward_log_likelihood, sample_sequence, DiscreteHmm, TrainConfig,
    TrainError,
};
pub use region::GlanceRegion;
pub use smote::{hamming_distance, smote_oversample, SmoteConfig, SmoteError};
pub use transition::{matrix_difference, transition_matrix, DiffMatrix, TransitionMatrix};

pub(crate) mod math {
    //! Float math routed through `libm` when `std` is unavailable.

    #[cfg(feature = "std")]
    #[inline]
    pub fn ln(x: f64) -> f64 {
        x.ln()
    }

    #[cfg(not(feature = "std"))]
    #[inline]
    pub fn ln(x: f64) -> f64 {
        libm::log(x)
    }

    // exp is only needed by the reference implementations
    #[cfg(feature = "std")]
    #[cfg_attr(not(any(test, feature = "reference")), allow(dead_code))]
    #[inline]
    pub fn exp(x: f64) -> f64 {
        x.exp()
    }

    #[cfg(not(feature = "std"))]
    #[cfg_attr(not(any(test, feature = "reference")), allow(dead_code))]
    #[inline]
    pub fn exp(x: f64) -> f64 {
        libm::exp(x)
    }

    /// Round-half-up for non-negative values; used for deterministic split
    /// sizing.
    #[inline]
    pub fn round_half_up(x: f64) -> usize {
        (x + 0.5) as usize
    }
}
