//! Glance events, six-second epochs, and 4 Hz resampling.
//!
//! An epoch stores the event-based encoding: the region at t = 0 plus every
//! region change with its timestamp. [`resample_epoch`] discretizes that
//! timeline into exactly 25 samples spaced 250 ms apart using a zero-order
//! hold (sample i carries the region of the latest event at or before
//! `250·i` ms). [`information_loss`] measures the time-weighted fraction of
//! the epoch on which the reconstructed piecewise-constant signal disagrees
//! with the original.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use thiserror::Error;

use crate::region::GlanceRegion;

/// Fixed epoch duration in milliseconds.
pub const EPOCH_DURATION_MS: u64 = 6000;
/// Sample spacing of the 4 Hz grid.
pub const SAMPLE_PERIOD_MS: u64 = 250;
/// Number of samples per epoch: t = 0, 250, ..., 6000.
pub const SEQUENCE_LEN: usize = 25;

/// A timestamped change of gaze region. `t_ms` counts from epoch start.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct GlanceEvent {
    pub region: GlanceRegion,
    pub t_ms: u64,
}

impl GlanceEvent {
    pub fn new(region: GlanceRegion, t_ms: u64) -> Self {
        Self { region, t_ms }
    }
}

/// Why an event list cannot form a valid epoch.
///
/// Exactly one reason is reported per epoch: the first violation found while
/// scanning events left to right.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum MalformedEpoch {
    #[error("epoch has no events")]
    NoEvents,
    #[error("first event at {t_ms} ms, expected 0")]
    FirstEventNotAtZero { t_ms: u64 },
    #[error("event {index} does not increase the timestamp")]
    NonIncreasingTimestamps { index: usize },
    #[error("event {index} repeats the previous region")]
    SelfTransition { index: usize },
    #[error("event {index} at {t_ms} ms is outside the 6000 ms epoch")]
    EventPastEpochEnd { index: usize, t_ms: u64 },
}

impl MalformedEpoch {
    /// Stable snake_case reason code for ingest reports.
    pub fn code(&self) -> &'static str {
        match self {
            MalformedEpoch::NoEvents => "no_events",
            MalformedEpoch::FirstEventNotAtZero { .. } => "first_event_not_at_zero",
            MalformedEpoch::NonIncreasingTimestamps { .. } => "non_increasing_timestamps",
            MalformedEpoch::SelfTransition { .. } => "self_transition",
            MalformedEpoch::EventPastEpochEnd { .. } => "event_past_epoch_end",
        }
    }
}

/// Check the event-encoding invariants: non-empty, first event at t = 0,
/// strictly increasing timestamps, no self-transitions, all events inside
/// the 6000 ms epoch.
pub fn validate_events(events: &[GlanceEvent]) -> Result<(), MalformedEpoch> {
    let first = events.first().ok_or(MalformedEpoch::NoEvents)?;
    if first.t_ms != 0 {
        return Err(MalformedEpoch::FirstEventNotAtZero { t_ms: first.t_ms });
    }
    for (index, pair) in events.windows(2).enumerate() {
        let (prev, event) = (pair[0], pair[1]);
        let index = index + 1;
        if event.t_ms <= prev.t_ms {
            return Err(MalformedEpoch::NonIncreasingTimestamps { index });
        }
        if event.region == prev.region {
            return Err(MalformedEpoch::SelfTransition { index });
        }
        if event.t_ms >= EPOCH_DURATION_MS {
            return Err(MalformedEpoch::EventPastEpochEnd {
                index,
                t_ms: event.t_ms,
            });
        }
    }
    Ok(())
}

/// A six-second glance record: ordered transition events plus labeled
/// metadata variables. Construction validates the event encoding; label
/// validation against the schema happens at ingest.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Epoch {
    id: String,
    events: Vec<GlanceEvent>,
    labels: BTreeMap<String, String>,
}

impl Epoch {
    pub fn new(
        id: impl Into<String>,
        events: Vec<GlanceEvent>,
        labels: BTreeMap<String, String>,
    ) -> Result<Self, MalformedEpoch> {
        validate_events(&events)?;
        Ok(Self {
            id: id.into(),
            events,
            labels,
        })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn events(&self) -> &[GlanceEvent] {
        &self.events
    }

    pub fn labels(&self) -> &BTreeMap<String, String> {
        &self.labels
    }

    pub fn label(&self, variable: &str) -> Option<&str> {
        self.labels.get(variable).map(String::as_str)
    }
}

/// A 25-sample categorical sequence on the 250 ms grid; the classifier input.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SampledSequence {
    states: [GlanceRegion; SEQUENCE_LEN],
}

/// Attempt to build a [`SampledSequence`] from something that is not exactly
/// 25 states long.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("sequence has {got} states, expected {SEQUENCE_LEN}")]
pub struct WrongSequenceLength {
    pub got: usize,
}

impl SampledSequence {
    pub fn new(states: &[GlanceRegion]) -> Result<Self, WrongSequenceLength> {
        let states: [GlanceRegion; SEQUENCE_LEN] = states
            .try_into()
            .map_err(|_| WrongSequenceLength { got: states.len() })?;
        Ok(Self { states })
    }

    pub fn from_array(states: [GlanceRegion; SEQUENCE_LEN]) -> Self {
        Self { states }
    }

    pub fn states(&self) -> &[GlanceRegion; SEQUENCE_LEN] {
        &self.states
    }

    /// Sample time of index `i` on the grid: `250·i` ms.
    pub fn sample_time_ms(i: usize) -> u64 {
        SAMPLE_PERIOD_MS * i as u64
    }

    /// Collapse the sequence back to an event list (grid-aligned timestamps,
    /// self-transitions removed). Resampling the result reproduces `self`.
    ///
    /// The final sample sits exactly on the epoch boundary, where no event
    /// may live; a change appearing only there is encoded at the last
    /// interior millisecond (5999 ms), which resamples identically.
    pub fn to_events(&self) -> Vec<GlanceEvent> {
        let mut events = Vec::new();
        for (i, &region) in self.states.iter().enumerate() {
            if i == 0 || self.states[i - 1] != region {
                let t_ms = if i == SEQUENCE_LEN - 1 {
                    EPOCH_DURATION_MS - 1
                } else {
                    Self::sample_time_ms(i)
                };
                events.push(GlanceEvent::new(region, t_ms));
            }
        }
        events
    }
}

/// Zero-order-hold discretization of a validated event list: sample `i`
/// carries the region of the event with the largest `t_ms <= 250·i`. An
/// event exactly on a grid point wins that sample.
pub fn resample_events(events: &[GlanceEvent]) -> Result<SampledSequence, MalformedEpoch> {
    validate_events(events)?;
    let mut states = [events[0].region; SEQUENCE_LEN];
    let mut cursor = 0;
    for (i, state) in states.iter_mut().enumerate() {
        let t = SAMPLE_PERIOD_MS * i as u64;
        while cursor + 1 < events.len() && events[cursor + 1].t_ms <= t {
            cursor += 1;
        }
        *state = events[cursor].region;
    }
    Ok(SampledSequence { states })
}

/// Resample a validated epoch. Infallible because `Epoch` construction
/// already enforced the event invariants.
pub fn resample_epoch(epoch: &Epoch) -> SampledSequence {
    resample_events(epoch.events()).expect("epoch invariants hold by construction")
}

/// Time-weighted disagreement between the original event timeline and the
/// piecewise-constant reconstruction of `seq`: sample `i` is held over
/// `[250·i, 250·(i+1))`, clipped at 6000 ms. Returns a fraction of the
/// 6000 ms epoch, in `[0, 1]`.
pub fn information_loss(epoch: &Epoch, seq: &SampledSequence) -> f64 {
    let events = epoch.events();
    let mut mismatch_ms = 0u64;
    let mut cursor = 0usize; // last event with t_ms <= bin start
    for (i, &recon) in seq.states().iter().enumerate() {
        let bin_start = SAMPLE_PERIOD_MS * i as u64;
        let bin_end = (bin_start + SAMPLE_PERIOD_MS).min(EPOCH_DURATION_MS);
        if bin_start >= bin_end {
            break; // the t = 6000 sample has no bin
        }
        while cursor + 1 < events.len() && events[cursor + 1].t_ms <= bin_start {
            cursor += 1;
        }
        // walk the original segments overlapping this bin
        let mut seg = cursor;
        let mut t = bin_start;
        loop {
            let seg_end = if seg + 1 < events.len() {
                events[seg + 1].t_ms.min(bin_end)
            } else {
                bin_end
            };
            if events[seg].region != recon {
                mismatch_ms += seg_end - t;
            }
            if seg_end >= bin_end {
                break;
            }
            t = seg_end;
            seg += 1;
        }
    }
    mismatch_ms as f64 / EPOCH_DURATION_MS as f64
}
