//! Brute-force reference implementations for test suites.
//!
//! Everything here trades efficiency for obviousness and shares no code with
//! the production paths it cross-checks: likelihoods are exhaustive sums
//! over all hidden paths, the information-loss sweep evaluates both signals
//! millisecond by millisecond, and the transition tally is a naive double
//! loop. Only compiled for tests or under the `reference` feature.

use alloc::vec;
use alloc::vec::Vec;

use crate::epoch::{Epoch, GlanceEvent, SampledSequence, EPOCH_DURATION_MS, SAMPLE_PERIOD_MS};
use crate::hmm::{DiscreteHmm, N_OBSERVATIONS};
use crate::math;
use crate::region::GlanceRegion;

/// `log P(obs | model)` by summing the probability of every hidden path.
/// Only tractable for a handful of states and short sequences.
pub fn enumerate_log_likelihood(model: &DiscreteHmm, obs: &[GlanceRegion]) -> f64 {
    if obs.is_empty() {
        return 0.0;
    }
    let n = model.n_hidden();
    let mut total = 0.0;
    let mut path = Vec::with_capacity(obs.len());
    path.push(0);
    // odometer over all n^T paths
    loop {
        if path.len() == obs.len() {
            let mut p = model.pi()[path[0]] * model.emission_prob(path[0], obs[0]);
            for t in 1..path.len() {
                p *= model.transition()[path[t - 1] * n + path[t]]
                    * model.emission_prob(path[t], obs[t]);
            }
            total += p;
            // advance
            loop {
                match path.last_mut() {
                    Some(last) if *last + 1 < n => {
                        *last += 1;
                        break;
                    }
                    Some(_) => {
                        path.pop();
                    }
                    None => return if total > 0.0 { math::ln(total) } else { f64::NEG_INFINITY },
                }
            }
        } else {
            path.push(0);
        }
    }
}

/// Sum of `exp(log_likelihood)` over every possible sequence of `len`
/// observations; 1 for a valid model.
pub fn total_probability(model: &DiscreteHmm, len: usize, log_likelihood: impl Fn(&DiscreteHmm, &[GlanceRegion]) -> f64) -> f64 {
    let mut total = 0.0;
    let mut obs = vec![GlanceRegion::ALL[0]; len];
    let mut counters = vec![0usize; len];
    loop {
        total += math::exp(log_likelihood(model, &obs));
        let mut pos = 0;
        loop {
            if pos == len {
                return total;
            }
            counters[pos] += 1;
            if counters[pos] < N_OBSERVATIONS {
                obs[pos] = GlanceRegion::ALL[counters[pos]];
                break;
            }
            counters[pos] = 0;
            obs[pos] = GlanceRegion::ALL[0];
            pos += 1;
        }
    }
}

/// Region of the original event timeline at time `t_ms`.
pub fn region_at(events: &[GlanceEvent], t_ms: u64) -> GlanceRegion {
    events
        .iter()
        .take_while(|e| e.t_ms <= t_ms)
        .last()
        .expect("first event is at t = 0")
        .region
}

/// Information loss by checking every millisecond of the epoch.
pub fn per_ms_information_loss(epoch: &Epoch, seq: &SampledSequence) -> f64 {
    let mut mismatched = 0u64;
    for t in 0..EPOCH_DURATION_MS {
        let original = region_at(epoch.events(), t);
        let reconstructed = seq.states()[(t / SAMPLE_PERIOD_MS) as usize];
        if original != reconstructed {
            mismatched += 1;
        }
    }
    mismatched as f64 / EPOCH_DURATION_MS as f64
}

/// Adjacent-pair tally via explicit index loops.
pub fn tally_transition_counts(seqs: &[SampledSequence]) -> [[u64; 8]; 8] {
    let mut counts = [[0u64; 8]; 8];
    for seq in seqs {
        let states = seq.states();
        for i in 0..states.len() - 1 {
            let from = states[i].code() as usize - 1;
            let to = states[i + 1].code() as usize - 1;
            counts[from][to] += 1;
        }
    }
    counts
}
