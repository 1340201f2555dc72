//! Region-to-region transition matrices over sampled sequences.
//!
//! Counts tally adjacent sample pairs, so self-transitions are included (the
//! duration of a glance shows up as the diagonal mass). Probabilities are
//! per-row normalized counts; a region that never occurs as a source keeps
//! an all-zero probability row.

use thiserror::Error;

use crate::epoch::SampledSequence;
use crate::region::GlanceRegion;

const N: usize = GlanceRegion::COUNT;

/// Adjacent-pair transition tallies and their row-normalized probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionMatrix {
    counts: [[u64; N]; N],
    probs: [[f64; N]; N],
}

impl TransitionMatrix {
    /// Build from raw tallies, normalizing each row with a positive sum.
    pub fn from_counts(counts: [[u64; N]; N]) -> Self {
        let mut probs = [[0.0; N]; N];
        for (row, counts_row) in counts.iter().enumerate() {
            let total: u64 = counts_row.iter().sum();
            if total > 0 {
                for (col, &c) in counts_row.iter().enumerate() {
                    probs[row][col] = c as f64 / total as f64;
                }
            }
        }
        Self { counts, probs }
    }

    pub fn counts(&self) -> &[[u64; N]; N] {
        &self.counts
    }

    pub fn probs(&self) -> &[[f64; N]; N] {
        &self.probs
    }

    pub fn count(&self, from: GlanceRegion, to: GlanceRegion) -> u64 {
        self.counts[from.index()][to.index()]
    }

    pub fn prob(&self, from: GlanceRegion, to: GlanceRegion) -> f64 {
        self.probs[from.index()][to.index()]
    }

    /// Sum of all tallies: `24 × number of sequences`.
    pub fn total_count(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }
}

/// Entry-wise difference of two probability matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct DiffMatrix {
    delta: [[f64; N]; N],
}

impl DiffMatrix {
    pub fn delta(&self) -> &[[f64; N]; N] {
        &self.delta
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("no sequences supplied")]
pub struct EmptyInput;

/// Tally the 24 adjacent pairs of every sequence.
pub fn transition_matrix(seqs: &[SampledSequence]) -> Result<TransitionMatrix, EmptyInput> {
    if seqs.is_empty() {
        return Err(EmptyInput);
    }
    let mut counts = [[0u64; N]; N];
    for seq in seqs {
        for pair in seq.states().windows(2) {
            counts[pair[0].index()][pair[1].index()] += 1;
        }
    }
    Ok(TransitionMatrix::from_counts(counts))
}

/// `a.probs − b.probs`. Rows of the result sum to zero wherever both source
/// rows were normalized.
pub fn matrix_difference(a: &TransitionMatrix, b: &TransitionMatrix) -> DiffMatrix {
    let mut delta = [[0.0; N]; N];
    for (row, (a_row, b_row)) in a.probs.iter().zip(&b.probs).enumerate() {
        for (col, (pa, pb)) in a_row.iter().zip(b_row).enumerate() {
            delta[row][col] = pa - pb;
        }
    }
    DiffMatrix { delta }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::epoch::SEQUENCE_LEN;
    use crate::reference;
    use alloc::vec::Vec;
    use proptest::prelude::*;
    use GlanceRegion::*;

    fn constant_seq(region: GlanceRegion) -> SampledSequence {
        SampledSequence::from_array([region; SEQUENCE_LEN])
    }

    #[test]
    fn all_forward_sequence() {
        let m = transition_matrix(&[constant_seq(Forward)]).expect("non-empty");
        assert_eq!(m.count(Forward, Forward), 24);
        assert_eq!(m.prob(Forward, Forward), 1.0);
        assert_eq!(m.total_count(), 24);
        for from in GlanceRegion::ALL {
            for to in GlanceRegion::ALL {
                if (from, to) != (Forward, Forward) {
                    assert_eq!(m.count(from, to), 0);
                    assert_eq!(m.prob(from, to), 0.0);
                }
            }
        }
    }

    #[test]
    fn rows_are_independent() {
        let m = transition_matrix(&[constant_seq(Forward), constant_seq(Left)]).expect("non-empty");
        assert_eq!(m.prob(Forward, Forward), 1.0);
        assert_eq!(m.prob(Left, Left), 1.0);
        assert_eq!(m.total_count(), 48);
    }

    #[test]
    fn empty_input_rejected() {
        assert_eq!(transition_matrix(&[]), Err(EmptyInput));
    }

    #[test]
    fn difference_of_matrix_with_itself_is_zero() {
        let m = transition_matrix(&[constant_seq(Forward), constant_seq(Left)]).expect("non-empty");
        let d = matrix_difference(&m, &m);
        assert!(d.delta().iter().flatten().all(|&x| x == 0.0));
    }

    #[test]
    fn difference_subtracts_probabilities() {
        // a: forward->forward always; b: forward->forward 0.6, forward->left 0.4
        let mut ca = [[0u64; 8]; 8];
        ca[Forward.index()][Forward.index()] = 10;
        let mut cb = [[0u64; 8]; 8];
        cb[Forward.index()][Forward.index()] = 6;
        cb[Forward.index()][Left.index()] = 4;
        let d = matrix_difference(
            &TransitionMatrix::from_counts(ca),
            &TransitionMatrix::from_counts(cb),
        );
        assert!((d.delta()[Forward.index()][Forward.index()] - 0.4).abs() < 1e-12);
        assert!((d.delta()[Forward.index()][Left.index()] + 0.4).abs() < 1e-12);
    }

    fn arb_seq() -> impl Strategy<Value = SampledSequence> {
        proptest::collection::vec(0usize..8, SEQUENCE_LEN).prop_map(|codes| {
            let states: Vec<GlanceRegion> = codes
                .into_iter()
                .map(|c| GlanceRegion::ALL[c])
                .collect();
            SampledSequence::new(&states).expect("25 states")
        })
    }

    proptest! {
        #[test]
        fn counts_match_naive_tally(seqs in proptest::collection::vec(arb_seq(), 1..12)) {
            let m = transition_matrix(&seqs).expect("non-empty");
            prop_assert_eq!(m.counts(), &reference::tally_transition_counts(&seqs));
            prop_assert_eq!(m.total_count(), 24 * seqs.len() as u64);
        }

        #[test]
        fn rows_normalize_and_diffs_cancel(
            seqs_a in proptest::collection::vec(arb_seq(), 1..8),
            seqs_b in proptest::collection::vec(arb_seq(), 1..8),
        ) {
            let a = transition_matrix(&seqs_a).expect("non-empty");
            let b = transition_matrix(&seqs_b).expect("non-empty");
            for (row, counts_row) in a.counts().iter().enumerate() {
                let total: u64 = counts_row.iter().sum();
                let sum: f64 = a.probs()[row].iter().sum();
                if total > 0 {
                    prop_assert!((sum - 1.0).abs() < 1e-9, "row {} sums to {}", row, sum);
                } else {
                    prop_assert_eq!(sum, 0.0);
                }
            }
            let d = matrix_difference(&a, &b);
            for row in 0..8 {
                let a_pos = a.counts()[row].iter().sum::<u64>() > 0;
                let b_pos = b.counts()[row].iter().sum::<u64>() > 0;
                if a_pos && b_pos {
                    let sum: f64 = d.delta()[row].iter().sum();
                    prop_assert!(sum.abs() < 1e-9, "diff row {} sums to {}", row, sum);
                }
            }
        }
    }
}
