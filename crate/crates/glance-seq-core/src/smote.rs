//! Minority oversampling for fixed-length categorical sequences.
//!
//! Classic SMOTE interpolates real-valued vectors; glance sequences are
//! categorical, so interpolation is replaced by per-position symbol mixing.
//! Each synthetic sequence is built from a base sample `x` (minority members
//! are visited in index order until the deficit is filled) and one of its
//! `k` nearest neighbors `z` under Hamming distance (ties broken by input
//! index). A single mixing weight `λ ~ Uniform(0,1)` is drawn per synthetic
//! sequence; every position then takes `z`'s symbol with probability `λ` and
//! `x`'s otherwise. The output therefore lies "between" `x` and `z`: it can
//! only differ from `x` where `z` does.

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use thiserror::Error;

use crate::epoch::SampledSequence;

/// SMOTE settings. Default: 5 neighbors.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SmoteConfig {
    pub k_neighbors: usize,
    pub seed: u64,
}

impl Default for SmoteConfig {
    fn default() -> Self {
        Self {
            k_neighbors: 5,
            seed: 0,
        }
    }
}

impl SmoteConfig {
    pub fn with_seed(self, seed: u64) -> Self {
        Self { seed, ..self }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum SmoteError {
    #[error("minority class is empty")]
    EmptyMinority,
    #[error("target count {target} is below the minority size {minority}")]
    TargetBelowMinority { target: usize, minority: usize },
    #[error("k_neighbors must be at least 1")]
    InvalidNeighborCount,
}

/// Number of positions at which two sequences differ (0..=25).
pub fn hamming_distance(a: &SampledSequence, b: &SampledSequence) -> usize {
    a.states()
        .iter()
        .zip(b.states())
        .filter(|(x, z)| x != z)
        .count()
}

/// Generate `target_count - minority.len()` synthetic sequences.
///
/// When the minority has at most `k_neighbors` members, every other member
/// serves as the neighbor pool; a singleton minority is replicated verbatim.
/// Deterministic given `cfg.seed`.
pub fn smote_oversample(
    minority: &[SampledSequence],
    target_count: usize,
    cfg: &SmoteConfig,
) -> Result<Vec<SampledSequence>, SmoteError> {
    if minority.is_empty() {
        return Err(SmoteError::EmptyMinority);
    }
    if cfg.k_neighbors == 0 {
        return Err(SmoteError::InvalidNeighborCount);
    }
    if target_count < minority.len() {
        return Err(SmoteError::TargetBelowMinority {
            target: target_count,
            minority: minority.len(),
        });
    }
    let deficit = target_count - minority.len();
    let mut synthetic = Vec::with_capacity(deficit);
    if deficit == 0 {
        return Ok(synthetic);
    }
    if minority.len() == 1 {
        synthetic.resize(deficit, minority[0]);
        return Ok(synthetic);
    }

    let pool_size = cfg.k_neighbors.min(minority.len() - 1);
    let neighbors = neighbor_table(minority, pool_size);
    let mut rng = ChaCha12Rng::seed_from_u64(cfg.seed);
    for visit in 0..deficit {
        let base_idx = visit % minority.len();
        let pool = &neighbors[base_idx];
        let neighbor_idx = pool[rng.random_range(0..pool.len())];
        let base = minority[base_idx].states();
        let neighbor = minority[neighbor_idx].states();
        let lambda: f64 = rng.random();
        let mut states = *base;
        for (slot, &z) in states.iter_mut().zip(neighbor.iter()) {
            let u: f64 = rng.random();
            if u < lambda {
                *slot = z;
            }
        }
        synthetic.push(SampledSequence::from_array(states));
    }
    Ok(synthetic)
}

/// For every minority member, the indices of its `pool_size` nearest
/// neighbors by Hamming distance, ties broken by lower input index.
fn neighbor_table(minority: &[SampledSequence], pool_size: usize) -> Vec<Vec<usize>> {
    minority
        .iter()
        .enumerate()
        .map(|(i, seq)| {
            let mut ranked: Vec<(usize, usize)> = minority
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(j, other)| (hamming_distance(seq, other), j))
                .collect();
            ranked.sort_unstable();
            ranked.truncate(pool_size);
            ranked.into_iter().map(|(_, j)| j).collect()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::epoch::SEQUENCE_LEN;
    use crate::region::GlanceRegion;
    use alloc::vec;
    use proptest::prelude::*;
    use GlanceRegion::*;

    fn constant_seq(region: GlanceRegion) -> SampledSequence {
        SampledSequence::from_array([region; SEQUENCE_LEN])
    }

    fn seq_with(region: GlanceRegion, positions: &[usize]) -> SampledSequence {
        let mut states = [Forward; SEQUENCE_LEN];
        for &p in positions {
            states[p] = region;
        }
        SampledSequence::from_array(states)
    }

    #[test]
    fn hamming_basics() {
        let a = constant_seq(Forward);
        assert_eq!(hamming_distance(&a, &a), 0);
        assert_eq!(hamming_distance(&a, &seq_with(Left, &[0])), 1);
        assert_eq!(hamming_distance(&a, &constant_seq(Left)), 25);
    }

    #[test]
    fn no_deficit_means_no_synthetics() {
        let minority = vec![constant_seq(Forward), constant_seq(Left)];
        let out = smote_oversample(&minority, 2, &SmoteConfig::default()).expect("valid");
        assert!(out.is_empty());
    }

    #[test]
    fn identical_minority_yields_identical_synthetics() {
        let minority = vec![constant_seq(Forward); 3];
        let out = smote_oversample(&minority, 10, &SmoteConfig::default()).expect("valid");
        assert_eq!(out.len(), 7);
        assert!(out.iter().all(|s| s == &constant_seq(Forward)));
    }

    #[test]
    fn singleton_minority_is_replicated() {
        let minority = vec![seq_with(CenterStack, &[3, 4])];
        let out = smote_oversample(&minority, 4, &SmoteConfig::default()).expect("valid");
        assert_eq!(out, vec![minority[0]; 3]);
    }

    #[test]
    fn errors_are_reported() {
        assert_eq!(
            smote_oversample(&[], 5, &SmoteConfig::default()),
            Err(SmoteError::EmptyMinority)
        );
        let minority = vec![constant_seq(Forward); 4];
        assert_eq!(
            smote_oversample(&minority, 3, &SmoteConfig::default()),
            Err(SmoteError::TargetBelowMinority { target: 3, minority: 4 })
        );
    }

    #[test]
    fn same_seed_reproduces_output() {
        let minority = vec![
            constant_seq(Forward),
            constant_seq(Left),
            seq_with(Left, &[0, 1, 2]),
            seq_with(CenterStack, &[10, 11]),
        ];
        let cfg = SmoteConfig::default().with_seed(77);
        let a = smote_oversample(&minority, 20, &cfg).expect("valid");
        let b = smote_oversample(&minority, 20, &cfg).expect("valid");
        assert_eq!(a, b);
    }

    fn arb_minority() -> impl Strategy<Value = Vec<SampledSequence>> {
        proptest::collection::vec(
            proptest::collection::vec(0usize..8, SEQUENCE_LEN),
            1..8,
        )
        .prop_map(|rows| {
            rows.into_iter()
                .map(|codes| {
                    let states: Vec<GlanceRegion> =
                        codes.into_iter().map(|c| GlanceRegion::ALL[c]).collect();
                    SampledSequence::new(&states).expect("25 states")
                })
                .collect()
        })
    }

    proptest! {
        #[test]
        fn synthetics_stay_between_parents(
            minority in arb_minority(),
            extra in 1usize..20,
            seed in 0u64..1000,
        ) {
            let target = minority.len() + extra;
            let cfg = SmoteConfig { k_neighbors: 3, seed };
            let out = smote_oversample(&minority, target, &cfg).expect("valid");
            prop_assert_eq!(out.len(), extra);
            for (visit, synth) in out.iter().enumerate() {
                let base = &minority[visit % minority.len()];
                // every position must come from the base or from some
                // minority member, and the base-distance bound must hold
                // against at least one neighbor
                let bounded = minority.iter().enumerate().any(|(j, z)| {
                    j != visit % minority.len()
                        && synth.states().iter().zip(base.states().iter().zip(z.states()))
                            .all(|(&s, (&x, &zz))| s == x || s == zz)
                        && hamming_distance(synth, base) <= hamming_distance(base, z)
                }) || synth == base;
                prop_assert!(bounded, "synthetic {} not between parents", visit);
            }
        }
    }
}
