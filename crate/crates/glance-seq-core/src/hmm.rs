//! Discrete-observation hidden Markov models over the eight glance regions.
//!
//! The forward pass uses per-timestep scaling (Rabiner-style), which avoids
//! underflow without paying for a log-sum-exp at every cell; the sequence
//! log-likelihood is the sum of the log scale factors. Baum-Welch runs the
//! scaled forward-backward recursions, re-estimates in probability space,
//! and renormalizes every row each iteration so stochasticity never drifts.
//!
//! Training draws every initial distribution from a symmetric Dirichlet(1)
//! via a seeded ChaCha generator; restart `r` uses `seed + r`, so a given
//! `TrainConfig` always reproduces the same model. After a restart converges,
//! transition and emission entries are clamped to `cfg.floor` and rows are
//! renormalized, so no observation sequence is ever impossible under a
//! trained model. Flooring happens after the EM loop rather than inside it,
//! which keeps the recorded per-iteration log-likelihoods exactly monotone.

use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use thiserror::Error;

use crate::epoch::SampledSequence;
use crate::math;
use crate::region::GlanceRegion;

/// Number of observation symbols; fixed to the glance-region alphabet.
pub const N_OBSERVATIONS: usize = GlanceRegion::COUNT;

/// Tolerance on distribution row sums.
pub const ROW_SUM_TOLERANCE: f64 = 1e-9;

/// A discrete HMM: initial distribution `pi` (length `n`), transition matrix
/// `a` (`n × n`, row-major), emission matrix `b` (`n × 8`, row-major).
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteHmm {
    n_hidden: usize,
    pi: Vec<f64>,
    a: Vec<f64>,
    b: Vec<f64>,
}

/// Ways a parameter set can fail to be a valid model.
#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum ModelError {
    #[error("model must have at least one hidden state")]
    NoHiddenStates,
    #[error("{component} has length {got}, expected {expected}")]
    DimensionMismatch {
        component: &'static str,
        got: usize,
        expected: usize,
    },
    #[error("{component} row {row} is not a distribution (sum {sum})")]
    NotADistribution {
        component: &'static str,
        row: usize,
        sum: f64,
    },
}

impl DiscreteHmm {
    /// Validate dimensions and row stochasticity (`1 ± 1e-9`, entries
    /// non-negative and finite).
    pub fn new(pi: Vec<f64>, a: Vec<f64>, b: Vec<f64>) -> Result<Self, ModelError> {
        let n = pi.len();
        if n == 0 {
            return Err(ModelError::NoHiddenStates);
        }
        if a.len() != n * n {
            return Err(ModelError::DimensionMismatch {
                component: "transition matrix",
                got: a.len(),
                expected: n * n,
            });
        }
        if b.len() != n * N_OBSERVATIONS {
            return Err(ModelError::DimensionMismatch {
                component: "emission matrix",
                got: b.len(),
                expected: n * N_OBSERVATIONS,
            });
        }
        check_rows("pi", &pi, n)?;
        check_rows("transition matrix", &a, n)?;
        check_rows("emission matrix", &b, N_OBSERVATIONS)?;
        Ok(Self { n_hidden: n, pi, a, b })
    }

    pub fn n_hidden(&self) -> usize {
        self.n_hidden
    }

    pub fn pi(&self) -> &[f64] {
        &self.pi
    }

    /// Flat row-major `n × n` transition matrix.
    pub fn transition(&self) -> &[f64] {
        &self.a
    }

    /// Flat row-major `n × 8` emission matrix.
    pub fn emission(&self) -> &[f64] {
        &self.b
    }

    pub fn transition_prob(&self, from: usize, to: usize) -> f64 {
        self.a[from * self.n_hidden + to]
    }

    pub fn emission_prob(&self, state: usize, region: GlanceRegion) -> f64 {
        self.b[state * N_OBSERVATIONS + region.index()]
    }

    /// Reindex hidden states by `perm` (new index `i` takes old state
    /// `perm[i]`). Likelihoods are invariant under this relabeling.
    pub fn permute_states(&self, perm: &[usize]) -> Self {
        assert_eq!(perm.len(), self.n_hidden, "permutation length");
        let n = self.n_hidden;
        let mut pi = vec![0.0; n];
        let mut a = vec![0.0; n * n];
        let mut b = vec![0.0; n * N_OBSERVATIONS];
        for i in 0..n {
            pi[i] = self.pi[perm[i]];
            for j in 0..n {
                a[i * n + j] = self.a[perm[i] * n + perm[j]];
            }
            for k in 0..N_OBSERVATIONS {
                b[i * N_OBSERVATIONS + k] = self.b[perm[i] * N_OBSERVATIONS + k];
            }
        }
        Self { n_hidden: n, pi, a, b }
    }
}

fn check_rows(component: &'static str, flat: &[f64], row_len: usize) -> Result<(), ModelError> {
    for (row, chunk) in flat.chunks(row_len).enumerate() {
        let mut sum = 0.0;
        let mut ok = true;
        for &x in chunk {
            ok &= x.is_finite() && x >= 0.0;
            sum += x;
        }
        if !ok || (sum - 1.0).abs() > ROW_SUM_TOLERANCE {
            return Err(ModelError::NotADistribution { component, row, sum });
        }
    }
    Ok(())
}

/// Baum-Welch settings. Defaults: 8 hidden states, 500 iterations, relative
/// tolerance 1e-6, 5 restarts, probability floor 1e-6.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainConfig {
    pub n_hidden: usize,
    pub max_iters: usize,
    pub rel_tol: f64,
    pub n_restarts: usize,
    pub floor: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            n_hidden: 8,
            max_iters: 500,
            rel_tol: 1e-6,
            n_restarts: 5,
            floor: 1e-6,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn with_seed(self, seed: u64) -> Self {
        Self { seed, ..self }
    }

    pub fn with_hidden(self, n_hidden: usize) -> Self {
        Self { n_hidden, ..self }
    }

    fn validate(&self) -> Result<(), TrainError> {
        let ok = self.n_hidden >= 1
            && self.max_iters >= 1
            && self.rel_tol > 0.0
            && self.n_restarts >= 1
            && self.floor > 0.0
            && self.floor < 1.0 / N_OBSERVATIONS as f64;
        if ok {
            Ok(())
        } else {
            Err(TrainError::InvalidConfig)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum TrainError {
    #[error("training corpus is empty")]
    EmptyInput,
    #[error("training produced a non-finite log-likelihood")]
    NonFiniteLikelihood,
    #[error("invalid training configuration")]
    InvalidConfig,
}

/// Per-restart training record.
#[derive(Debug, Clone, PartialEq)]
pub struct RestartTrace {
    pub seed: u64,
    /// Corpus log-likelihood of the model entering each EM iteration.
    pub log_likelihoods: Vec<f64>,
    /// Corpus log-likelihood of the floored final model.
    pub final_log_likelihood: f64,
}

/// Result of [`baum_welch_train_full`]: the winning model plus traces of
/// every restart.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainOutcome {
    pub model: DiscreteHmm,
    pub chosen_restart: usize,
    pub restarts: Vec<RestartTrace>,
}

/// Sequence log-likelihood via the scaled forward recursion. Returns
/// `f64::NEG_INFINITY` when every hidden path has zero probability; an empty
/// observation slice has log-likelihood 0.
pub fn forward_log_likelihood(model: &DiscreteHmm, obs: &[GlanceRegion]) -> f64 {
    let n = model.n_hidden;
    let Some((&first, rest)) = obs.split_first() else {
        return 0.0;
    };
    let mut alpha = vec![0.0; n];
    let mut next = vec![0.0; n];
    for (i, slot) in alpha.iter_mut().enumerate() {
        *slot = model.pi[i] * model.emission_prob(i, first);
    }
    let mut log_lik = match rescale(&mut alpha) {
        Some(log_c) => log_c,
        None => return f64::NEG_INFINITY,
    };
    for &o in rest {
        let k = o.index();
        for (j, slot) in next.iter_mut().enumerate() {
            let mut acc = 0.0;
            for (i, &a_i) in alpha.iter().enumerate() {
                acc += a_i * model.a[i * n + j];
            }
            *slot = acc * model.b[j * N_OBSERVATIONS + k];
        }
        core::mem::swap(&mut alpha, &mut next);
        match rescale(&mut alpha) {
            Some(log_c) => log_lik += log_c,
            None => return f64::NEG_INFINITY,
        }
    }
    log_lik
}

/// Normalize `row` to sum 1, returning `ln(sum)`; `None` when the sum is not
/// a positive finite number.
fn rescale(row: &mut [f64]) -> Option<f64> {
    let sum: f64 = row.iter().sum();
    if sum <= 0.0 || !sum.is_finite() {
        return None;
    }
    for x in row.iter_mut() {
        *x /= sum;
    }
    Some(math::ln(sum))
}

/// Train a model on a corpus of 25-sample sequences and return the restart
/// with the highest final training log-likelihood.
pub fn baum_welch_train(
    seqs: &[SampledSequence],
    cfg: &TrainConfig,
) -> Result<DiscreteHmm, TrainError> {
    baum_welch_train_full(seqs, cfg).map(|outcome| outcome.model)
}

/// As [`baum_welch_train`], but also returns per-restart iteration traces.
pub fn baum_welch_train_full(
    seqs: &[SampledSequence],
    cfg: &TrainConfig,
) -> Result<TrainOutcome, TrainError> {
    cfg.validate()?;
    if seqs.is_empty() {
        return Err(TrainError::EmptyInput);
    }
    let mut restarts: Vec<RestartTrace> = Vec::with_capacity(cfg.n_restarts);
    let mut best: Option<(usize, DiscreteHmm)> = None;
    for restart in 0..cfg.n_restarts {
        let seed = cfg.seed.wrapping_add(restart as u64);
        let (params, log_likelihoods) = run_restart(seqs, cfg, seed)?;
        let model = params.into_floored_model(cfg.floor);
        let final_ll: f64 = seqs
            .iter()
            .map(|s| forward_log_likelihood(&model, s.states()))
            .sum();
        if !final_ll.is_finite() {
            return Err(TrainError::NonFiniteLikelihood);
        }
        let better = match &best {
            None => true,
            Some((idx, _)) => final_ll > restarts[*idx].final_log_likelihood,
        };
        restarts.push(RestartTrace {
            seed,
            log_likelihoods,
            final_log_likelihood: final_ll,
        });
        if better {
            best = Some((restart, model));
        }
    }
    let (chosen_restart, model) = best.expect("n_restarts >= 1");
    Ok(TrainOutcome {
        model,
        chosen_restart,
        restarts,
    })
}

/// Raw parameters during EM; rows are kept explicitly normalized.
struct Params {
    n: usize,
    pi: Vec<f64>,
    a: Vec<f64>,
    b: Vec<f64>,
}

impl Params {
    fn random(n: usize, rng: &mut ChaCha12Rng) -> Self {
        let pi = dirichlet_row(rng, n);
        let mut a = Vec::with_capacity(n * n);
        let mut b = Vec::with_capacity(n * N_OBSERVATIONS);
        for _ in 0..n {
            a.extend_from_slice(&dirichlet_row(rng, n));
        }
        for _ in 0..n {
            b.extend_from_slice(&dirichlet_row(rng, N_OBSERVATIONS));
        }
        Self { n, pi, a, b }
    }

    /// Clamp transition and emission entries to `floor`, renormalize, and
    /// promote to a checked model.
    fn into_floored_model(mut self, floor: f64) -> DiscreteHmm {
        for row in self.a.chunks_mut(self.n) {
            floor_and_normalize(row, floor);
        }
        for row in self.b.chunks_mut(N_OBSERVATIONS) {
            floor_and_normalize(row, floor);
        }
        normalize(&mut self.pi);
        DiscreteHmm::new(self.pi, self.a, self.b).expect("floored rows are stochastic")
    }
}

fn floor_and_normalize(row: &mut [f64], floor: f64) {
    for x in row.iter_mut() {
        if *x < floor {
            *x = floor;
        }
    }
    normalize(row);
}

fn normalize(row: &mut [f64]) {
    let sum: f64 = row.iter().sum();
    if sum > 0.0 {
        for x in row.iter_mut() {
            *x /= sum;
        }
    } else {
        let uniform = 1.0 / row.len() as f64;
        for x in row.iter_mut() {
            *x = uniform;
        }
    }
}

/// Draw a symmetric Dirichlet(1) row: normalized unit exponentials.
fn dirichlet_row(rng: &mut ChaCha12Rng, len: usize) -> Vec<f64> {
    let mut row: Vec<f64> = (0..len)
        .map(|_| {
            let u: f64 = rng.random();
            (-math::ln(1.0 - u)).max(1e-12)
        })
        .collect();
    normalize(&mut row);
    row
}

/// One seeded EM run. Returns the final (unfloored) parameters and the
/// log-likelihood of the model entering each iteration.
fn run_restart(
    seqs: &[SampledSequence],
    cfg: &TrainConfig,
    seed: u64,
) -> Result<(Params, Vec<f64>), TrainError> {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut params = Params::random(cfg.n_hidden, &mut rng);
    let n = cfg.n_hidden;
    let t_len = crate::epoch::SEQUENCE_LEN;
    let mut history = Vec::new();

    // per-sequence scratch
    let mut alphas = vec![0.0; t_len * n];
    let mut betas = vec![0.0; t_len * n];
    let mut scales = vec![0.0; t_len];

    for _iter in 0..=cfg.max_iters {
        // E-step accumulators
        let mut pi_acc = vec![0.0; n];
        let mut a_num = vec![0.0; n * n];
        let mut a_den = vec![0.0; n];
        let mut b_num = vec![0.0; n * N_OBSERVATIONS];
        let mut b_den = vec![0.0; n];
        let mut total_ll = 0.0;

        for seq in seqs {
            let obs = seq.states();
            total_ll += forward_backward(&params, obs, &mut alphas, &mut betas, &mut scales)?;
            // gamma_t(i) = alpha_hat_t(i) * beta_hat_t(i)
            for t in 0..t_len {
                let k = obs[t].index();
                for i in 0..n {
                    let gamma = alphas[t * n + i] * betas[t * n + i];
                    if t == 0 {
                        pi_acc[i] += gamma;
                    }
                    if t + 1 < t_len {
                        a_den[i] += gamma;
                    }
                    b_num[i * N_OBSERVATIONS + k] += gamma;
                    b_den[i] += gamma;
                }
            }
            // xi_t(i,j) = alpha_hat_t(i) a_ij b_j(o_{t+1}) beta_hat_{t+1}(j) / c_{t+1}
            for t in 0..t_len - 1 {
                let k_next = obs[t + 1].index();
                for i in 0..n {
                    let alpha_i = alphas[t * n + i];
                    for j in 0..n {
                        a_num[i * n + j] += alpha_i
                            * params.a[i * n + j]
                            * params.b[j * N_OBSERVATIONS + k_next]
                            * betas[(t + 1) * n + j]
                            / scales[t + 1];
                    }
                }
            }
        }

        if !total_ll.is_finite() {
            return Err(TrainError::NonFiniteLikelihood);
        }
        let converged = history.last().is_some_and(|&prev: &f64| {
            (total_ll - prev) / prev.abs().max(1e-12) < cfg.rel_tol
        });
        history.push(total_ll);
        if converged || history.len() > cfg.max_iters {
            break;
        }

        // M-step
        for i in 0..n {
            params.pi[i] = pi_acc[i] / seqs.len() as f64;
            if a_den[i] > 0.0 {
                for j in 0..n {
                    params.a[i * n + j] = a_num[i * n + j] / a_den[i];
                }
            }
            if b_den[i] > 0.0 {
                for k in 0..N_OBSERVATIONS {
                    params.b[i * N_OBSERVATIONS + k] = b_num[i * N_OBSERVATIONS + k] / b_den[i];
                }
            }
        }
        // keep rows exactly stochastic; re-estimation only drifts by rounding
        normalize(&mut params.pi);
        for row in params.a.chunks_mut(n) {
            normalize(row);
        }
        for row in params.b.chunks_mut(N_OBSERVATIONS) {
            normalize(row);
        }
    }
    Ok((params, history))
}

/// Scaled forward-backward pass. `alphas`/`betas` receive the scaled
/// variables, `scales` the per-step normalizers; returns the sequence
/// log-likelihood.
fn forward_backward(
    params: &Params,
    obs: &[GlanceRegion],
    alphas: &mut [f64],
    betas: &mut [f64],
    scales: &mut [f64],
) -> Result<f64, TrainError> {
    let n = params.n;
    let t_len = obs.len();
    let mut log_lik = 0.0;

    let first = obs[0].index();
    for (i, slot) in alphas[..n].iter_mut().enumerate() {
        *slot = params.pi[i] * params.b[i * N_OBSERVATIONS + first];
    }
    let mut sum: f64 = alphas[..n].iter().sum();
    if sum <= 0.0 || !sum.is_finite() {
        return Err(TrainError::NonFiniteLikelihood);
    }
    scales[0] = sum;
    log_lik += math::ln(sum);
    for x in alphas[..n].iter_mut() {
        *x /= sum;
    }

    for t in 1..t_len {
        let k = obs[t].index();
        for j in 0..n {
            let mut acc = 0.0;
            for i in 0..n {
                acc += alphas[(t - 1) * n + i] * params.a[i * n + j];
            }
            alphas[t * n + j] = acc * params.b[j * N_OBSERVATIONS + k];
        }
        sum = alphas[t * n..(t + 1) * n].iter().sum();
        if sum <= 0.0 || !sum.is_finite() {
            return Err(TrainError::NonFiniteLikelihood);
        }
        scales[t] = sum;
        log_lik += math::ln(sum);
        for x in alphas[t * n..(t + 1) * n].iter_mut() {
            *x /= sum;
        }
    }

    for i in 0..n {
        betas[(t_len - 1) * n + i] = 1.0;
    }
    for t in (0..t_len - 1).rev() {
        let k_next = obs[t + 1].index();
        for i in 0..n {
            let mut acc = 0.0;
            for j in 0..n {
                acc += params.a[i * n + j]
                    * params.b[j * N_OBSERVATIONS + k_next]
                    * betas[(t + 1) * n + j];
            }
            betas[t * n + i] = acc / scales[t + 1];
        }
    }
    Ok(log_lik)
}

/// Generate `length` observations from a model. Deterministic given `seed`.
pub fn sample_sequence(model: &DiscreteHmm, length: usize, seed: u64) -> Vec<GlanceRegion> {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let n = model.n_hidden;
    let mut out = Vec::with_capacity(length);
    let mut state = 0;
    for step in 0..length {
        state = if step == 0 {
            sample_categorical(&mut rng, model.pi())
        } else {
            sample_categorical(&mut rng, &model.a[state * n..(state + 1) * n])
        };
        let k = sample_categorical(
            &mut rng,
            &model.b[state * N_OBSERVATIONS..(state + 1) * N_OBSERVATIONS],
        );
        out.push(GlanceRegion::from_index(k).expect("emission index in range"));
    }
    out
}

fn sample_categorical(rng: &mut ChaCha12Rng, weights: &[f64]) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (i, &w) in weights.iter().enumerate() {
        acc += w;
        if u < acc {
            return i;
        }
    }
    weights.len() - 1 // rounding leftover
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::epoch::SEQUENCE_LEN;
    use crate::reference;
    use proptest::prelude::*;
    use GlanceRegion::*;

    /// One hidden state that always emits `region`.
    fn certain_model(region: GlanceRegion) -> DiscreteHmm {
        let mut b = vec![0.0; N_OBSERVATIONS];
        b[region.index()] = 1.0;
        DiscreteHmm::new(vec![1.0], vec![1.0], b).expect("valid")
    }

    fn two_state_model() -> DiscreteHmm {
        DiscreteHmm::new(
            vec![0.7, 0.3],
            vec![0.8, 0.2, 0.35, 0.65],
            vec![
                0.3, 0.1, 0.1, 0.1, 0.1, 0.2, 0.05, 0.05, //
                0.02, 0.3, 0.08, 0.1, 0.1, 0.1, 0.1, 0.2,
            ],
        )
        .expect("valid")
    }

    #[test]
    fn certain_sequence_has_zero_log_likelihood() {
        let model = certain_model(Forward);
        let obs = [Forward; SEQUENCE_LEN];
        assert_eq!(forward_log_likelihood(&model, &obs), 0.0);
    }

    #[test]
    fn impossible_observation_yields_neg_infinity() {
        let model = certain_model(Forward);
        let obs = [Forward, Left, Forward];
        assert_eq!(forward_log_likelihood(&model, &obs), f64::NEG_INFINITY);
    }

    #[test]
    fn forward_matches_path_enumeration_on_prefix() {
        let model = two_state_model();
        let obs = [Forward, CenterStack, Forward];
        let fast = forward_log_likelihood(&model, &obs);
        let slow = reference::enumerate_log_likelihood(&model, &obs);
        assert!((fast - slow).abs() < 1e-8, "fast {fast} vs enumerated {slow}");
    }

    #[test]
    fn invalid_models_rejected() {
        assert_eq!(
            DiscreteHmm::new(vec![], vec![], vec![]),
            Err(ModelError::NoHiddenStates)
        );
        assert!(matches!(
            DiscreteHmm::new(vec![1.0], vec![1.0, 0.0], vec![0.125; 8]),
            Err(ModelError::DimensionMismatch { .. })
        ));
        assert!(matches!(
            DiscreteHmm::new(vec![0.5, 0.6], vec![0.5; 4], vec![0.125; 16]),
            Err(ModelError::NotADistribution { component: "pi", .. })
        ));
    }

    #[test]
    fn degenerate_corpus_concentrates_emissions() {
        let seqs = vec![SampledSequence::from_array([Forward; SEQUENCE_LEN]); 8];
        let cfg = TrainConfig {
            n_hidden: 3,
            max_iters: 50,
            n_restarts: 2,
            seed: 7,
            ..TrainConfig::default()
        };
        let model = baum_welch_train(&seqs, &cfg).expect("trains");
        for state in 0..model.n_hidden() {
            let p = model.emission_prob(state, Forward);
            assert!(
                p >= 1.0 - 8.0 * cfg.floor,
                "state {state} emits forward with {p}"
            );
        }
    }

    #[test]
    fn training_log_likelihood_is_monotone_per_restart() {
        let true_model = two_state_model();
        let seqs: Vec<SampledSequence> = (0..20)
            .map(|i| {
                SampledSequence::new(&sample_sequence(&true_model, SEQUENCE_LEN, 100 + i))
                    .expect("length 25")
            })
            .collect();
        let cfg = TrainConfig {
            n_hidden: 2,
            max_iters: 80,
            n_restarts: 3,
            seed: 11,
            ..TrainConfig::default()
        };
        let outcome = baum_welch_train_full(&seqs, &cfg).expect("trains");
        assert_eq!(outcome.restarts.len(), 3);
        for trace in &outcome.restarts {
            for pair in trace.log_likelihoods.windows(2) {
                assert!(
                    pair[1] >= pair[0] - 1e-9,
                    "restart {} dipped: {} -> {}",
                    trace.seed,
                    pair[0],
                    pair[1]
                );
            }
        }
    }

    #[test]
    fn recovers_near_disjoint_two_state_model() {
        // near-disjoint emissions: state 0 lives on {forward, instrument},
        // state 1 on {center_stack, left}
        let truth = DiscreteHmm::new(
            vec![0.5, 0.5],
            vec![0.9, 0.1, 0.1, 0.9],
            vec![
                0.01, 0.01, 0.01, 0.01, 0.01, 0.75, 0.19, 0.01, //
                0.01, 0.55, 0.01, 0.01, 0.01, 0.01, 0.01, 0.39,
            ],
        )
        .expect("valid");
        let seqs: Vec<SampledSequence> = (0..200)
            .map(|i| {
                SampledSequence::new(&sample_sequence(&truth, SEQUENCE_LEN, 9000 + i))
                    .expect("length 25")
            })
            .collect();
        let cfg = TrainConfig {
            n_hidden: 2,
            max_iters: 200,
            n_restarts: 3,
            seed: 5,
            ..TrainConfig::default()
        };
        let trained = baum_welch_train(&seqs, &cfg).expect("trains");
        let ll_truth: f64 = seqs
            .iter()
            .map(|s| forward_log_likelihood(&truth, s.states()))
            .sum();
        let ll_trained: f64 = seqs
            .iter()
            .map(|s| forward_log_likelihood(&trained, s.states()))
            .sum();
        // trained fit should be within 1% of the generating model's fit
        assert!(
            ll_trained >= ll_truth - 0.01 * ll_truth.abs(),
            "trained {ll_trained} vs truth {ll_truth}"
        );
    }

    #[test]
    fn training_is_deterministic_given_seed() {
        let seqs = vec![
            SampledSequence::from_array([Forward; SEQUENCE_LEN]),
            SampledSequence::from_array([Left; SEQUENCE_LEN]),
            SampledSequence::from_array([CenterStack; SEQUENCE_LEN]),
        ];
        let cfg = TrainConfig {
            n_hidden: 2,
            max_iters: 30,
            n_restarts: 2,
            seed: 42,
            ..TrainConfig::default()
        };
        let a = baum_welch_train(&seqs, &cfg).expect("trains");
        let b = baum_welch_train(&seqs, &cfg).expect("trains");
        assert_eq!(a, b);
    }

    #[test]
    fn empty_corpus_rejected() {
        assert_eq!(
            baum_welch_train(&[], &TrainConfig::default()),
            Err(TrainError::EmptyInput)
        );
    }

    #[test]
    fn one_hot_model_forces_unique_sequence() {
        // two states ping-ponging deterministically between forward and left
        let model = DiscreteHmm::new(
            vec![1.0, 0.0],
            vec![0.0, 1.0, 1.0, 0.0],
            {
                let mut b = vec![0.0; 16];
                b[Forward.index()] = 1.0;
                b[8 + Left.index()] = 1.0;
                b
            },
        )
        .expect("valid");
        let seq = sample_sequence(&model, 6, 123);
        assert_eq!(seq, vec![Forward, Left, Forward, Left, Forward, Left]);
    }

    #[test]
    fn sampling_matches_emission_frequencies() {
        let mut b = vec![0.0; 8];
        b[Forward.index()] = 0.7;
        b[Left.index()] = 0.3;
        let model = DiscreteHmm::new(vec![1.0], vec![1.0], b).expect("valid");
        let n = 100_000;
        let mut forward_count = 0u32;
        for i in 0..n {
            if sample_sequence(&model, 1, i)[0] == Forward {
                forward_count += 1;
            }
        }
        let freq = f64::from(forward_count) / n as f64;
        assert!((freq - 0.7).abs() < 0.01, "forward frequency {freq}");
    }

    #[test]
    fn sampling_is_deterministic() {
        let model = two_state_model();
        assert_eq!(
            sample_sequence(&model, 25, 999),
            sample_sequence(&model, 25, 999)
        );
    }

    fn arb_model(max_hidden: usize) -> impl Strategy<Value = DiscreteHmm> {
        (1..=max_hidden).prop_flat_map(|n| {
            let raw =
                proptest::collection::vec(1e-3f64..1.0, n + n * n + n * N_OBSERVATIONS);
            raw.prop_map(move |vals| {
                let mut pi = vals[..n].to_vec();
                let mut a = vals[n..n + n * n].to_vec();
                let mut b = vals[n + n * n..].to_vec();
                normalize(&mut pi);
                for row in a.chunks_mut(n) {
                    normalize(row);
                }
                for row in b.chunks_mut(N_OBSERVATIONS) {
                    normalize(row);
                }
                DiscreteHmm::new(pi, a, b).expect("normalized")
            })
        })
    }

    fn arb_obs(max_len: usize) -> impl Strategy<Value = Vec<GlanceRegion>> {
        proptest::collection::vec(0usize..8, 1..=max_len)
            .prop_map(|v| v.into_iter().map(|i| GlanceRegion::ALL[i]).collect())
    }

    proptest! {
        #[test]
        fn forward_matches_enumeration(model in arb_model(3), obs in arb_obs(6)) {
            let fast = forward_log_likelihood(&model, &obs);
            let slow = reference::enumerate_log_likelihood(&model, &obs);
            prop_assert!((fast - slow).abs() < 1e-8, "fast {} slow {}", fast, slow);
        }

        #[test]
        fn likelihoods_normalize_over_all_sequences(model in arb_model(3)) {
            // sum over all 8^2 sequences of length 2
            let mut total = 0.0;
            for a in GlanceRegion::ALL {
                for b in GlanceRegion::ALL {
                    total += math::exp(forward_log_likelihood(&model, &[a, b]));
                }
            }
            prop_assert!((total - 1.0).abs() < 1e-6, "total probability {}", total);
        }

        #[test]
        fn permuting_hidden_states_preserves_likelihood(
            model in arb_model(3),
            obs in arb_obs(8),
            rotate in 0usize..3,
        ) {
            let n = model.n_hidden();
            let perm: Vec<usize> = (0..n).map(|i| (i + rotate) % n).collect();
            let permuted = model.permute_states(&perm);
            let original = forward_log_likelihood(&model, &obs);
            let relabeled = forward_log_likelihood(&permuted, &obs);
            prop_assert!(
                (original - relabeled).abs() <= 1e-9,
                "original {} relabeled {}",
                original,
                relabeled
            );
        }
    }
}
