//! End-to-end checks through the public API: events in, predictions out.

use std::collections::BTreeMap;

use glance_seq_core::classifier::balance_classes;
use glance_seq_core::hmm::baum_welch_train_full;
use glance_seq_core::{
    classify, information_loss, resample_epoch, sample_sequence, sliding_window_classify,
    train_binary, ChosenClass, Epoch, GlanceEvent, GlanceRegion, SampledSequence, SmoteConfig,
    TrainConfig, SEQUENCE_LEN,
};

fn seq_from(model: &glance_seq_core::DiscreteHmm, seed: u64) -> SampledSequence {
    SampledSequence::new(&sample_sequence(model, SEQUENCE_LEN, seed)).expect("length 25")
}

fn sticky_model(primary: GlanceRegion, secondary: GlanceRegion) -> glance_seq_core::DiscreteHmm {
    let mut b = [vec![0.01; 8], vec![0.01; 8]];
    b[0][primary.index()] = 0.93;
    b[1][secondary.index()] = 0.93;
    glance_seq_core::DiscreteHmm::new(
        vec![0.5, 0.5],
        vec![0.9, 0.1, 0.1, 0.9],
        b.concat(),
    )
    .expect("valid model")
}

#[test]
fn train_and_classify_synthetic_classes() {
    let gen_1 = sticky_model(GlanceRegion::Forward, GlanceRegion::InstrumentCluster);
    let gen_2 = sticky_model(GlanceRegion::CenterStack, GlanceRegion::Left);
    let class1: Vec<SampledSequence> = (0..80).map(|i| seq_from(&gen_1, i)).collect();
    let class2: Vec<SampledSequence> = (0..50).map(|i| seq_from(&gen_2, 10_000 + i)).collect();

    let cfg = TrainConfig {
        n_hidden: 2,
        max_iters: 100,
        n_restarts: 2,
        seed: 3,
        ..TrainConfig::default()
    };
    let smote = SmoteConfig::default().with_seed(8);

    let (b1, b2) = balance_classes(&class1, &class2, &smote).expect("balances");
    assert_eq!(b1.len(), b2.len());

    let clf = train_binary("synthetic", ("one", "two"), &class1, &class2, &cfg, &smote)
        .expect("trains");
    let mut correct = 0;
    let total = 60;
    for i in 0..total {
        let (probe, want) = if i % 2 == 0 {
            (seq_from(&gen_1, 77_000 + i), ChosenClass::Class1)
        } else {
            (seq_from(&gen_2, 88_000 + i), ChosenClass::Class2)
        };
        if classify(&clf, &probe).chosen_class == want {
            correct += 1;
        }
    }
    assert!(correct >= 55, "only {correct}/{total} held-out probes correct");
}

#[test]
fn restart_traces_expose_monotone_likelihoods() {
    let gen = sticky_model(GlanceRegion::Forward, GlanceRegion::Left);
    let seqs: Vec<SampledSequence> = (0..30).map(|i| seq_from(&gen, 500 + i)).collect();
    let cfg = TrainConfig {
        n_hidden: 3,
        max_iters: 60,
        n_restarts: 2,
        seed: 19,
        ..TrainConfig::default()
    };
    let outcome = baum_welch_train_full(&seqs, &cfg).expect("trains");
    assert!(outcome.chosen_restart < cfg.n_restarts);
    for trace in &outcome.restarts {
        assert!(!trace.log_likelihoods.is_empty());
        assert!(trace.log_likelihoods.len() <= cfg.max_iters + 1);
        for pair in trace.log_likelihoods.windows(2) {
            assert!(pair[1] >= pair[0] - 1e-9);
        }
    }
    // the chosen restart has the best floored likelihood
    let best = outcome
        .restarts
        .iter()
        .map(|t| t.final_log_likelihood)
        .fold(f64::NEG_INFINITY, f64::max);
    assert_eq!(
        outcome.restarts[outcome.chosen_restart].final_log_likelihood,
        best
    );
}

#[test]
fn stream_replay_matches_epoch_classification() {
    // a stream built by tiling one epoch's events should classify each
    // window like the epoch itself once the window aligns with the tiling
    let events = vec![
        GlanceEvent::new(GlanceRegion::Forward, 0),
        GlanceEvent::new(GlanceRegion::CenterStack, 1000),
        GlanceEvent::new(GlanceRegion::Forward, 3000),
    ];
    let epoch = Epoch::new("tile", events.clone(), BTreeMap::new()).expect("valid");
    let seq = resample_epoch(&epoch);
    assert_eq!(information_loss(&epoch, &seq), 0.0);

    let mut stream = Vec::new();
    for rep in 0..3u64 {
        for e in &events {
            stream.push(GlanceEvent::new(e.region, rep * 6000 + e.t_ms));
        }
    }
    let class1 = vec![seq; 6];
    let class2 = vec![SampledSequence::from_array([GlanceRegion::Left; SEQUENCE_LEN]); 6];
    let cfg = TrainConfig {
        n_hidden: 2,
        max_iters: 40,
        n_restarts: 1,
        seed: 2,
        ..TrainConfig::default()
    };
    let clf = train_binary("tiled", ("a", "b"), &class1, &class2, &cfg, &SmoteConfig::default())
        .expect("trains");
    let emissions = sliding_window_classify(&stream, &clf, 6000, 0.0).expect("valid stream");
    assert_eq!(emissions.len(), 2);
    for e in &emissions {
        assert_eq!(e.prediction.chosen_class, ChosenClass::Class1);
    }
}
