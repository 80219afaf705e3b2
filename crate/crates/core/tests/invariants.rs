use std::sync::Arc;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use smoothlab::adversary::AdversarySpec;
use smoothlab::domain::{validate_smooth, ExampleMultiset, LabeledExample, LossKind, LossSpec};
use smoothlab::harness::{
    fit_points, run_experiment, run_game, ClassSpec, ExperimentConfig, RunOptions, SCHEMA_VERSION,
};
use smoothlab::learner::{playout_prediction, LearnerSpec};
use smoothlab::oracle::{Oracle, TiePolicy};
use smoothlab::verify::{monotonicity_check, random_monotonicity_instance};

fn sign(b: bool) -> f64 {
    if b {
        1.0
    } else {
        -1.0
    }
}

fn config(
    learner: LearnerSpec,
    adversary: AdversarySpec,
    horizon: usize,
    loss: LossKind,
) -> ExperimentConfig {
    ExperimentConfig {
        schema_version: SCHEMA_VERSION,
        experiment_id: "invariants".to_string(),
        learner,
        adversary,
        class: ClassSpec::Partition {
            domain_size: 8,
            d: 2,
        },
        horizon,
        sigma: 0.5,
        k: Some(2),
        d: None,
        n: None,
        c_k: 100.0,
        tie: TiePolicy::LowestIndex,
        loss,
        seeds: vec![0],
        output: None,
        record_wall_time: false,
        sweep: None,
    }
}

fn learner_case(i: usize) -> (LearnerSpec, AdversarySpec, LossKind) {
    match i % 5 {
        0 => (
            LearnerSpec::Ftl {},
            AdversarySpec::RealizableSmooth { delta: Some(0.2) },
            LossKind::BinaryIndicator,
        ),
        1 => (
            LearnerSpec::PoissonFtpl {},
            AdversarySpec::SupportAlternating {},
            LossKind::BinaryIndicator,
        ),
        2 => (
            LearnerSpec::SmoothedPlayout {
                max_hints_per_round: None,
            },
            AdversarySpec::RealizableSmooth { delta: Some(0.2) },
            LossKind::Absolute,
        ),
        3 => (
            LearnerSpec::TransductivePlayout {},
            AdversarySpec::TransductiveCyclic { delta: Some(0.2) },
            LossKind::Absolute,
        ),
        _ => (
            LearnerSpec::Hedge { eta: None },
            AdversarySpec::RealizableSmooth { delta: None },
            LossKind::Absolute,
        ),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn absolute_loss_is_half_plus_centered(y_hat in -1.0f64..=1.0, plus in any::<bool>()) {
        let y = sign(plus);
        let abs = LossSpec::absolute().value(y_hat, y);
        let centered = LossSpec::centered_binary().value(y_hat, y);
        prop_assert!((abs - (0.5 + centered)).abs() <= 1e-15);
    }

    #[test]
    fn absolute_loss_is_convex(a in -1.0f64..=1.0, b in -1.0f64..=1.0, w in 0.0f64..=1.0, plus in any::<bool>()) {
        let loss = LossSpec::absolute();
        let y = sign(plus);
        let mid = loss.value(w * a + (1.0 - w) * b, y);
        prop_assert!(mid <= w * loss.value(a, y) + (1.0 - w) * loss.value(b, y) + 1e-15);
    }

    #[test]
    fn smoothness_matches_atom_cap(weights in prop::collection::vec(0.01f64..1.0, 1..12), sigma in 0.05f64..=1.0) {
        let total: f64 = weights.iter().sum();
        let probs: Vec<f64> = weights.iter().map(|w| w / total).collect();
        let max = probs.iter().copied().fold(0.0, f64::max);
        let cap = 1.0 / (sigma * probs.len() as f64);
        let smooth = validate_smooth(&probs, sigma).unwrap();
        if max <= cap * (1.0 - 1e-9) {
            prop_assert!(smooth);
        }
        if max >= cap * (1.0 + 1e-6) {
            prop_assert!(!smooth);
        }
    }

    #[test]
    fn rademacher_monotonicity_holds(seed in any::<u64>(), index in 0usize..64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let inst = random_monotonicity_instance(&mut rng, index).unwrap();
        let report = monotonicity_check(&inst.class, &inst.z, &inst.phi, inst.x).unwrap();
        prop_assert!(report.passed, "{}", report.detail);
    }

    #[test]
    fn playout_prediction_in_range(seed in any::<u64>(), hints in prop::collection::vec((0usize..8, any::<bool>()), 0..24),
                                   history in prop::collection::vec((0usize..8, -1.0f64..=1.0), 0..10), x in 0usize..8) {
        let class = Arc::new(ClassSpec::Partition { domain_size: 8, d: 2 }.build().unwrap());
        let mut oracle = Oracle::new(class);
        let mut h = ExampleMultiset::new();
        for (z, y) in history {
            h.push(z, y);
        }
        let mut s = ExampleMultiset::new();
        for (z, plus) in hints {
            s.insert(LabeledExample::new(z, sign(plus)), 2);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let y_hat = playout_prediction(&mut oracle, &h, &s, x, &LossSpec::absolute(), TiePolicy::SeededRandom, &mut rng).unwrap();
        prop_assert!(y_hat.abs() <= 1.0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn regret_identity_from_raw_rounds(case in 0usize..5, seed in 0u64..1000, horizon in 1usize..24) {
        let (learner, adversary, loss_kind) = learner_case(case);
        let cfg = config(learner, adversary, horizon, loss_kind);
        let tr = run_game(&cfg, seed).unwrap();
        let loss = LossSpec::new(loss_kind);
        prop_assert_eq!(tr.rounds.len(), horizon);
        let total: f64 = tr.rounds.iter().map(|r| r.loss).sum();
        for r in &tr.rounds {
            prop_assert_eq!(r.loss, loss.value(r.y_hat, r.y));
            prop_assert_eq!(r.commitment.len(), 64);
        }
        let class = cfg.class.build().unwrap();
        let bih = class
            .hypotheses()
            .iter()
            .map(|h| tr.rounds.iter().map(|r| loss.value(h.at(r.x), r.y)).sum::<f64>())
            .fold(f64::INFINITY, f64::min);
        prop_assert!((tr.total_loss - total).abs() <= 1e-9);
        prop_assert!((tr.bih_loss - bih).abs() <= 1e-9);
        prop_assert!((tr.regret - (total - bih)).abs() <= 1e-9);
        prop_assert_eq!(tr.final_oracle.call_count, 1);
    }

    #[test]
    fn aggregate_mean_is_arithmetic_mean(case in 0usize..5, seeds in prop::collection::btree_set(0u64..500, 1..6)) {
        let (learner, adversary, loss_kind) = learner_case(case);
        let mut cfg = config(learner, adversary, 12, loss_kind);
        cfg.seeds = seeds.into_iter().collect();
        let out = run_experiment(&cfg, RunOptions::default()).unwrap();
        let (agg, data) = out.rows.split_last().unwrap();
        prop_assert!(agg.is_aggregate());
        prop_assert_eq!(data.len(), cfg.seeds.len());
        let mean = data.iter().map(|r| r.regret).sum::<f64>() / data.len() as f64;
        prop_assert!((agg.regret - mean).abs() <= 1e-12);
    }

    #[test]
    fn fit_recovers_power_law(alpha in 0.2f64..1.2, scale in 0.5f64..5.0) {
        let points: Vec<(usize, f64)> = [64usize, 128, 256, 512].iter().map(|&t| (t, scale * (t as f64).powf(alpha))).collect();
        let fit = fit_points(&points).unwrap();
        prop_assert!((fit.alpha - alpha).abs() <= 1e-9);
        prop_assert!((fit.r_squared - 1.0).abs() <= 1e-9);
    }
}
