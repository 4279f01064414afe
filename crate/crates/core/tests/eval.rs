use std::collections::BTreeMap;

use ganaug::data::{generate_phantom_dataset, Label, Patch, PatchPool, PhantomConfig, Source, TrainingSet};
use ganaug::eval::{
    emit_report, evaluate_strategy, predict, prepare_repetition, read_results_csv, render_f1_plot,
    run_matrix, summarize, train_classifier, ClassifierConfig, ConfusionCounts, DataPools,
    ExperimentMatrixConfig, MetricsRecord, StrategyId,
};
use ganaug::gan::{GanTrainConfig, LatentSpec};
use ganaug::Error;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn tiny_matrix(k_values: Vec<usize>) -> ExperimentMatrixConfig {
    ExperimentMatrixConfig {
        k_values,
        imbalance_ratio: 2,
        classifier: ClassifierConfig { epochs: 1, batch_size: 16, patience: 1, base_channels: Some(8), ..Default::default() },
        gan: GanTrainConfig {
            epochs: 1,
            batch_size: 4,
            base_channels: Some(8),
            latent: LatentSpec { dim: 8, ..Default::default() },
            ..Default::default()
        },
        master_seed: 77,
        ..Default::default()
    }
}

fn tiny_pools(cfg: &ExperimentMatrixConfig) -> DataPools {
    let pool = generate_phantom_dataset(&PhantomConfig { n_positive: 20, n_negative: 40, seed: 6, ..Default::default() }).unwrap();
    DataPools::from_pool(&pool, cfg.split_fractions, cfg.master_seed).unwrap()
}

#[test]
fn full_matrix_cardinality_and_cell_independence() {
    let cfg = tiny_matrix(vec![1, 2, 3, 4, 5, 6]);
    let pools = tiny_pools(&cfg);
    assert_eq!(pools, tiny_pools(&cfg));
    let run = run_matrix(&cfg, &pools, 1).unwrap();
    assert_eq!(run.records.len(), 72);
    assert_eq!(run.gan_logs.len(), 3);
    let keys: Vec<_> = run.records.iter().map(MetricsRecord::sort_key).collect();
    let mut sorted = keys.clone();
    sorted.sort();
    assert_eq!(keys, sorted);
    for r in &run.records {
        assert_eq!(r.confusion.total() as usize, pools.test.len());
        assert_eq!(r.threshold, 0.5);
        let expected = if r.precision + r.recall == 0.0 { 0.0 } else { 2.0 * r.precision * r.recall / (r.precision + r.recall) };
        assert!((r.f1 - expected).abs() < 1e-12);
    }

    // recomputing one cell from scratch reproduces its record
    let ctx = prepare_repetition(&cfg, &pools, 2).unwrap();
    let again = evaluate_strategy(&cfg, &pools, &ctx, StrategyId::AugGan, 4).unwrap();
    let stored = run.records.iter().find(|r| r.sort_key() == (StrategyId::AugGan, 4, 2)).unwrap();
    assert_eq!(&again, stored);
    assert_eq!(again.confusion, stored.confusion);

    let summary = summarize(&run.records);
    assert_eq!(summary.len(), 24);
    assert!(summary.iter().all(|s| s.n == 3));
}

#[test]
fn matrix_is_invariant_to_parallel_execution() {
    let cfg = ExperimentMatrixConfig { repetitions: 2, ..tiny_matrix(vec![2, 5]) };
    let pools = tiny_pools(&cfg);
    let serial = run_matrix(&cfg, &pools, 1).unwrap();
    let parallel = run_matrix(&cfg, &pools, 3).unwrap();
    assert_eq!(serial.records, parallel.records);
}

#[test]
fn matrix_rejects_infeasible_configs() {
    let cfg = tiny_matrix(vec![1, 50]);
    let pools = tiny_pools(&tiny_matrix(vec![1]));
    assert!(matches!(run_matrix(&cfg, &pools, 1), Err(Error::InvalidInput(_))));
    assert!(run_matrix(&ExperimentMatrixConfig { repetitions: 0, ..tiny_matrix(vec![1]) }, &pools, 1).is_err());
    assert!(run_matrix(&tiny_matrix(vec![3, 2]), &pools, 1).is_err());
    assert!(run_matrix(&ExperimentMatrixConfig { synthetic_multiplier: 0.0, ..tiny_matrix(vec![1]) }, &pools, 1).is_err());
}

fn toy_pool(r: &mut ChaCha8Rng, prefix: &str, n_pos: usize, n_neg: usize) -> PatchPool {
    let mut patches = Vec::new();
    for (label, n, level) in [(Label::Mass, n_pos, 0.7f32), (Label::Normal, n_neg, 0.3)] {
        for i in 0..n {
            let px = (0..1024).map(|_| (level + r.random_range(-0.15..0.15f32)).clamp(0.0, 1.0)).collect();
            patches.push(Patch::new(format!("{prefix}{label:?}{i}"), label, Source::Real, 32, px).unwrap());
        }
    }
    PatchPool::new(patches).unwrap()
}

fn small_classifier() -> ClassifierConfig {
    ClassifierConfig { epochs: 20, base_channels: Some(16), ..Default::default() }
}

#[test]
fn classifier_separates_a_separable_pool() {
    let mut r = ChaCha8Rng::seed_from_u64(1);
    let train = TrainingSet { pool: toy_pool(&mut r, "t", 100, 1000), flip: false, n_real_positive: 100, n_synthetic: 0, n_negative: 1000 };
    let val = toy_pool(&mut r, "v", 10, 100);
    let out = train_classifier(&train, &val, &small_classifier(), 3).unwrap();
    let best = out.history.iter().map(|h| h.val_f1).fold(0.0, f64::max);
    assert!(best >= 0.95, "best validation F1 {best}");
    assert!(out.best_epoch <= 20);
    let probs = predict(&out.checkpoint.model, &val).unwrap();
    assert_eq!(probs.len(), val.len());
}

#[test]
fn classifier_identity_determinism_and_errors() {
    let mut r = ChaCha8Rng::seed_from_u64(2);
    let pool = toy_pool(&mut r, "t", 10, 40);
    let val = toy_pool(&mut r, "v", 4, 8);
    let train = TrainingSet { pool, flip: true, n_real_positive: 10, n_synthetic: 0, n_negative: 40 };
    let cfg = ClassifierConfig { epochs: 3, ..small_classifier() };

    let frozen = train_classifier(&train, &val, &ClassifierConfig { learning_rate: 0.0, ..cfg.clone() }, 5).unwrap();
    assert_eq!(frozen.checkpoint.model.net.params, frozen.initial.net.params);

    let a = train_classifier(&train, &val, &cfg, 5).unwrap();
    let b = train_classifier(&train, &val, &cfg, 5).unwrap();
    assert_eq!(a.checkpoint, b.checkpoint);
    assert_eq!(a.history, b.history);
    assert_ne!(a.checkpoint.model.net.params, a.initial.net.params);

    let one_class = TrainingSet { pool: train.pool.with_label(Label::Normal), ..train.clone() };
    assert!(matches!(train_classifier(&one_class, &val, &cfg, 5), Err(Error::InvalidInput(_))));
}

#[test]
fn early_stopping_respects_patience() {
    let mut r = ChaCha8Rng::seed_from_u64(4);
    let train = TrainingSet { pool: toy_pool(&mut r, "t", 5, 20), flip: false, n_real_positive: 5, n_synthetic: 0, n_negative: 20 };
    let val = toy_pool(&mut r, "v", 2, 4);
    // learning rate 0 never improves after epoch 1
    let cfg = ClassifierConfig { epochs: 30, patience: 2, learning_rate: 0.0, ..small_classifier() };
    let out = train_classifier(&train, &val, &cfg, 1).unwrap();
    assert!(out.history.len() < 30, "{} epochs", out.history.len());
}

fn record(strategy: StrategyId, k: usize, repetition: usize, f1: f64) -> MetricsRecord {
    MetricsRecord { strategy, k, repetition, seed: 3, precision: f1, recall: f1, f1, threshold: 0.5, confusion: ConfusionCounts::default() }
}

#[test]
fn report_matches_brute_force_aggregation() {
    let mut r = ChaCha8Rng::seed_from_u64(9);
    let mut records = Vec::new();
    for s in StrategyId::ALL {
        for k in [100, 250, 500, 750, 1000, 1300] {
            for rep in 0..3 {
                records.push(record(s, k, rep, r.random_range(0.0..1.0)));
            }
        }
    }
    let dir = tempfile::tempdir().unwrap();
    let files = emit_report(&records, dir.path()).unwrap();

    let text = std::fs::read_to_string(&files.results).unwrap();
    let mut groups: BTreeMap<(String, usize), Vec<f64>> = BTreeMap::new();
    for line in text.lines().skip(1) {
        let cols: Vec<&str> = line.split(',').collect();
        groups.entry((cols[0].to_owned(), cols[1].parse().unwrap())).or_default().push(cols[6].parse().unwrap());
    }
    let summary = std::fs::read_to_string(&files.summary).unwrap();
    let rows: Vec<&str> = summary.lines().skip(1).collect();
    assert_eq!(rows.len(), 24);
    for row in rows {
        let cols: Vec<&str> = row.split(',').collect();
        let f1 = &groups[&(cols[0].to_owned(), cols[1].parse().unwrap())];
        let mean = f1.iter().sum::<f64>() / 3.0;
        let var = f1.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / 2.0;
        assert!((cols[2].parse::<f64>().unwrap() - mean).abs() < 1e-12);
        assert!((cols[3].parse::<f64>().unwrap() - var.sqrt()).abs() < 1e-12);
        assert_eq!(cols[4], "3");
    }
    assert_eq!(read_results_csv(&files.results).unwrap().len(), 72);
    assert!(image::open(&files.plot).is_ok());
}

#[test]
fn degenerate_reports() {
    let dir = tempfile::tempdir().unwrap();
    assert!(matches!(emit_report(&[], dir.path()), Err(Error::InvalidInput(_))));
    let single = vec![record(StrategyId::Gan, 250, 0, 0.4)];
    let files = emit_report(&single, dir.path()).unwrap();
    let summary = summarize(&single);
    assert_eq!((summary.len(), summary[0].f1_std, summary[0].n), (1, 0.0, 1));
    assert!(render_f1_plot(&summary).is_ok());
    assert!(files.plot.exists());
}
