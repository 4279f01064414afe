use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::classifier::{predict, train_classifier, ClassifierConfig, THRESHOLD};
use super::metrics::{confusion_from_predictions, f1_score, MetricsRecord};
use super::StrategyId;
use crate::data::{
    build_training_set, sample_nested_subsets, shuffled, split_dataset, Label, PatchPool,
    SubsetLadder, TrainingSources,
};
use crate::error::{Error, Result};
use crate::gan::{synthesize, train_gan, GanTrainConfig, TrainLogRow};
use crate::seed;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentMatrixConfig {
    pub k_values: Vec<usize>,
    pub imbalance_ratio: usize,
    pub synthetic_multiplier: f64,
    pub strategies: Vec<StrategyId>,
    pub repetitions: usize,
    pub split_fractions: [f64; 3],
    pub classifier: ClassifierConfig,
    /// GAN used to produce each repetition's synthetic pool; its `seed` is
    /// replaced by one derived from the repetition seed.
    pub gan: GanTrainConfig,
    pub master_seed: u64,
}

impl Default for ExperimentMatrixConfig {
    fn default() -> Self {
        ExperimentMatrixConfig {
            k_values: vec![100, 250, 500, 750, 1000, 1300],
            imbalance_ratio: 10,
            synthetic_multiplier: 1.5,
            strategies: StrategyId::ALL.to_vec(),
            repetitions: 3,
            split_fractions: [0.60, 0.066, 0.334],
            classifier: ClassifierConfig::default(),
            gan: GanTrainConfig::default(),
            master_seed: 0,
        }
    }
}

impl ExperimentMatrixConfig {
    pub fn validate(&self) -> Result<()> {
        if self.k_values.is_empty() || self.k_values[0] == 0 || self.k_values.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid(format!("k values {:?} must be positive and ascending", self.k_values)));
        }
        if self.repetitions == 0 {
            return Err(Error::invalid("repetitions must be ≥ 1"));
        }
        if !(self.synthetic_multiplier > 0.0) {
            return Err(Error::invalid("synthetic multiplier must be positive"));
        }
        if self.imbalance_ratio == 0 {
            return Err(Error::invalid("imbalance ratio must be ≥ 1"));
        }
        if self.strategies.is_empty() {
            return Err(Error::invalid("no strategies selected"));
        }
        self.classifier.validate()?;
        if self.needs_gan() {
            self.gan.validate()?;
        }
        Ok(())
    }

    fn needs_gan(&self) -> bool {
        self.strategies.iter().any(|s| s.uses_synthetic())
    }

    fn max_k(&self) -> usize {
        *self.k_values.last().expect("validated")
    }

    pub fn repetition_seed(&self, repetition: usize) -> u64 {
        seed::derive(self.master_seed, repetition as u64)
    }
}

/// The fixed split shared by every cell: class-stratified train pools, and
/// the validation and test pools.
#[derive(Clone, Debug, PartialEq)]
pub struct DataPools {
    pub train_positive: PatchPool,
    pub train_negative: PatchPool,
    pub validation: PatchPool,
    pub test: PatchPool,
}

impl DataPools {
    /// Splits each class separately with the same fractions.
    pub fn from_pool(pool: &PatchPool, fractions: [f64; 3], master_seed: u64) -> Result<Self> {
        let pos = split_dataset(&pool.with_label(Label::Mass), fractions, seed::derive_named(master_seed, "split-mass"))?;
        let neg =
            split_dataset(&pool.with_label(Label::Normal), fractions, seed::derive_named(master_seed, "split-normal"))?;
        Ok(DataPools {
            validation: PatchPool::concat(&[&pos.validation, &neg.validation])?,
            test: PatchPool::concat(&[&pos.test, &neg.test])?,
            train_positive: pos.train,
            train_negative: neg.train,
        })
    }

    fn check(&self, config: &ExperimentMatrixConfig) -> Result<()> {
        let k = config.max_k();
        if self.train_positive.len() < k {
            return Err(Error::invalid(format!(
                "largest k = {k} exceeds {} training positives",
                self.train_positive.len()
            )));
        }
        if self.train_negative.len() < k * config.imbalance_ratio {
            return Err(Error::invalid(format!(
                "{} training negatives needed, {} available",
                k * config.imbalance_ratio,
                self.train_negative.len()
            )));
        }
        if self.test.is_empty() || self.validation.is_empty() {
            return Err(Error::invalid("validation and test pools must be non-empty"));
        }
        Ok(())
    }
}

/// Per-repetition artifacts shared by all of its cells.
#[derive(Clone, Debug)]
pub struct RepetitionContext {
    pub repetition: usize,
    pub seed: u64,
    pub ladder: SubsetLadder,
    /// Training negatives in nesting order.
    pub negatives: PatchPool,
    pub synthetic: Option<PatchPool>,
    pub gan_log: Vec<TrainLogRow>,
}

/// Samples the subset ladder and negative order for repetition `r` and, when
/// a GAN strategy is selected, trains a generator on the largest real subset
/// and synthesises `ceil(multiplier · max k)` masses.
pub fn prepare_repetition(
    config: &ExperimentMatrixConfig,
    pools: &DataPools,
    repetition: usize,
) -> Result<RepetitionContext> {
    config.validate()?;
    pools.check(config)?;
    let rep_seed = config.repetition_seed(repetition);
    let ladder =
        sample_nested_subsets(&pools.train_positive, &config.k_values, seed::derive_named(rep_seed, "ladder"))?;
    let negatives = shuffled(&pools.train_negative, seed::derive_named(rep_seed, "negatives"));
    let (synthetic, gan_log) = if config.needs_gan() {
        let ids: std::collections::HashSet<&str> =
            ladder.largest().expect("non-empty ladder").iter().map(String::as_str).collect();
        let reals = pools.train_positive.filter(|p| ids.contains(p.id()));
        let gan_config = GanTrainConfig { seed: seed::derive_named(rep_seed, "gan"), ..config.gan.clone() };
        let outcome = train_gan(&gan_config, &reals)?;
        let n = (config.synthetic_multiplier * config.max_k() as f64).ceil() as usize;
        let pool = synthesize(&outcome.generator, n, seed::derive_named(rep_seed, "synth"))?;
        (Some(pool), outcome.log)
    } else {
        (None, Vec::new())
    };
    Ok(RepetitionContext { repetition, seed: rep_seed, ladder, negatives, synthetic, gan_log })
}

/// Trains and tests one (strategy, k) cell of a prepared repetition.
pub fn evaluate_strategy(
    config: &ExperimentMatrixConfig,
    pools: &DataPools,
    ctx: &RepetitionContext,
    strategy: StrategyId,
    k: usize,
) -> Result<MetricsRecord> {
    let sources = TrainingSources {
        positives: &pools.train_positive,
        ladder: &ctx.ladder,
        negatives: &ctx.negatives,
        synthetic: ctx.synthetic.as_ref(),
    };
    let trainset =
        build_training_set(k, sources, strategy, config.imbalance_ratio, config.synthetic_multiplier)?;
    let outcome = train_classifier(
        &trainset,
        &pools.validation,
        &config.classifier,
        seed::derive_named(ctx.seed, "classifier"),
    )?;
    let probs = predict(&outcome.checkpoint.model, &pools.test)?;
    let is_mass: Vec<bool> = pools.test.iter().map(|p| p.label() == Label::Mass).collect();
    let confusion = confusion_from_predictions(&probs, &is_mass, THRESHOLD);
    let s = f1_score(&confusion);
    log::info!(
        "{strategy} k={k} rep={}: F1 {:.4} (P {:.3}, R {:.3}, best epoch {})",
        ctx.repetition, s.f1, s.precision, s.recall, outcome.best_epoch
    );
    Ok(MetricsRecord {
        strategy,
        k,
        repetition: ctx.repetition,
        seed: ctx.seed,
        precision: s.precision,
        recall: s.recall,
        f1: s.f1,
        threshold: THRESHOLD,
        confusion,
    })
}

#[derive(Clone, Debug)]
pub struct MatrixRun {
    /// Sorted by (strategy, k, repetition).
    pub records: Vec<MetricsRecord>,
    /// GAN training log of each repetition (empty without GAN strategies).
    pub gan_logs: Vec<Vec<TrainLogRow>>,
}

/// Every (strategy × k × repetition) cell. Cells only read frozen pools, so
/// up to `jobs` run in parallel without changing any record.
pub fn run_matrix(config: &ExperimentMatrixConfig, pools: &DataPools, jobs: usize) -> Result<MatrixRun> {
    config.validate()?;
    pools.check(config)?;
    let thread_pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::invalid(format!("thread pool: {e}")))?;
    thread_pool.install(|| {
        let contexts: Vec<RepetitionContext> = (0..config.repetitions)
            .into_par_iter()
            .map(|r| prepare_repetition(config, pools, r))
            .collect::<Result<_>>()?;
        let cells: Vec<(usize, StrategyId, usize)> = contexts
            .iter()
            .enumerate()
            .flat_map(|(r, _)| {
                config.strategies.iter().flat_map(move |&s| config.k_values.iter().map(move |&k| (r, s, k)))
            })
            .collect();
        let mut records: Vec<MetricsRecord> = cells
            .into_par_iter()
            .map(|(r, s, k)| evaluate_strategy(config, pools, &contexts[r], s, k))
            .collect::<Result<_>>()?;
        records.sort_by_key(MetricsRecord::sort_key);
        Ok(MatrixRun { records, gan_logs: contexts.into_iter().map(|c| c.gan_log).collect() })
    })
}
