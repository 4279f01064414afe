use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::metrics::{confusion_from_predictions, f1_score};
use crate::data::{batch_tensor, flip_pixels, FlipChoice, Label, Patch, PatchPool, TrainingSet};
use crate::error::{Error, Result};
use crate::models::{
    classifier_forward, default_base_channels, Checkpoint, ClassifierSpec, Model, ModelSpec,
    TrainingMeta,
};
use crate::nn::loss::{bce_with_logits_targets, sigmoid, softplus};
use crate::nn::{Adam, AdamConfig, Grads, Tensor};
use crate::seed;

const BN_MOMENTUM: f64 = 0.1;
const EVAL_BATCH: usize = 256;
pub(crate) const THRESHOLD: f64 = 0.5;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ClassifierConfig {
    /// Epoch budget.
    pub epochs: usize,
    pub learning_rate: f64,
    pub betas: [f64; 2],
    pub batch_size: usize,
    /// Stop after this many epochs without validation improvement.
    pub patience: usize,
    pub base_channels: Option<usize>,
    pub kernel_size: usize,
}

impl Default for ClassifierConfig {
    fn default() -> Self {
        ClassifierConfig {
            epochs: 50,
            learning_rate: 2e-4,
            betas: [0.5, 0.999],
            batch_size: 64,
            patience: 10,
            base_channels: None,
            kernel_size: 5,
        }
    }
}

impl ClassifierConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 || self.batch_size == 0 || self.patience == 0 {
            return Err(Error::invalid("classifier epochs, batch size and patience must be ≥ 1"));
        }
        if !(self.learning_rate >= 0.0) {
            return Err(Error::invalid("classifier learning rate must be non-negative"));
        }
        Ok(())
    }

    pub fn spec(&self, image_size: usize) -> ClassifierSpec {
        ClassifierSpec {
            image_size,
            base_channels: self.base_channels.unwrap_or_else(|| default_base_channels(image_size)),
            kernel_size: self.kernel_size,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_loss: f64,
    pub val_loss: f64,
    pub val_f1: f64,
}

#[derive(Clone, Debug)]
pub struct ClassifierOutcome {
    pub checkpoint: Checkpoint,
    pub initial: Model,
    pub best_epoch: usize,
    pub history: Vec<EpochRecord>,
}

fn logits(model: &Model, patches: &[Patch]) -> Vec<f32> {
    patches
        .chunks(EVAL_BATCH)
        .flat_map(|chunk| model.net.forward(&batch_tensor(chunk)).data)
        .collect()
}

/// Mass probabilities for every patch of `pool`, inference mode.
pub fn predict(model: &Model, pool: &PatchPool) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(pool.len());
    for chunk in pool.patches().chunks(EVAL_BATCH) {
        out.extend(classifier_forward(model, &batch_tensor(chunk))?);
    }
    Ok(out)
}

fn validation_scores(model: &Model, val: &PatchPool) -> (f64, f64) {
    let ls = logits(model, val.patches());
    let is_mass: Vec<bool> = val.iter().map(|p| p.label() == Label::Mass).collect();
    let loss = ls
        .iter()
        .zip(&is_mass)
        .map(|(&l, &y)| {
            let l = (l as f64).clamp(-30.0, 30.0);
            if y { softplus(-l) } else { softplus(l) }
        })
        .sum::<f64>()
        / ls.len() as f64;
    let probs: Vec<f64> = ls.iter().map(|&l| sigmoid((l as f64).clamp(-30.0, 30.0))).collect();
    let f1 = f1_score(&confusion_from_predictions(&probs, &is_mass, THRESHOLD)).f1;
    (f1, loss)
}

/// Binary cross-entropy training on the (imbalanced) training pool with
/// class-agnostic mini-batches and optional on-the-fly flips.
///
/// The returned model is the epoch with the best validation F1 at 0.5, ties
/// broken by lower validation loss; training stops after `patience` epochs
/// without improvement.
pub fn train_classifier(
    trainset: &TrainingSet,
    valset: &PatchPool,
    config: &ClassifierConfig,
    seed: u64,
) -> Result<ClassifierOutcome> {
    config.validate()?;
    let pool = &trainset.pool;
    if pool.count(Label::Mass) == 0 || pool.count(Label::Normal) == 0 {
        return Err(Error::invalid("classifier training set must contain both classes"));
    }
    if valset.is_empty() {
        return Err(Error::invalid("empty validation set"));
    }
    let side = pool.patch_size().expect("non-empty pool");
    if valset.patch_size() != Some(side) {
        return Err(Error::invalid("validation patches differ in size from training patches"));
    }
    let spec = config.spec(side);
    let mut model = Model::new(ModelSpec::Classifier(spec), seed::derive_named(seed, "init"))?;
    let initial = model.clone();
    let adam = AdamConfig {
        learning_rate: config.learning_rate,
        beta1: config.betas[0],
        beta2: config.betas[1],
        ..Default::default()
    };
    let mut opt = Adam::new(adam, &model.net.params);
    let order_seed = seed::derive_named(seed, "batches");
    let mut flip_rng = seed::rng(seed::derive_named(seed, "flips"));

    let mut order: Vec<usize> = (0..pool.len()).collect();
    let mut history = Vec::new();
    let mut best: Option<(f64, f64, usize, Model)> = None;
    let mut since_best = 0;
    for epoch in 1..=config.epochs {
        order.sort_unstable();
        order.shuffle(&mut seed::rng(seed::derive(order_seed, epoch as u64)));
        let mut loss_sum = 0.0;
        let mut batches = 0;
        for chunk in order.chunks(config.batch_size) {
            let patches: Vec<&Patch> = chunk.iter().map(|&i| &pool.patches()[i]).collect();
            let mut x: Tensor<f32> = batch_tensor(patches.iter().copied());
            if trainset.flip {
                for item in x.data.chunks_exact_mut(side * side) {
                    flip_pixels(item, side, FlipChoice::sample(&mut flip_rng));
                }
            }
            let targets: Vec<f64> =
                patches.iter().map(|p| if p.label() == Label::Mass { 1.0 } else { 0.0 }).collect();
            let (out, tape) = model.net.forward_train(&x);
            let (loss, grad) = bce_with_logits_targets(&out.data, &targets);
            if !loss.is_finite() {
                return Err(Error::NonFiniteLoss { epoch, step: batches, loss_d: loss, loss_g: f64::NAN });
            }
            let mut grads = Grads::zero_like(&model.net);
            model.net.backward(&tape, Tensor::from_vec(out.shape, grad), &mut grads);
            model.net.update_running_stats(&tape, BN_MOMENTUM);
            opt.step(&mut model.net.params, &grads);
            loss_sum += loss;
            batches += 1;
        }
        let (val_f1, val_loss) = validation_scores(&model, valset);
        history.push(EpochRecord { epoch, train_loss: loss_sum / batches as f64, val_f1, val_loss });
        let improved = match &best {
            None => true,
            Some((f1, loss, _, _)) => val_f1 > *f1 || (val_f1 == *f1 && val_loss < *loss),
        };
        if improved {
            best = Some((val_f1, val_loss, epoch, model.clone()));
            since_best = 0;
        } else {
            since_best += 1;
            if since_best >= config.patience {
                break;
            }
        }
    }
    let (val_f1, val_loss, best_epoch, best_model) = best.expect("at least one epoch");
    let mut meta = TrainingMeta { epoch: best_epoch, seed, ..Default::default() };
    meta.summary.insert("val_f1".into(), val_f1);
    meta.summary.insert("val_loss".into(), val_loss);
    Ok(ClassifierOutcome {
        checkpoint: Checkpoint { model: best_model, meta },
        initial,
        best_epoch,
        history,
    })
}
