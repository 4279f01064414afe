use std::time::Instant;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::synth::{sample_grid, sample_latents, SampleGrid};
use crate::data::{batch_tensor, flip_pixels, FlipChoice, Label, Patch, PatchPool};
use crate::error::{Error, Result};
use crate::models::{
    default_base_channels, Checkpoint, DiscriminatorSpec, GeneratorSpec, Model, ModelSpec,
    TrainingMeta,
};
use crate::nn::loss::{bce_with_logits, nonsaturating_with_logits, sigmoid};
use crate::nn::{Adam, AdamConfig, Grads, Tape, Tensor};
use crate::seed::{self, Rng};

/// Batch-norm running-average momentum.
pub(crate) const BN_MOMENTUM: f64 = 0.1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LatentSpec {
    pub dim: usize,
    /// Min–max map each latent vector onto [-1, 1] before the generator.
    pub normalize_to_unit_interval: bool,
}

impl Default for LatentSpec {
    fn default() -> Self {
        LatentSpec { dim: 200, normalize_to_unit_interval: true }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GanTrainConfig {
    pub batch_size: usize,
    pub epochs: usize,
    pub learning_rate_g: f64,
    pub learning_rate_d: f64,
    /// Adam (β₁, β₂).
    pub betas: [f64; 2],
    /// Target for real samples; fakes always target 0.
    pub label_smoothing: f64,
    pub flip_augment_real: bool,
    pub latent: LatentSpec,
    pub seed: u64,
    /// Emit an 8×8 sample grid every this many epochs (0 = never).
    pub sample_grid_every: usize,
    /// Channels at the 4×4 stage; `None` scales 1024 by S/128.
    pub base_channels: Option<usize>,
    pub generator_kernel: usize,
    pub discriminator_kernel: usize,
}

impl Default for GanTrainConfig {
    fn default() -> Self {
        GanTrainConfig {
            batch_size: 64,
            epochs: 300,
            learning_rate_g: 2e-4,
            learning_rate_d: 2e-4,
            betas: [0.5, 0.999],
            label_smoothing: 0.9,
            flip_augment_real: true,
            latent: LatentSpec::default(),
            seed: 0,
            sample_grid_every: 0,
            base_channels: None,
            generator_kernel: 4,
            discriminator_kernel: 5,
        }
    }
}

impl GanTrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.batch_size == 0 || self.epochs == 0 {
            return Err(Error::invalid("batch size and epochs must be at least 1"));
        }
        if !(self.learning_rate_g >= 0.0 && self.learning_rate_d >= 0.0) {
            return Err(Error::invalid("learning rates must be non-negative"));
        }
        if !(0.5..=1.0).contains(&self.label_smoothing) {
            return Err(Error::invalid(format!(
                "label smoothing {} outside [0.5, 1]",
                self.label_smoothing
            )));
        }
        if self.latent.dim == 0 {
            return Err(Error::invalid("latent dimension must be positive"));
        }
        Ok(())
    }

    pub fn generator_spec(&self, image_size: usize) -> GeneratorSpec {
        GeneratorSpec {
            latent_dim: self.latent.dim,
            image_size,
            base_channels: self.base_channels.unwrap_or_else(|| default_base_channels(image_size)),
            kernel_size: self.generator_kernel,
        }
    }

    pub fn discriminator_spec(&self, image_size: usize) -> DiscriminatorSpec {
        DiscriminatorSpec {
            image_size,
            base_channels: self.base_channels.unwrap_or_else(|| default_base_channels(image_size)),
            kernel_size: self.discriminator_kernel,
        }
    }

    fn adam(&self, learning_rate: f64) -> AdamConfig {
        AdamConfig { learning_rate, beta1: self.betas[0], beta2: self.betas[1], ..Default::default() }
    }
}

/// Per-epoch means.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainLogRow {
    pub epoch: usize,
    pub loss_d: f64,
    pub loss_g: f64,
    pub d_real_mean: f64,
    pub d_fake_mean: f64,
    pub wall_seconds: f64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct StepStats {
    pub loss_d: f64,
    pub loss_g: f64,
    pub d_real_mean: f64,
    pub d_fake_mean: f64,
}

/// Both players, their optimisers and the latent stream.
pub struct GanState {
    pub config: GanTrainConfig,
    pub generator: Model,
    pub discriminator: Model,
    opt_g: Adam<f32>,
    opt_d: Adam<f32>,
    latent_rng: Rng,
    pub epoch: usize,
    pub step: usize,
}

impl GanState {
    pub fn new(config: GanTrainConfig, image_size: usize) -> Result<Self> {
        config.validate()?;
        let g_spec = config.generator_spec(image_size);
        let d_spec = config.discriminator_spec(image_size);
        d_spec.check_pairing(&g_spec);
        let generator = Model::new(ModelSpec::Generator(g_spec), seed::derive_named(config.seed, "init-g"))?;
        let discriminator =
            Model::new(ModelSpec::Discriminator(d_spec), seed::derive_named(config.seed, "init-d"))?;
        Ok(GanState {
            opt_g: Adam::new(config.adam(config.learning_rate_g), &generator.net.params),
            opt_d: Adam::new(config.adam(config.learning_rate_d), &discriminator.net.params),
            latent_rng: seed::rng(seed::derive_named(config.seed, "latent")),
            config,
            generator,
            discriminator,
            epoch: 0,
            step: 0,
        })
    }

    fn checkpoint(&self, model: &Model, summary: &[(&str, f64)]) -> Checkpoint {
        let mut meta = TrainingMeta { epoch: self.epoch, seed: self.config.seed, ..Default::default() };
        for (k, v) in summary {
            meta.summary.insert((*k).to_owned(), *v);
        }
        meta.summary.insert(
            "latent_normalized".into(),
            if self.config.latent.normalize_to_unit_interval { 1.0 } else { 0.0 },
        );
        Checkpoint { model: model.clone(), meta }
    }
}

/// What the generator half of a step needs from the discriminator half.
pub struct PendingGenerator {
    g_tape: Tape<f32>,
    fakes: Tensor<f32>,
    stats: StepStats,
}

fn mean_prob(logits: &[f32]) -> f64 {
    logits.iter().map(|&l| sigmoid(l as f64)).sum::<f64>() / logits.len() as f64
}

/// Steps 1–5: sample z, generate, score reals and fakes, compute the
/// discriminator loss and update the discriminator only.
pub fn discriminator_phase(state: &mut GanState, real_batch: &Tensor<f32>) -> Result<PendingGenerator> {
    let b = real_batch.batch();
    if b == 0 {
        return Err(Error::invalid("empty real batch"));
    }
    let s = state.generator.image_size();
    if real_batch.shape != [b, s, s, 1] {
        return Err(Error::invalid(format!("real batch shape {:?}", real_batch.shape)));
    }
    // (1) z ~ N(0, 1), (2) optional [-1, 1] normalisation, forward G
    let z = sample_latents(&mut state.latent_rng, b, &state.config.latent);
    let z = Tensor::from_vec([b, 1, 1, state.config.latent.dim], z);
    let (raw, g_tape) = state.generator.net.forward_train(&z);
    // (3) fakes to [0, 1], score fakes and reals
    let fakes = raw.map(|v| (v + 1.0) * 0.5);
    let d = &state.discriminator.net;
    let (real_logits, real_tape) = d.forward_train(real_batch);
    let (fake_logits, fake_tape) = d.forward_train(&fakes);
    // (4) smoothed discriminator loss
    let (loss_real, grad_real) = bce_with_logits(&real_logits.data, state.config.label_smoothing);
    let (loss_fake, grad_fake) = bce_with_logits(&fake_logits.data, 0.0);
    let loss_d = loss_real + loss_fake;
    if !loss_d.is_finite() {
        return Err(Error::NonFiniteLoss { epoch: state.epoch, step: state.step, loss_d, loss_g: f64::NAN });
    }
    // (5) discriminator update
    let mut grads = Grads::zero_like(d);
    d.backward(&real_tape, Tensor::from_vec(real_logits.shape, grad_real), &mut grads);
    d.backward(&fake_tape, Tensor::from_vec(fake_logits.shape, grad_fake), &mut grads);
    let d = &mut state.discriminator.net;
    d.update_running_stats(&real_tape, BN_MOMENTUM);
    d.update_running_stats(&fake_tape, BN_MOMENTUM);
    state.opt_d.step(&mut d.params, &grads);

    let stats = StepStats {
        loss_d,
        loss_g: f64::NAN,
        d_real_mean: mean_prob(&real_logits.data),
        d_fake_mean: mean_prob(&fake_logits.data),
    };
    Ok(PendingGenerator { g_tape, fakes, stats })
}

/// Steps 6–7: re-score the fakes with the updated discriminator, compute the
/// non-saturating generator loss and update the generator only.
pub fn generator_phase(state: &mut GanState, pending: PendingGenerator) -> Result<StepStats> {
    let PendingGenerator { g_tape, fakes, mut stats } = pending;
    let d = &state.discriminator.net;
    let (logits, tape) = d.forward_train(&fakes);
    let (loss_g, grad) = nonsaturating_with_logits(&logits.data);
    stats.loss_g = loss_g;
    if !loss_g.is_finite() {
        return Err(Error::NonFiniteLoss {
            epoch: state.epoch,
            step: state.step,
            loss_d: stats.loss_d,
            loss_g,
        });
    }
    // discriminator gradients of this pass are discarded
    let mut scratch = Grads::zero_like(d);
    let d_fakes = d.backward(&tape, Tensor::from_vec(logits.shape, grad), &mut scratch);
    let d_raw = d_fakes.map(|v| v * 0.5);
    let g = &mut state.generator.net;
    let mut grads = Grads::zero_like(g);
    g.backward(&g_tape, d_raw, &mut grads);
    g.update_running_stats(&g_tape, BN_MOMENTUM);
    state.opt_g.step(&mut g.params, &grads);
    state.step += 1;
    Ok(stats)
}

/// One discriminator update followed by one generator update.
pub fn train_step(state: &mut GanState, real_batch: &Tensor<f32>) -> Result<StepStats> {
    let pending = discriminator_phase(state, real_batch)?;
    generator_phase(state, pending)
}

pub struct GanOutcome {
    pub generator: Checkpoint,
    pub discriminator: Checkpoint,
    pub log: Vec<TrainLogRow>,
    pub grids: Vec<SampleGrid>,
    pub steps: usize,
}

fn assemble_batch(patches: &[&Patch], flip: Option<&mut Rng>) -> Tensor<f32> {
    let mut t = batch_tensor(patches.iter().copied());
    if let Some(rng) = flip {
        let side = t.shape[1];
        for item in t.data.chunks_exact_mut(side * side) {
            flip_pixels(item, side, FlipChoice::sample(rng));
        }
    }
    t
}

/// Full adversarial training on a pool of real masses. One epoch covers
/// every real patch once, in an order reshuffled from `hash(seed, epoch)`.
pub fn train_gan(config: &GanTrainConfig, reals: &PatchPool) -> Result<GanOutcome> {
    config.validate()?;
    if reals.count(Label::Mass) != reals.len() {
        return Err(Error::invalid("GAN training pool must contain masses only"));
    }
    if reals.len() < config.batch_size {
        return Err(Error::invalid(format!(
            "{} real patches, fewer than one batch of {}",
            reals.len(),
            config.batch_size
        )));
    }
    let side = reals.patch_size().expect("non-empty pool");
    let mut state = GanState::new(config.clone(), side)?;
    let mut flip_rng = seed::rng(seed::derive_named(config.seed, "flips"));
    let grid_latents = {
        let mut rng = seed::rng(seed::derive_named(config.seed, "grid"));
        sample_latents(&mut rng, 64, &config.latent)
    };
    let started = Instant::now();
    let mut log = Vec::with_capacity(config.epochs);
    let mut grids = Vec::new();
    let mut order: Vec<usize> = (0..reals.len()).collect();
    for epoch in 0..config.epochs {
        state.epoch = epoch;
        order.sort_unstable();
        order.shuffle(&mut seed::rng(seed::derive(config.seed, epoch as u64)));
        let mut sums = StepStats::default();
        let mut n = 0usize;
        for chunk in order.chunks(config.batch_size) {
            let patches: Vec<&Patch> = chunk.iter().map(|&i| &reals.patches()[i]).collect();
            let batch = assemble_batch(&patches, config.flip_augment_real.then_some(&mut flip_rng));
            let st = train_step(&mut state, &batch)?;
            sums.loss_d += st.loss_d;
            sums.loss_g += st.loss_g;
            sums.d_real_mean += st.d_real_mean;
            sums.d_fake_mean += st.d_fake_mean;
            n += 1;
        }
        let n = n as f64;
        let row = TrainLogRow {
            epoch: epoch + 1,
            loss_d: sums.loss_d / n,
            loss_g: sums.loss_g / n,
            d_real_mean: sums.d_real_mean / n,
            d_fake_mean: sums.d_fake_mean / n,
            wall_seconds: started.elapsed().as_secs_f64(),
        };
        log::debug!(
            "epoch {}: loss_d {:.4} loss_g {:.4} D(x) {:.3} D(G(z)) {:.3}",
            row.epoch, row.loss_d, row.loss_g, row.d_real_mean, row.d_fake_mean
        );
        log.push(row);
        if config.sample_grid_every > 0 && (epoch + 1) % config.sample_grid_every == 0 {
            grids.push(sample_grid(&state.generator, &grid_latents, epoch + 1)?);
        }
    }
    state.epoch = config.epochs;
    let last = log.last().expect("at least one epoch");
    let summary = [
        ("loss_d", last.loss_d),
        ("loss_g", last.loss_g),
        ("d_real_mean", last.d_real_mean),
        ("d_fake_mean", last.d_fake_mean),
    ];
    Ok(GanOutcome {
        generator: state.checkpoint(&state.generator, &summary),
        discriminator: state.checkpoint(&state.discriminator, &summary),
        log,
        grids,
        steps: state.step,
    })
}
