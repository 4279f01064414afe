//! Adversarial training: losses, the per-batch update, the epoch loop,
//! synthesis of augmentation patches and sample-quality diagnostics.

mod diagnostics;
mod losses;
mod synth;
mod train;

pub use diagnostics::{
    checkerboard_score, checkerboard_score_pixels, memorization_distance, MemorizationReport,
};
pub use losses::{
    discriminator_loss, discriminator_loss_grad, generator_loss, generator_loss_grad,
    saturating_generator_loss_grad,
};
pub use synth::{sample_latents, sample_grid, synthesize, SampleGrid};
pub use train::{
    discriminator_phase, generator_phase, train_gan, train_step, GanOutcome, GanState,
    GanTrainConfig, LatentSpec, PendingGenerator, StepStats, TrainLogRow,
};
