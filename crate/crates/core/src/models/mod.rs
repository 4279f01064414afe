//! Generator, discriminator and classifier architectures, their forward
//! passes, and the checkpoint file format.

mod arch;
mod checkpoint;
mod spec;

pub use arch::{
    build_network, classifier_forward, discriminator_forward, discriminator_logits,
    generator_forward, init_network, Model,
};
pub use checkpoint::{load_checkpoint, save_checkpoint, Checkpoint, TrainingMeta, FORMAT_VERSION};
pub use spec::{default_base_channels, ClassifierSpec, DiscriminatorSpec, GeneratorSpec, ModelSpec};
