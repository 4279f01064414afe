//! Patch datasets: representation, normalisation, the procedural phantom
//! generator, patch extraction, split and subset construction, flip
//! augmentation and the on-disk patch directory format.

mod augment;
mod extract;
pub mod io;
mod normalize;
mod patch;
mod phantom;
mod split;

pub use augment::{flip, flip_augment, flip_pixels, FlipChoice};
pub use extract::{extract_patches, AnnotatedImage, Rect};
pub use normalize::{histogram_normalize, normalize_to_range, percentile};
pub use patch::{batch_tensor, Label, Patch, PatchPool, Source, PATCH_SIZES};
pub use phantom::{generate_phantom_dataset, PhantomConfig};
pub use split::{
    build_training_set, sample_nested_subsets, shuffled, split_dataset, DatasetSplit,
    SubsetLadder, TrainingSet, TrainingSources,
};
