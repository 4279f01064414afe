use rand::Rng;

use super::Patch;

/// Which mirror images to apply.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct FlipChoice {
    pub horizontal: bool,
    pub vertical: bool,
}

impl FlipChoice {
    /// Each flip independently with probability ½.
    pub fn sample(rng: &mut impl Rng) -> Self {
        FlipChoice { horizontal: rng.random_bool(0.5), vertical: rng.random_bool(0.5) }
    }
}

/// In-place flip of a row-major `side × side` image.
pub fn flip_pixels(pixels: &mut [f32], side: usize, choice: FlipChoice) {
    if choice.horizontal {
        for row in pixels.chunks_exact_mut(side) {
            row.reverse();
        }
    }
    if choice.vertical {
        for y in 0..side / 2 {
            let (top, bottom) = pixels.split_at_mut((side - 1 - y) * side);
            top[y * side..(y + 1) * side].swap_with_slice(&mut bottom[..side]);
        }
    }
}

pub fn flip(patch: &Patch, choice: FlipChoice) -> Patch {
    let mut px = patch.pixels().to_vec();
    flip_pixels(&mut px, patch.size(), choice);
    patch.with_pixels(px)
}

/// Random horizontal and vertical flips; label, source and id are kept.
pub fn flip_augment(patch: &Patch, rng: &mut impl Rng) -> Patch {
    flip(patch, FlipChoice::sample(rng))
}
