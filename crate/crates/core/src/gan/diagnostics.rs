use crate::data::{Patch, PatchPool};
use crate::error::{Error, Result};

/// Share of non-DC spectral energy at the (S/2, S/2) bin of the 2-D DFT.
///
/// That bin is `Σ x·(-1)^(r+c)`; by Parseval the non-DC energy is
/// `N·Σx² − (Σx)²`. A pure ±1 checkerboard scores 1, an image without
/// variation 0.
pub fn checkerboard_score_pixels(pixels: &[f32], side: usize) -> Result<f64> {
    if side == 0 || !side.is_multiple_of(2) || pixels.len() != side * side {
        return Err(Error::invalid(format!("checkerboard score needs an even square image, got side {side}")));
    }
    let (mut sum, mut sq, mut alt) = (0.0f64, 0.0f64, 0.0f64);
    for r in 0..side {
        for c in 0..side {
            let v = pixels[r * side + c] as f64;
            sum += v;
            sq += v * v;
            alt += if (r + c) % 2 == 0 { v } else { -v };
        }
    }
    let non_dc = (side * side) as f64 * sq - sum * sum;
    if non_dc <= f64::EPSILON * (side * side) as f64 * sq {
        return Ok(0.0);
    }
    Ok((alt * alt / non_dc).clamp(0.0, 1.0))
}

pub fn checkerboard_score(patch: &Patch) -> f64 {
    checkerboard_score_pixels(patch.pixels(), patch.size()).expect("patch sides are even")
}

#[derive(Clone, Debug, PartialEq)]
pub struct MemorizationReport {
    pub mean: f64,
    pub min: f64,
    /// Nearest-real L2 distance of each synthetic patch, in pool order.
    pub per_patch: Vec<f64>,
}

/// Euclidean distance from every synthetic patch to its nearest real patch.
pub fn memorization_distance(synthetic: &PatchPool, reals: &PatchPool) -> Result<MemorizationReport> {
    if synthetic.is_empty() || reals.is_empty() {
        return Err(Error::invalid("memorization distance needs two non-empty pools"));
    }
    if synthetic.patch_size() != reals.patch_size() {
        return Err(Error::invalid("pools hold patches of different sizes"));
    }
    let per_patch: Vec<f64> = synthetic
        .iter()
        .map(|s| {
            reals
                .iter()
                .map(|r| {
                    s.pixels()
                        .iter()
                        .zip(r.pixels())
                        .map(|(a, b)| {
                            let d = (*a - *b) as f64;
                            d * d
                        })
                        .sum::<f64>()
                })
                .fold(f64::INFINITY, f64::min)
                .sqrt()
        })
        .collect();
    let mean = per_patch.iter().sum::<f64>() / per_patch.len() as f64;
    let min = per_patch.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(MemorizationReport { mean, min, per_patch })
}
