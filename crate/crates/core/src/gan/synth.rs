use rand_distr::{Distribution, StandardNormal};

use super::train::LatentSpec;
use crate::data::{normalize_to_range, Label, Patch, PatchPool, Source};
use crate::error::{Error, Result};
use crate::models::{generator_forward, Checkpoint, Model};
use crate::seed::{self, Rng};

/// `n × dim` standard-normal latents, each vector optionally min–max mapped
/// onto [-1, 1].
pub fn sample_latents(rng: &mut Rng, n: usize, spec: &LatentSpec) -> Vec<f32> {
    let mut z: Vec<f32> = (0..n * spec.dim).map(|_| StandardNormal.sample(rng)).collect();
    if spec.normalize_to_unit_interval {
        for row in z.chunks_exact_mut(spec.dim) {
            let mapped = normalize_to_range(row, -1.0, 1.0).expect("valid range");
            row.copy_from_slice(&mapped);
        }
    }
    z
}

fn latent_spec_of(ck: &Checkpoint) -> Result<LatentSpec> {
    let g = ck.model.generator_spec()?;
    let normalized = ck.meta.summary.get("latent_normalized").is_none_or(|v| *v != 0.0);
    Ok(LatentSpec { dim: g.latent_dim, normalize_to_unit_interval: normalized })
}

const CHUNK: usize = 64;

/// `n` synthetic mass patches from a generator checkpoint, with outputs mapped
/// from [-1, 1] to [0, 1]. Deterministic in `seed`.
pub fn synthesize(generator: &Checkpoint, n: usize, seed: u64) -> Result<PatchPool> {
    if n == 0 {
        return Err(Error::invalid("synthesis needs n ≥ 1"));
    }
    let spec = latent_spec_of(generator)?;
    let model = &generator.model;
    let side = model.image_size();
    let mut rng = seed::rng(seed);
    let mut patches = Vec::with_capacity(n);
    while patches.len() < n {
        let b = CHUNK.min(n - patches.len());
        let z = sample_latents(&mut rng, b, &spec);
        let out = generator_forward(model, &z, b)?;
        for i in 0..b {
            let px = out.item(i).iter().map(|v| ((v + 1.0) * 0.5).clamp(0.0, 1.0)).collect();
            let id = format!("synth_{:05}", patches.len());
            patches.push(Patch::new(id, Label::Mass, Source::Synthetic, side, px)?);
        }
    }
    PatchPool::new(patches)
}

/// 8×8 tiling of generator samples for one epoch.
#[derive(Clone, Debug, PartialEq)]
pub struct SampleGrid {
    pub epoch: usize,
    pub side: usize,
    /// Row-major `side × side` pixels in [0, 1].
    pub pixels: Vec<f32>,
}

impl SampleGrid {
    pub fn file_name(&self) -> String {
        format!("samples_epoch{}.pgm", self.epoch)
    }
}

pub fn sample_grid(generator: &Model, latents: &[f32], epoch: usize) -> Result<SampleGrid> {
    let out = generator_forward(generator, latents, 64)?;
    let s = generator.image_size();
    let side = 8 * s;
    let mut pixels = vec![0.0f32; side * side];
    for i in 0..64 {
        let (ty, tx) = (i / 8, i % 8);
        for (y, row) in out.item(i).chunks_exact(s).enumerate() {
            let dst = (ty * s + y) * side + tx * s;
            for (d, v) in pixels[dst..dst + s].iter_mut().zip(row) {
                *d = ((v + 1.0) * 0.5).clamp(0.0, 1.0);
            }
        }
    }
    Ok(SampleGrid { epoch, side, pixels })
}
