//! Procedural stand-in for mammographic patches.
//!
//! Background: white Gaussian noise blurred by an isotropic Gaussian of the
//! configured correlation length, rescaled to `background_mean ±
//! background_std`. Mass patches add one centred elliptical Gaussian blob
//! with random size, eccentricity, orientation and contrast.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::{Label, Patch, PatchPool, Source, PATCH_SIZES};
use crate::error::{Error, Result};
use crate::seed;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PhantomConfig {
    pub image_size: usize,
    pub n_positive: usize,
    pub n_negative: usize,
    /// Lesion semi-major axis in pixels; the profile falls to e⁻² there.
    pub lesion_radius_range: [f64; 2],
    /// Peak additive intensity of the lesion.
    pub lesion_contrast_range: [f64; 2],
    pub background_correlation_length: f64,
    pub background_mean: f64,
    pub background_std: f64,
    pub seed: u64,
}

impl Default for PhantomConfig {
    fn default() -> Self {
        PhantomConfig {
            image_size: 32,
            n_positive: 250,
            n_negative: 2500,
            lesion_radius_range: [3.0, 7.0],
            lesion_contrast_range: [0.08, 0.3],
            background_correlation_length: 2.0,
            background_mean: 0.45,
            background_std: 0.1,
            seed: 0,
        }
    }
}

impl PhantomConfig {
    pub fn validate(&self) -> Result<()> {
        let s = self.image_size;
        if !PATCH_SIZES.contains(&s) {
            return Err(Error::invalid(format!("phantom image size {s} not in {PATCH_SIZES:?}")));
        }
        let [rmin, rmax] = self.lesion_radius_range;
        if !(rmin > 0.0 && rmin <= rmax && rmax < s as f64 / 2.0) {
            return Err(Error::invalid(format!(
                "lesion radius range [{rmin}, {rmax}] must satisfy 0 < min ≤ max < {}",
                s as f64 / 2.0
            )));
        }
        let [cmin, cmax] = self.lesion_contrast_range;
        if !(0.0..=1.0).contains(&cmin) || !(cmin..=1.0).contains(&cmax) {
            return Err(Error::invalid(format!(
                "lesion contrast range [{cmin}, {cmax}] must lie within [0, 1]"
            )));
        }
        if !(self.background_correlation_length > 0.0) {
            return Err(Error::invalid("background correlation length must be positive"));
        }
        if !(0.0..=1.0).contains(&self.background_mean) || !(self.background_std >= 0.0) {
            return Err(Error::invalid("background mean must lie in [0, 1], std ≥ 0"));
        }
        Ok(())
    }
}

fn gaussian_kernel(sigma: f64) -> Vec<f64> {
    let radius = (3.0 * sigma).ceil() as isize;
    let k: Vec<f64> = (-radius..=radius)
        .map(|i| (-0.5 * (i as f64 / sigma).powi(2)).exp())
        .collect();
    let sum: f64 = k.iter().sum();
    k.into_iter().map(|v| v / sum).collect()
}

/// Unit-variance correlated noise field.
fn correlated_noise(rng: &mut impl Rng, side: usize, kernel: &[f64]) -> Vec<f64> {
    let r = kernel.len() / 2;
    let padded = side + 2 * r;
    let white: Vec<f64> = (0..padded * padded).map(|_| rng.sample(StandardNormal)).collect();
    // horizontal pass: padded rows × side cols
    let mut h = vec![0.0; padded * side];
    for y in 0..padded {
        for x in 0..side {
            h[y * side + x] =
                kernel.iter().enumerate().map(|(i, w)| w * white[y * padded + x + i]).sum();
        }
    }
    let mut out = vec![0.0; side * side];
    for y in 0..side {
        for x in 0..side {
            out[y * side + x] = kernel.iter().enumerate().map(|(i, w)| w * h[(y + i) * side + x]).sum();
        }
    }
    let gain: f64 = kernel.iter().map(|w| w * w).sum();
    out.iter_mut().for_each(|v| *v /= gain);
    out
}

fn phantom_patch(cfg: &PhantomConfig, kernel: &[f64], stream: u64, lesion: bool) -> Vec<f32> {
    let s = cfg.image_size;
    let mut rng = seed::rng(stream);
    let noise = correlated_noise(&mut rng, s, kernel);
    let mut img: Vec<f64> =
        noise.iter().map(|n| cfg.background_mean + cfg.background_std * n).collect();
    if lesion {
        let [rmin, rmax] = cfg.lesion_radius_range;
        let [cmin, cmax] = cfg.lesion_contrast_range;
        let radius = rng.random_range(rmin..=rmax);
        let eccentricity = rng.random_range(0.6..=1.0);
        let angle = rng.random_range(0.0..std::f64::consts::PI);
        let contrast = rng.random_range(cmin..=cmax);
        let (sa, sb) = (radius / 2.0, radius * eccentricity / 2.0);
        let (sin, cos) = angle.sin_cos();
        let c = (s as f64 - 1.0) / 2.0;
        for y in 0..s {
            for x in 0..s {
                let (dx, dy) = (x as f64 - c, y as f64 - c);
                let u = cos * dx + sin * dy;
                let v = -sin * dx + cos * dy;
                img[y * s + x] += contrast * (-0.5 * ((u / sa).powi(2) + (v / sb).powi(2))).exp();
            }
        }
    }
    img.iter().map(|v| v.clamp(0.0, 1.0) as f32).collect()
}

/// `n_positive` mass patches followed by `n_negative` normal ones,
/// deterministic in `config.seed`.
pub fn generate_phantom_dataset(config: &PhantomConfig) -> Result<PatchPool> {
    config.validate()?;
    let kernel = gaussian_kernel(config.background_correlation_length);
    let mass_seed = seed::derive_named(config.seed, "phantom-mass");
    let normal_seed = seed::derive_named(config.seed, "phantom-normal");
    let mut patches = Vec::with_capacity(config.n_positive + config.n_negative);
    for i in 0..config.n_positive {
        let px = phantom_patch(config, &kernel, seed::derive(mass_seed, i as u64), true);
        patches.push(Patch::new(format!("mass_{i:05}"), Label::Mass, Source::Real, config.image_size, px)?);
    }
    for i in 0..config.n_negative {
        let px = phantom_patch(config, &kernel, seed::derive(normal_seed, i as u64), false);
        patches.push(Patch::new(
            format!("normal_{i:05}"),
            Label::Normal,
            Source::Real,
            config.image_size,
            px,
        )?);
    }
    PatchPool::new(patches)
}
