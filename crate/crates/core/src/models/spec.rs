use crate::error::{Error, Result};

/// Channels at the 4×4 stage: `1024·S/128`, rounded to a multiple of 8.
pub fn default_base_channels(image_size: usize) -> usize {
    let raw = 1024.0 * image_size as f64 / 128.0;
    (((raw / 8.0).round() as usize) * 8).max(8)
}

fn stages_for(image_size: usize) -> Result<usize> {
    if image_size < 8 || !image_size.is_power_of_two() {
        return Err(Error::invalid(format!(
            "image size {image_size} must be a power of two of at least 8"
        )));
    }
    Ok(image_size.trailing_zeros() as usize - 2)
}

fn check_channels(base: usize, stages: usize) -> Result<()> {
    if base == 0 || !base.is_multiple_of(1 << (stages - 1)) {
        return Err(Error::invalid(format!(
            "base channels {base} must be a positive multiple of {}",
            1 << (stages - 1)
        )));
    }
    Ok(())
}

/// Transposed-convolution generator: a 1×1→4×4 projection followed by
/// `n_stages` doubling stages.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GeneratorSpec {
    pub latent_dim: usize,
    pub image_size: usize,
    pub base_channels: usize,
    pub kernel_size: usize,
}

impl GeneratorSpec {
    pub fn new(image_size: usize) -> Self {
        GeneratorSpec {
            latent_dim: 200,
            image_size,
            base_channels: default_base_channels(image_size),
            kernel_size: 4,
        }
    }

    pub fn n_stages(&self) -> usize {
        self.image_size.trailing_zeros() as usize - 2
    }

    /// Output channels of each doubling stage, ending with the single image
    /// channel.
    pub fn stage_channels(&self) -> Vec<usize> {
        let n = self.n_stages();
        (1..n).map(|i| self.base_channels >> i).chain(std::iter::once(1)).collect()
    }

    pub fn validate(&self) -> Result<()> {
        let n = stages_for(self.image_size)?;
        check_channels(self.base_channels, n)?;
        if self.latent_dim == 0 {
            return Err(Error::invalid("latent dimension must be positive"));
        }
        if self.kernel_size < 2 || !self.kernel_size.is_multiple_of(2) {
            return Err(Error::invalid(format!(
                "generator kernel {} must be divisible by the stride 2",
                self.kernel_size
            )));
        }
        Ok(())
    }
}

/// Strided-convolution discriminator halving down to 4×4, then a 4×4
/// reduction to one logit. The classifier uses the same layout.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DiscriminatorSpec {
    pub image_size: usize,
    pub base_channels: usize,
    pub kernel_size: usize,
}

pub type ClassifierSpec = DiscriminatorSpec;

impl DiscriminatorSpec {
    pub fn new(image_size: usize) -> Self {
        DiscriminatorSpec {
            image_size,
            base_channels: default_base_channels(image_size),
            kernel_size: 5,
        }
    }

    pub fn n_stages(&self) -> usize {
        self.image_size.trailing_zeros() as usize - 2
    }

    /// Output channels of each halving stage; the last equals `base_channels`.
    pub fn stage_channels(&self) -> Vec<usize> {
        let n = self.n_stages();
        (0..n).map(|i| self.base_channels >> (n - 1 - i)).collect()
    }

    pub fn validate(&self) -> Result<()> {
        let n = stages_for(self.image_size)?;
        check_channels(self.base_channels, n)?;
        if self.kernel_size < 2 {
            return Err(Error::invalid("discriminator kernel must be at least 2"));
        }
        Ok(())
    }

    /// Warns when paired with a generator of equal kernel size, the setting
    /// that produces grid artifacts.
    pub fn check_pairing(&self, generator: &GeneratorSpec) -> bool {
        let distinct = self.kernel_size != generator.kernel_size;
        if !distinct {
            log::warn!(
                "generator and discriminator share kernel size {}; expect checkerboard artifacts",
                self.kernel_size
            );
        }
        distinct
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ModelSpec {
    Generator(GeneratorSpec),
    Discriminator(DiscriminatorSpec),
    Classifier(ClassifierSpec),
}

impl ModelSpec {
    pub fn kind(&self) -> &'static str {
        match self {
            ModelSpec::Generator(_) => "generator",
            ModelSpec::Discriminator(_) => "discriminator",
            ModelSpec::Classifier(_) => "classifier",
        }
    }

    pub fn image_size(&self) -> usize {
        match self {
            ModelSpec::Generator(g) => g.image_size,
            ModelSpec::Discriminator(d) | ModelSpec::Classifier(d) => d.image_size,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            ModelSpec::Generator(g) => g.validate(),
            ModelSpec::Discriminator(d) | ModelSpec::Classifier(d) => d.validate(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_channels_scale_with_size() {
        assert_eq!(default_base_channels(128), 1024);
        assert_eq!(default_base_channels(64), 512);
        assert_eq!(default_base_channels(32), 256);
    }

    #[test]
    fn stage_counts() {
        assert_eq!(GeneratorSpec::new(128).n_stages(), 5);
        assert_eq!(GeneratorSpec::new(64).n_stages(), 4);
        assert_eq!(GeneratorSpec::new(32).n_stages(), 3);
        for s in [16, 32, 64, 128] {
            let g = GeneratorSpec::new(s);
            assert_eq!(1 << (g.n_stages() + 2), s);
        }
    }

    #[test]
    fn channel_ladders() {
        let g = GeneratorSpec { base_channels: 64, ..GeneratorSpec::new(32) };
        assert_eq!(g.stage_channels(), vec![32, 16, 1]);
        let d = DiscriminatorSpec { base_channels: 64, ..DiscriminatorSpec::new(32) };
        assert_eq!(d.stage_channels(), vec![16, 32, 64]);
    }

    #[test]
    fn rejects_bad_specs() {
        assert!(GeneratorSpec { kernel_size: 5, ..GeneratorSpec::new(32) }.validate().is_err());
        assert!(GeneratorSpec::new(48).validate().is_err());
        assert!(DiscriminatorSpec { base_channels: 6, ..DiscriminatorSpec::new(32) }
            .validate()
            .is_err());
    }

    #[test]
    fn default_kernels_are_distinct() {
        assert!(DiscriminatorSpec::new(32).check_pairing(&GeneratorSpec::new(32)));
        let same = DiscriminatorSpec { kernel_size: 4, ..DiscriminatorSpec::new(32) };
        assert!(!same.check_pairing(&GeneratorSpec::new(32)));
    }
}
