use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use ganaug::data::PhantomConfig;
use ganaug::eval::{ClassifierConfig, ExperimentMatrixConfig, StrategyId};
use ganaug::gan::GanTrainConfig;
use serde::{Deserialize, Serialize};

pub const RESOLVED_CONFIG: &str = "resolved_config.toml";

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Paths {
    /// Patch directory (`mass/`, `normal/`, optional manifest).
    pub data_dir: Option<PathBuf>,
    /// Output directory; not persisted, since the resolved config lives in it.
    #[serde(skip_serializing)]
    pub out_dir: Option<PathBuf>,
    pub checkpoint: Option<PathBuf>,
}

/// The experiment matrix without its nested trainer configs, which live in
/// their own sections.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MatrixSection {
    pub k_values: Vec<usize>,
    pub imbalance_ratio: usize,
    pub synthetic_multiplier: f64,
    pub strategies: Vec<StrategyId>,
    pub repetitions: usize,
    pub split_fractions: [f64; 3],
    pub master_seed: u64,
}

impl Default for MatrixSection {
    fn default() -> Self {
        let d = ExperimentMatrixConfig::default();
        MatrixSection {
            k_values: d.k_values,
            imbalance_ratio: d.imbalance_ratio,
            synthetic_multiplier: d.synthetic_multiplier,
            strategies: d.strategies,
            repetitions: d.repetitions,
            split_fractions: d.split_fractions,
            master_seed: d.master_seed,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExtractSection {
    pub image: Option<PathBuf>,
    /// CSV with header `x,y,width,height`.
    pub boxes: Option<PathBuf>,
    /// PGM whose non-zero pixels mark tissue; without it the whole image is tissue.
    pub mask: Option<PathBuf>,
    pub patch_size: usize,
    pub n_negative: usize,
    pub seed: u64,
}

impl Default for ExtractSection {
    fn default() -> Self {
        ExtractSection { image: None, boxes: None, mask: None, patch_size: 128, n_negative: 0, seed: 0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SynthSection {
    pub n: usize,
    pub seed: u64,
}

impl Default for SynthSection {
    fn default() -> Self {
        SynthSection { n: 256, seed: 0 }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub paths: Paths,
    pub phantom: PhantomConfig,
    pub extract: ExtractSection,
    pub synth: SynthSection,
    pub gan: GanTrainConfig,
    pub classifier: ClassifierConfig,
    pub matrix: MatrixSection,
}

impl RunConfig {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        if !path.is_file() {
            bail!("config file not found: {}", path.display());
        }
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("invalid config {}", path.display()))
    }

    pub fn load_or_default(path: Option<&Path>) -> anyhow::Result<Self> {
        path.map_or_else(|| Ok(RunConfig::default()), RunConfig::load)
    }

    pub fn matrix_config(&self) -> ExperimentMatrixConfig {
        let m = &self.matrix;
        ExperimentMatrixConfig {
            k_values: m.k_values.clone(),
            imbalance_ratio: m.imbalance_ratio,
            synthetic_multiplier: m.synthetic_multiplier,
            strategies: m.strategies.clone(),
            repetitions: m.repetitions,
            split_fractions: m.split_fractions,
            classifier: self.classifier.clone(),
            gan: self.gan.clone(),
            master_seed: m.master_seed,
        }
    }

    pub fn write_resolved(&self, dir: &Path) -> anyhow::Result<()> {
        let text = toml::to_string_pretty(self).context("serialising resolved config")?;
        std::fs::write(dir.join(RESOLVED_CONFIG), text)?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip_through_toml() {
        let mut cfg = RunConfig::default();
        cfg.paths.data_dir = Some("data".into());
        let text = toml::to_string_pretty(&cfg).unwrap();
        let back: RunConfig = toml::from_str(&text).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(toml::from_str::<RunConfig>("[gan]\nepoch = 3\n").is_err());
        assert!(toml::from_str::<RunConfig>("[extra]\n").is_err());
        let cfg: RunConfig = toml::from_str("[gan]\nepochs = 3\n").unwrap();
        assert_eq!(cfg.gan.epochs, 3);
    }

    #[test]
    fn matrix_config_takes_trainer_sections() {
        let cfg: RunConfig =
            toml::from_str("[classifier]\nepochs = 4\n[gan]\nepochs = 2\n[matrix]\nk_values = [5, 10]\n").unwrap();
        let m = cfg.matrix_config();
        assert_eq!((m.classifier.epochs, m.gan.epochs, m.k_values), (4, 2, vec![5, 10]));
    }
}
