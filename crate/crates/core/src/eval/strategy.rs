use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

/// The four training-set compositions under comparison.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum StrategyId {
    /// Real patches only.
    #[serde(rename = "ORG")]
    Org,
    /// Real patches with random flips.
    #[serde(rename = "AugORG")]
    AugOrg,
    /// Real plus synthetic masses.
    #[serde(rename = "GAN")]
    Gan,
    /// Real plus synthetic masses, with random flips.
    #[serde(rename = "AugGAN")]
    AugGan,
}

impl StrategyId {
    pub const ALL: [StrategyId; 4] = [StrategyId::Org, StrategyId::AugOrg, StrategyId::Gan, StrategyId::AugGan];

    pub fn uses_synthetic(self) -> bool {
        matches!(self, StrategyId::Gan | StrategyId::AugGan)
    }

    pub fn flips(self) -> bool {
        matches!(self, StrategyId::AugOrg | StrategyId::AugGan)
    }

    /// Identifier used in CSV files and configs.
    pub fn as_str(self) -> &'static str {
        match self {
            StrategyId::Org => "ORG",
            StrategyId::AugOrg => "AugORG",
            StrategyId::Gan => "GAN",
            StrategyId::AugGan => "AugGAN",
        }
    }

    /// Human-readable legend label.
    pub fn display_name(self) -> &'static str {
        match self {
            StrategyId::Org => "ORG",
            StrategyId::AugOrg => "Aug ORG",
            StrategyId::Gan => "GAN",
            StrategyId::AugGan => "Aug GAN",
        }
    }
}

impl fmt::Display for StrategyId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for StrategyId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        StrategyId::ALL
            .into_iter()
            .find(|id| id.as_str() == s || id.display_name() == s)
            .ok_or_else(|| Error::invalid(format!("unknown strategy `{s}`")))
    }
}
