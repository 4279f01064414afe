use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nn::Tensor;

/// Supported patch sides.
pub const PATCH_SIZES: [usize; 3] = [32, 64, 128];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Mass,
    Normal,
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Label::Mass => "mass",
            Label::Normal => "normal",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Source {
    Real,
    Synthetic,
}

/// One square grayscale patch with intensities in [0, 1].
#[derive(Clone, Debug, PartialEq)]
pub struct Patch {
    id: String,
    label: Label,
    source: Source,
    size: usize,
    pixels: Vec<f32>,
}

impl Patch {
    pub fn new(
        id: impl Into<String>,
        label: Label,
        source: Source,
        size: usize,
        pixels: Vec<f32>,
    ) -> Result<Self> {
        let id = id.into();
        if !PATCH_SIZES.contains(&size) {
            return Err(Error::invalid(format!("patch `{id}`: side {size} not in {PATCH_SIZES:?}")));
        }
        if pixels.len() != size * size {
            return Err(Error::invalid(format!(
                "patch `{id}`: {} pixels for a {size}×{size} patch",
                pixels.len()
            )));
        }
        if let Some(v) = pixels.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::invalid(format!("patch `{id}`: pixel {v} outside [0, 1]")));
        }
        Ok(Patch { id, label, source, size, pixels })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn label(&self) -> Label {
        self.label
    }

    pub fn source(&self) -> Source {
        self.source
    }

    pub fn size(&self) -> usize {
        self.size
    }

    /// Row-major pixels.
    pub fn pixels(&self) -> &[f32] {
        &self.pixels
    }

    pub(crate) fn with_pixels(&self, pixels: Vec<f32>) -> Patch {
        debug_assert_eq!(pixels.len(), self.pixels.len());
        Patch { pixels, ..self.clone() }
    }
}

/// Ordered patches of one side length with unique ids.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct PatchPool {
    patches: Vec<Patch>,
    class_counts: BTreeMap<Label, usize>,
}

impl PatchPool {
    pub fn new(patches: Vec<Patch>) -> Result<Self> {
        let mut ids = HashSet::with_capacity(patches.len());
        let mut class_counts = BTreeMap::new();
        for p in &patches {
            if !ids.insert(p.id.as_str()) {
                return Err(Error::invalid(format!("duplicate patch id `{}`", p.id)));
            }
            if p.size != patches[0].size {
                return Err(Error::invalid("patches of different sizes in one pool"));
            }
            *class_counts.entry(p.label).or_insert(0) += 1;
        }
        Ok(PatchPool { patches, class_counts })
    }

    pub fn len(&self) -> usize {
        self.patches.len()
    }

    pub fn is_empty(&self) -> bool {
        self.patches.is_empty()
    }

    pub fn patches(&self) -> &[Patch] {
        &self.patches
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Patch> {
        self.patches.iter()
    }

    pub fn count(&self, label: Label) -> usize {
        self.class_counts.get(&label).copied().unwrap_or(0)
    }

    pub fn class_counts(&self) -> &BTreeMap<Label, usize> {
        &self.class_counts
    }

    /// Side length, or `None` for an empty pool.
    pub fn patch_size(&self) -> Option<usize> {
        self.patches.first().map(|p| p.size)
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.patches.iter().map(|p| p.id.as_str())
    }

    pub fn with_label(&self, label: Label) -> PatchPool {
        self.filter(|p| p.label == label)
    }

    pub fn filter(&self, keep: impl Fn(&Patch) -> bool) -> PatchPool {
        PatchPool::new(self.patches.iter().filter(|p| keep(p)).cloned().collect())
            .expect("subset of a valid pool")
    }

    /// Concatenation; fails on id collisions.
    pub fn concat(pools: &[&PatchPool]) -> Result<PatchPool> {
        PatchPool::new(pools.iter().flat_map(|p| p.patches.iter().cloned()).collect())
    }

    pub fn index_by_id(&self) -> HashMap<&str, usize> {
        self.patches.iter().enumerate().map(|(i, p)| (p.id.as_str(), i)).collect()
    }

    pub fn into_patches(self) -> Vec<Patch> {
        self.patches
    }
}

impl<'a> IntoIterator for &'a PatchPool {
    type Item = &'a Patch;
    type IntoIter = std::slice::Iter<'a, Patch>;

    fn into_iter(self) -> Self::IntoIter {
        self.patches.iter()
    }
}

/// Stacks patches into a `B×S×S×1` tensor.
pub fn batch_tensor<'a>(patches: impl IntoIterator<Item = &'a Patch>) -> Tensor<f32> {
    let mut data = Vec::new();
    let mut n = 0;
    let mut side = 0;
    for p in patches {
        side = p.size;
        data.extend_from_slice(&p.pixels);
        n += 1;
    }
    Tensor::from_vec([n, side, side, 1], data)
}
