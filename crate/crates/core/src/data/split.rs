use std::collections::BTreeMap;

use rand::seq::SliceRandom;

use super::{Label, Patch, PatchPool};
use crate::error::{Error, Result};
use crate::eval::StrategyId;
use crate::seed;

/// Seed-shuffled copy of a pool.
pub fn shuffled(pool: &PatchPool, seed: u64) -> PatchPool {
    let mut patches = pool.patches().to_vec();
    patches.shuffle(&mut seed::rng(seed));
    PatchPool::new(patches).expect("permutation of a valid pool")
}

#[derive(Clone, Debug, PartialEq)]
pub struct DatasetSplit {
    pub train: PatchPool,
    pub validation: PatchPool,
    pub test: PatchPool,
    pub fractions: [f64; 3],
    pub seed: u64,
}

fn floor_share(fraction: f64, n: usize) -> usize {
    // guard against 0.6 · 2215 = 1328.9999…
    (fraction * n as f64 + 1e-9).floor() as usize
}

/// Seeded shuffle, then `floor(f·N)` patches for train and validation and
/// the remainder for test.
pub fn split_dataset(pool: &PatchPool, fractions: [f64; 3], seed: u64) -> Result<DatasetSplit> {
    if fractions.iter().any(|f| !(*f > 0.0)) {
        return Err(Error::invalid(format!("split fractions {fractions:?} must be positive")));
    }
    if (fractions.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
        return Err(Error::invalid(format!("split fractions {fractions:?} must sum to 1")));
    }
    let n = pool.len();
    let n_train = floor_share(fractions[0], n);
    let n_val = floor_share(fractions[1], n).min(n - n_train);
    let mut patches = shuffled(pool, seed).into_patches();
    let test = patches.split_off(n_train + n_val);
    let validation = patches.split_off(n_train);
    Ok(DatasetSplit {
        train: PatchPool::new(patches)?,
        validation: PatchPool::new(validation)?,
        test: PatchPool::new(test)?,
        fractions,
        seed,
    })
}

/// Nested training subsets: `subsets[k]` is the first `k` ids of one
/// seeded permutation.
#[derive(Clone, Debug, PartialEq)]
pub struct SubsetLadder {
    pub sizes: Vec<usize>,
    pub subsets: BTreeMap<usize, Vec<String>>,
}

impl SubsetLadder {
    pub fn subset(&self, k: usize) -> Option<&[String]> {
        self.subsets.get(&k).map(Vec::as_slice)
    }

    pub fn largest(&self) -> Option<&[String]> {
        self.sizes.last().and_then(|&k| self.subset(k))
    }
}

pub fn sample_nested_subsets(pool: &PatchPool, sizes: &[usize], seed: u64) -> Result<SubsetLadder> {
    if sizes.is_empty() || sizes[0] == 0 {
        return Err(Error::invalid("subset sizes must be non-empty and positive"));
    }
    if sizes.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::invalid(format!("subset sizes {sizes:?} must be strictly ascending")));
    }
    let max = *sizes.last().expect("non-empty");
    if max > pool.len() {
        return Err(Error::invalid(format!(
            "subset size {max} exceeds pool of {} patches",
            pool.len()
        )));
    }
    let order: Vec<String> = shuffled(pool, seed).ids().map(str::to_owned).collect();
    let subsets = sizes.iter().map(|&k| (k, order[..k].to_vec())).collect();
    Ok(SubsetLadder { sizes: sizes.to_vec(), subsets })
}

/// Everything a training set is assembled from. `negatives` and `synthetic`
/// are consumed as prefixes, so they must already be in their (seeded)
/// nesting order.
#[derive(Clone, Copy, Debug)]
pub struct TrainingSources<'a> {
    pub positives: &'a PatchPool,
    pub ladder: &'a SubsetLadder,
    pub negatives: &'a PatchPool,
    pub synthetic: Option<&'a PatchPool>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainingSet {
    pub pool: PatchPool,
    /// Random flips at batch assembly.
    pub flip: bool,
    pub n_real_positive: usize,
    pub n_synthetic: usize,
    pub n_negative: usize,
}

/// Training pool for one strategy at subset size `k`: `k` real masses,
/// `round(multiplier·k)` synthetic masses for the GAN strategies, and
/// `ratio·k` normals.
pub fn build_training_set(
    k: usize,
    sources: TrainingSources<'_>,
    strategy: StrategyId,
    ratio: usize,
    multiplier: f64,
) -> Result<TrainingSet> {
    let ids = sources
        .ladder
        .subset(k)
        .ok_or_else(|| Error::invalid(format!("subset ladder has no size {k}")))?;
    let n_negative = ratio * k;
    if sources.negatives.len() < n_negative {
        return Err(Error::invalid(format!(
            "{n_negative} negatives needed, pool has {}",
            sources.negatives.len()
        )));
    }
    let n_synthetic = if strategy.uses_synthetic() { (multiplier * k as f64).round() as usize } else { 0 };
    let synthetic = match (n_synthetic, sources.synthetic) {
        (0, _) => &[][..],
        (n, Some(pool)) if pool.len() >= n => &pool.patches()[..n],
        (n, pool) => {
            return Err(Error::invalid(format!(
                "{n} synthetic patches needed, pool has {}",
                pool.map_or(0, PatchPool::len)
            )))
        }
    };

    let index = sources.positives.index_by_id();
    let mut patches: Vec<Patch> = Vec::with_capacity(k + n_synthetic + n_negative);
    for id in ids {
        let i = *index
            .get(id.as_str())
            .ok_or_else(|| Error::invalid(format!("ladder id `{id}` not in positive pool")))?;
        patches.push(sources.positives.patches()[i].clone());
    }
    patches.extend(synthetic.iter().cloned());
    patches.extend(sources.negatives.patches()[..n_negative].iter().cloned());
    let pool = PatchPool::new(patches)?;
    if pool.count(Label::Mass) != k + n_synthetic || pool.count(Label::Normal) != n_negative {
        return Err(Error::invalid("training sources carry mislabelled patches"));
    }
    Ok(TrainingSet { pool, flip: strategy.flips(), n_real_positive: k, n_synthetic, n_negative })
}
