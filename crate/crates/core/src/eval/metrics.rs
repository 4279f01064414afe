use serde::{Deserialize, Serialize};

use super::StrategyId;

/// Binary confusion counts with Mass as the positive class.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub tp: u64,
    pub fp: u64,
    pub tn: u64,
    pub fn_: u64,
}

impl ConfusionCounts {
    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.tn + self.fn_
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Scores {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Precision, recall and their harmonic mean; every 0/0 is taken as 0.
pub fn f1_score(c: &ConfusionCounts) -> Scores {
    let precision = ratio(c.tp, c.tp + c.fp);
    let recall = ratio(c.tp, c.tp + c.fn_);
    let f1 = if precision + recall == 0.0 { 0.0 } else { 2.0 * precision * recall / (precision + recall) };
    Scores { precision, recall, f1 }
}

/// Counts from probabilities thresholded at `threshold` (≥ is positive).
pub fn confusion_from_predictions(probs: &[f64], is_mass: &[bool], threshold: f64) -> ConfusionCounts {
    assert_eq!(probs.len(), is_mass.len());
    let mut c = ConfusionCounts::default();
    for (&p, &y) in probs.iter().zip(is_mass) {
        match (p >= threshold, y) {
            (true, true) => c.tp += 1,
            (true, false) => c.fp += 1,
            (false, false) => c.tn += 1,
            (false, true) => c.fn_ += 1,
        }
    }
    c
}

/// One cell of the results table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsRecord {
    pub strategy: StrategyId,
    pub k: usize,
    pub repetition: usize,
    pub seed: u64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub threshold: f64,
    #[serde(skip)]
    pub confusion: ConfusionCounts,
}

impl MetricsRecord {
    pub fn sort_key(&self) -> (StrategyId, usize, usize) {
        (self.strategy, self.k, self.repetition)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn counts(tp: u64, fp: u64, fn_: u64) -> ConfusionCounts {
        ConfusionCounts { tp, fp, tn: 0, fn_ }
    }

    #[test]
    fn worked_examples() {
        let s = f1_score(&counts(10, 0, 0));
        assert_eq!((s.precision, s.recall, s.f1), (1.0, 1.0, 1.0));
        let s = f1_score(&counts(50, 50, 0));
        assert_eq!((s.precision, s.recall), (0.5, 1.0));
        assert!((s.f1 - 2.0 / 3.0).abs() < 1e-15);
        let s = f1_score(&counts(0, 0, 5));
        assert_eq!((s.precision, s.recall, s.f1), (0.0, 0.0, 0.0));
    }

    #[test]
    fn threshold_is_inclusive() {
        let c = confusion_from_predictions(&[0.5, 0.49, 0.9, 0.1], &[true, true, false, false], 0.5);
        assert_eq!(c, ConfusionCounts { tp: 1, fp: 1, tn: 1, fn_: 1 });
    }
}
