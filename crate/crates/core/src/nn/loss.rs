//! Binary cross-entropy in the logit domain.
//!
//! Probabilities never appear explicitly: `-ln σ(l) = softplus(-l)` and
//! `-ln(1 - σ(l)) = softplus(l)`, which stay finite for any finite logit.

use super::Scalar;

pub fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Mean of `-[t·ln σ(l) + (1-t)·ln(1-σ(l))]` and its gradient w.r.t. the
/// logits.
pub fn bce_with_logits<T: Scalar>(logits: &[T], target: f64) -> (f64, Vec<T>) {
    let n = logits.len() as f64;
    let mut loss = 0.0;
    let grad = logits
        .iter()
        .map(|&l| {
            let l = l.as_f64();
            loss += softplus(l) - target * l;
            T::lit((sigmoid(l) - target) / n)
        })
        .collect();
    (loss / n, grad)
}

/// Per-sample targets variant, used by the classifier.
pub fn bce_with_logits_targets<T: Scalar>(logits: &[T], targets: &[f64]) -> (f64, Vec<T>) {
    assert_eq!(logits.len(), targets.len());
    let n = logits.len() as f64;
    let mut loss = 0.0;
    let grad = logits
        .iter()
        .zip(targets)
        .map(|(&l, &t)| {
            let l = l.as_f64();
            loss += softplus(l) - t * l;
            T::lit((sigmoid(l) - t) / n)
        })
        .collect();
    (loss / n, grad)
}

/// Non-saturating generator objective `mean softplus(-l) = -mean ln σ(l)`.
pub fn nonsaturating_with_logits<T: Scalar>(logits: &[T]) -> (f64, Vec<T>) {
    bce_with_logits(logits, 1.0)
}
