use num_traits::Float;

use crate::error::{Error, Result};

/// Linear-interpolation percentile (`q` in [0, 100]) of already sorted data.
pub fn percentile(sorted: &[f64], q: f64) -> f64 {
    assert!(!sorted.is_empty());
    let rank = q / 100.0 * (sorted.len() - 1) as f64;
    let lo = rank.floor() as usize;
    let hi = rank.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (rank - lo as f64)
}

/// Clips at the 1st/99th percentiles, then maps min–max onto [0, 1].
///
/// When the percentile window collapses the raw min–max is used instead; an
/// all-constant input carries no information and maps to zeros.
pub fn histogram_normalize(raw: &[f64]) -> Result<Vec<f64>> {
    if raw.is_empty() {
        return Err(Error::invalid("histogram normalisation of an empty image"));
    }
    if raw.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("histogram normalisation of non-finite values"));
    }
    let mut sorted = raw.to_vec();
    sorted.sort_by(f64::total_cmp);
    let (mut lo, mut hi) = (percentile(&sorted, 1.0), percentile(&sorted, 99.0));
    if hi <= lo {
        lo = sorted[0];
        hi = sorted[sorted.len() - 1];
    }
    if hi <= lo {
        return Ok(vec![0.0; raw.len()]);
    }
    Ok(raw.iter().map(|&v| (v.clamp(lo, hi) - lo) / (hi - lo)).collect())
}

/// Affine map of the values' own [min, max] onto [lo, hi]; a constant input
/// maps to the midpoint.
pub fn normalize_to_range<T: Float>(values: &[T], lo: T, hi: T) -> Result<Vec<T>> {
    if !(lo < hi) {
        return Err(Error::invalid("normalisation range must satisfy lo < hi"));
    }
    let (min, max) = values.iter().fold((T::infinity(), T::neg_infinity()), |(a, b), &v| {
        (a.min(v), b.max(v))
    });
    if values.is_empty() || !(max > min) {
        let two = T::one() + T::one();
        return Ok(vec![(lo + hi) / two; values.len()]);
    }
    let range = max - min;
    Ok(values
        .iter()
        .map(|&v| {
            let t = (v - min) / range;
            (lo * (T::one() - t) + hi * t).max(lo).min(hi)
        })
        .collect())
}
