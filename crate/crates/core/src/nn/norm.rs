use super::Scalar;

pub(crate) const BN_EPS: f64 = 1e-5;

pub(crate) struct NormCache<T> {
    pub xhat: Vec<T>,
    pub inv_std: Vec<T>,
    pub batch_mean: Vec<T>,
    /// Unbiased batch variance, for the running estimate.
    pub batch_var: Vec<T>,
}

/// Batch statistics over all `rows = B·H·W` positions of each channel.
pub(crate) fn bn_forward_train<T: Scalar>(
    x: &[T],
    channels: usize,
    gamma: &[T],
    beta: &[T],
) -> (Vec<T>, NormCache<T>) {
    let rows = x.len() / channels;
    let mut mean = vec![0.0f64; channels];
    for row in x.chunks_exact(channels) {
        for (m, v) in mean.iter_mut().zip(row) {
            *m += v.as_f64();
        }
    }
    mean.iter_mut().for_each(|m| *m /= rows as f64);
    let mut var = vec![0.0f64; channels];
    for row in x.chunks_exact(channels) {
        for ((s, v), m) in var.iter_mut().zip(row).zip(&mean) {
            let d = v.as_f64() - m;
            *s += d * d;
        }
    }
    let inv_std: Vec<T> =
        var.iter().map(|s| T::lit(1.0 / (s / rows as f64 + BN_EPS).sqrt())).collect();
    let mean_t: Vec<T> = mean.iter().map(|&m| T::lit(m)).collect();

    let mut xhat = vec![T::zero(); x.len()];
    let mut y = vec![T::zero(); x.len()];
    for ((xr, hr), yr) in x
        .chunks_exact(channels)
        .zip(xhat.chunks_exact_mut(channels))
        .zip(y.chunks_exact_mut(channels))
    {
        for c in 0..channels {
            let h = (xr[c] - mean_t[c]) * inv_std[c];
            hr[c] = h;
            yr[c] = gamma[c] * h + beta[c];
        }
    }
    let unbiased = (rows.max(2) - 1) as f64;
    let cache = NormCache {
        xhat,
        inv_std,
        batch_mean: mean_t,
        batch_var: var.iter().map(|s| T::lit(s / unbiased)).collect(),
    };
    (y, cache)
}

pub(crate) fn bn_forward_eval<T: Scalar>(
    x: &[T],
    channels: usize,
    gamma: &[T],
    beta: &[T],
    running_mean: &[T],
    running_var: &[T],
) -> Vec<T> {
    let scale: Vec<T> = (0..channels)
        .map(|c| gamma[c] / (running_var[c] + T::lit(BN_EPS)).sqrt())
        .collect();
    let mut y = x.to_vec();
    for row in y.chunks_exact_mut(channels) {
        for c in 0..channels {
            row[c] = (row[c] - running_mean[c]) * scale[c] + beta[c];
        }
    }
    y
}

pub(crate) fn bn_backward<T: Scalar>(
    dy: &[T],
    channels: usize,
    cache: &NormCache<T>,
    gamma: &[T],
    dgamma: &mut [T],
    dbeta: &mut [T],
) -> Vec<T> {
    let rows = dy.len() / channels;
    let mut sum_dy = vec![T::zero(); channels];
    let mut sum_dy_xhat = vec![T::zero(); channels];
    for (dr, hr) in dy.chunks_exact(channels).zip(cache.xhat.chunks_exact(channels)) {
        for c in 0..channels {
            sum_dy[c] += dr[c];
            sum_dy_xhat[c] += dr[c] * hr[c];
        }
    }
    for c in 0..channels {
        dgamma[c] += sum_dy_xhat[c];
        dbeta[c] += sum_dy[c];
    }
    let n = T::lit(rows as f64);
    let coef: Vec<T> = (0..channels).map(|c| gamma[c] * cache.inv_std[c] / n).collect();
    let mut dx = vec![T::zero(); dy.len()];
    for ((xr, dr), hr) in dx
        .chunks_exact_mut(channels)
        .zip(dy.chunks_exact(channels))
        .zip(cache.xhat.chunks_exact(channels))
    {
        for c in 0..channels {
            xr[c] = coef[c] * (n * dr[c] - sum_dy[c] - hr[c] * sum_dy_xhat[c]);
        }
    }
    dx
}
