//! Probability-domain form of the adversarial objectives.
//!
//! Training itself works on logits (`nn::loss`); these functions define the
//! contract and back the oracle tests.

use crate::error::{Error, Result};

fn check_probs(name: &str, ps: &[f64]) -> Result<()> {
    if ps.is_empty() {
        return Err(Error::invalid(format!("{name}: empty batch")));
    }
    if let Some(p) = ps.iter().find(|p| !(**p > 0.0 && **p < 1.0)) {
        return Err(Error::Domain(format!("{name}: probability {p} outside (0, 1)")));
    }
    Ok(())
}

fn mean(xs: impl Iterator<Item = f64>, n: usize) -> f64 {
    xs.sum::<f64>() / n as f64
}

/// `-mean[t·ln D(x) + (1-t)·ln(1-D(x))] - mean[ln(1-D(G(z)))]`, with
/// `t = real_label` (one-sided smoothing; `t = 1` is the unsmoothed loss).
pub fn discriminator_loss(d_real: &[f64], d_fake: &[f64], real_label: f64) -> Result<f64> {
    check_probs("d_real", d_real)?;
    check_probs("d_fake", d_fake)?;
    if !(real_label > 0.0 && real_label <= 1.0) {
        return Err(Error::Domain(format!("real label {real_label} outside (0, 1]")));
    }
    let t = real_label;
    let real = mean(d_real.iter().map(|&p| t * p.ln() + (1.0 - t) * (1.0 - p).ln()), d_real.len());
    let fake = mean(d_fake.iter().map(|&p| (1.0 - p).ln()), d_fake.len());
    Ok(-real - fake)
}

/// Gradients of [`discriminator_loss`] w.r.t. each real and fake probability.
pub fn discriminator_loss_grad(
    d_real: &[f64],
    d_fake: &[f64],
    real_label: f64,
) -> Result<(Vec<f64>, Vec<f64>)> {
    discriminator_loss(d_real, d_fake, real_label)?;
    let t = real_label;
    let (nr, nf) = (d_real.len() as f64, d_fake.len() as f64);
    let gr = d_real.iter().map(|&p| (-t / p + (1.0 - t) / (1.0 - p)) / nr).collect();
    let gf = d_fake.iter().map(|&p| 1.0 / (1.0 - p) / nf).collect();
    Ok((gr, gf))
}

/// Non-saturating generator loss `-mean ln D(G(z))`.
pub fn generator_loss(d_fake: &[f64]) -> Result<f64> {
    check_probs("d_fake", d_fake)?;
    Ok(-mean(d_fake.iter().map(|p| p.ln()), d_fake.len()))
}

pub fn generator_loss_grad(d_fake: &[f64]) -> Result<Vec<f64>> {
    check_probs("d_fake", d_fake)?;
    let n = d_fake.len() as f64;
    Ok(d_fake.iter().map(|&p| -1.0 / p / n).collect())
}

/// Gradient of the saturating alternative `mean ln(1 - D(G(z)))`, for
/// comparison with [`generator_loss_grad`].
pub fn saturating_generator_loss_grad(d_fake: &[f64]) -> Result<Vec<f64>> {
    check_probs("d_fake", d_fake)?;
    let n = d_fake.len() as f64;
    Ok(d_fake.iter().map(|&p| -1.0 / (1.0 - p) / n).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_forms() {
        let ln2 = std::f64::consts::LN_2;
        assert!((discriminator_loss(&[0.5], &[0.5], 1.0).unwrap() - 2.0 * ln2).abs() < 1e-15);
        assert!((generator_loss(&[0.5]).unwrap() - ln2).abs() < 1e-15);
        let smoothed = -(0.9 * 0.9f64.ln() + 0.1 * 0.1f64.ln()) - 0.9f64.ln();
        assert!((discriminator_loss(&[0.9], &[0.1], 0.9).unwrap() - smoothed).abs() < 1e-15);
    }

    #[test]
    fn perfect_players_have_vanishing_loss() {
        let eps = 1e-12;
        assert!(discriminator_loss(&[1.0 - eps], &[eps], 1.0).unwrap() < 1e-9);
        assert!(generator_loss(&[1.0 - eps]).unwrap() < 1e-9);
    }

    #[test]
    fn domain_errors() {
        assert!(matches!(discriminator_loss(&[1.0], &[0.5], 1.0), Err(Error::Domain(_))));
        assert!(matches!(discriminator_loss(&[0.5], &[0.0], 1.0), Err(Error::Domain(_))));
        assert!(matches!(discriminator_loss(&[0.5], &[0.5], 0.0), Err(Error::Domain(_))));
        assert!(matches!(generator_loss(&[f64::NAN]), Err(Error::Domain(_))));
        assert!(generator_loss(&[]).is_err());
    }

    #[test]
    fn early_training_gradient_ratio() {
        let ns = generator_loss_grad(&[0.01]).unwrap()[0].abs();
        let sat = saturating_generator_loss_grad(&[0.01]).unwrap()[0].abs();
        assert!((ns - 100.0).abs() < 1e-12);
        assert!((sat - 1.0 / 0.99).abs() < 1e-12);
        assert!(ns / sat > 98.9);
    }
}
