use rand_distr::{Distribution, Normal};

use super::spec::{DiscriminatorSpec, GeneratorSpec, ModelSpec};
use crate::error::{Error, Result};
use crate::nn::{loss::sigmoid, ConvGeom, Network, NetworkBuilder, ParamRole, Scalar, Tensor};
use crate::seed;

const LEAKY_SLOPE: f64 = 0.2;
const INIT_STD: f64 = 0.02;

fn generator_network<T: Scalar>(spec: &GeneratorSpec) -> Network<T> {
    let k = spec.kernel_size;
    let pad = (k - 2) / 2;
    let mut b = NetworkBuilder::new()
        .conv_transpose(
            "proj",
            ConvGeom {
                in_ch: spec.latent_dim,
                out_ch: spec.base_channels,
                kernel: 4,
                stride: 1,
                pad: 0,
            },
            false,
        )
        .batch_norm("proj.bn", spec.base_channels)
        .relu();
    let mut in_ch = spec.base_channels;
    let stages = spec.stage_channels();
    for (i, &out_ch) in stages.iter().enumerate() {
        let name = format!("up{}", i + 1);
        let geom = ConvGeom { in_ch, out_ch, kernel: k, stride: 2, pad };
        if i + 1 == stages.len() {
            b = b.conv_transpose(&name, geom, true).tanh();
        } else {
            b = b.conv_transpose(&name, geom, false).batch_norm(&format!("{name}.bn"), out_ch).relu();
        }
        in_ch = out_ch;
    }
    b.build()
}

fn discriminator_network<T: Scalar>(spec: &DiscriminatorSpec) -> Network<T> {
    let k = spec.kernel_size;
    let pad = (k - 1) / 2;
    let mut b = NetworkBuilder::new();
    let mut in_ch = 1;
    for (i, &out_ch) in spec.stage_channels().iter().enumerate() {
        let name = format!("down{}", i + 1);
        let geom = ConvGeom { in_ch, out_ch, kernel: k, stride: 2, pad };
        b = if i == 0 {
            b.conv(&name, geom, true)
        } else {
            b.conv(&name, geom, false).batch_norm(&format!("{name}.bn"), out_ch)
        };
        b = b.leaky_relu(LEAKY_SLOPE);
        in_ch = out_ch;
    }
    b.conv("head", ConvGeom { in_ch, out_ch: 1, kernel: 4, stride: 1, pad: 0 }, true)
        .build()
}

/// Zero-initialised network for `spec`; see [`init_network`].
pub fn build_network<T: Scalar>(spec: &ModelSpec) -> Result<Network<T>> {
    spec.validate()?;
    Ok(match spec {
        ModelSpec::Generator(g) => generator_network(g),
        ModelSpec::Discriminator(d) | ModelSpec::Classifier(d) => discriminator_network(d),
    })
}

/// Weights ~ N(0, 0.02), batch-norm scales ~ N(1, 0.02), biases and shifts 0.
pub fn init_network<T: Scalar>(net: &mut Network<T>, rng: &mut impl rand::Rng) {
    let normal = Normal::new(0.0, INIT_STD).expect("valid std");
    for p in &mut net.params {
        match p.role {
            ParamRole::Weight => {
                p.data.iter_mut().for_each(|v| *v = T::lit(normal.sample(rng)))
            }
            ParamRole::Gamma => {
                p.data.iter_mut().for_each(|v| *v = T::lit(1.0 + normal.sample(rng)))
            }
            _ => p.data.iter_mut().for_each(|v| *v = T::zero()),
        }
    }
}

/// A network together with the spec it was built from.
#[derive(Clone, Debug, PartialEq)]
pub struct Model {
    pub spec: ModelSpec,
    pub net: Network<f32>,
}

impl Model {
    pub fn new(spec: ModelSpec, init_seed: u64) -> Result<Self> {
        let mut net = build_network(&spec)?;
        init_network(&mut net, &mut seed::rng(init_seed));
        Ok(Model { spec, net })
    }

    pub fn generator_spec(&self) -> Result<GeneratorSpec> {
        match self.spec {
            ModelSpec::Generator(g) => Ok(g),
            other => Err(Error::invalid(format!("expected a generator, got a {}", other.kind()))),
        }
    }

    pub fn image_size(&self) -> usize {
        self.spec.image_size()
    }
}

/// `latents` is row-major `batch × latent_dim`; output is `B×S×S×1` in
/// [-1, 1].
pub fn generator_forward(model: &Model, latents: &[f32], batch: usize) -> Result<Tensor<f32>> {
    let spec = model.generator_spec()?;
    if latents.len() != batch * spec.latent_dim {
        return Err(Error::invalid(format!(
            "latent batch has {} values, expected {batch}×{}",
            latents.len(),
            spec.latent_dim
        )));
    }
    let z = Tensor::from_vec([batch, 1, 1, spec.latent_dim], latents.to_vec());
    Ok(model.net.forward(&z))
}

fn check_images(model: &Model, images: &Tensor<f32>) -> Result<()> {
    let s = model.image_size();
    if matches!(model.spec, ModelSpec::Generator(_)) {
        return Err(Error::invalid("expected a discriminator or classifier"));
    }
    if images.shape[1..] != [s, s, 1] {
        return Err(Error::invalid(format!(
            "image batch shape {:?} does not match {s}×{s}×1",
            images.shape
        )));
    }
    Ok(())
}

/// Raw logits (inference mode).
pub fn discriminator_logits(model: &Model, images: &Tensor<f32>) -> Result<Vec<f32>> {
    check_images(model, images)?;
    Ok(model.net.forward(images).data)
}

/// Probabilities in (0, 1), one per image. Images are expected in [0, 1].
pub fn discriminator_forward(model: &Model, images: &Tensor<f32>) -> Result<Vec<f64>> {
    // |logit| ≤ 30 keeps the probability strictly inside (0, 1) in f64
    Ok(discriminator_logits(model, images)?
        .iter()
        .map(|&l| sigmoid((l as f64).clamp(-30.0, 30.0)))
        .collect())
}

/// Probability that each patch is a mass.
pub fn classifier_forward(model: &Model, images: &Tensor<f32>) -> Result<Vec<f64>> {
    discriminator_forward(model, images)
}
