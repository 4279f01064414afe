//! A small NHWC tensor engine with hand-written backward passes.
//!
//! Everything a DCGAN needs and nothing more: strided convolution, transposed
//! convolution, batch normalisation, pointwise activations, logit-domain
//! binary cross-entropy and Adam. Generic over [`Scalar`] so the same layers
//! run in `f32` for training and `f64` for finite-difference checks.

mod adam;
mod conv;
mod gemm;
pub mod loss;
mod network;
mod norm;
mod scalar;
mod tensor;

pub use adam::{Adam, AdamConfig};
pub use conv::ConvGeom;
pub use network::{Grads, Mode, Network, NetworkBuilder, Op, Param, ParamRole, Tape};
pub use scalar::Scalar;
pub use tensor::Tensor;
