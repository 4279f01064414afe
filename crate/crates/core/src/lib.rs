//! Patch-level GAN augmentation for mass classification: data preparation,
//! DCGAN training and synthesis, and the classifier evaluation matrix.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod data;
pub mod error;
pub mod eval;
pub mod gan;
pub mod models;
pub mod nn;
pub mod seed;

pub use error::{Error, Result};
