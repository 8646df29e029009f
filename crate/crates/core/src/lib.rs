//! Informative COVID-19 tweet classification.
//!
//! The pipeline cleans raw tweets ([`preprocess`]), turns them into sparse
//! bag-of-words or TF-IDF vectors ([`features`]) for the conventional
//! classifiers ([`classical`]), or into fixed-length subword id sequences
//! for a small transformer encoder ([`encoder`]). [`harness`] wires these
//! into the `stats` / `train` / `eval` / `reproduce` workflows.
//!
//! Numeric code is generic over [`Scalar`] (`f32` or `f64`); the aliases
//! below name the instantiations the harness uses.

// Validation is written as `!(x > 0)` throughout so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod classical;
pub mod corpus;
pub mod encoder;
pub mod error;
pub mod features;
pub mod harness;
pub mod metrics;
pub mod numopt;
pub mod preprocess;
pub mod scalar;
pub mod synthetic;

pub use corpus::{Dataset, Label, Tweet};
pub use error::{Error, Result};
pub use scalar::Scalar;

pub type SparseVec = features::SparseVector<f64>;
pub type TfidfModel = features::TfidfModel<f64>;
pub type Featurizer = features::Featurizer<f64>;
pub type ClassicalModel = classical::ClassicalModel<f64>;
pub type EncoderParamsF32 = encoder::EncoderParams<f32>;
pub type TrainedEncoderF32 = encoder::TrainedEncoder<f32>;
