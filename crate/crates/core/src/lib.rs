//! Proximity preserving binary codes.
//!
//! Codes are learned one bit at a time. For every new bit the pairwise
//! near/far labels and the codes produced so far are turned into a signed,
//! dense weight matrix `W`, and the bit is the (approximate) maximizer of
//! `bᵀWb` over `b ∈ {±1}ⁿ`. A kernel classifier per bit then extends the
//! code to unseen points, and retrieval happens in Hamming space.
//!
//! The numeric core is generic over the floating point type through
//! [`Scalar`]; the aliases at the crate root pin the common `f64` and `f32`
//! instantiations.
//!
//! Hamming distances follow the doubled convention `d_H = p − cᵢᵀcⱼ`
//! throughout (twice the number of mismatching bits), so thresholds `α`
//! live on the same scale as the trainer's balance point.

pub mod affinity;
pub mod error;
pub mod eval;
pub mod index;
pub mod mincut;
pub mod oos;
pub mod rng;
pub mod scalar;
pub mod trainer;

pub use affinity::{AffinityConfig, AffinityMode, Dataset, FeatureMatrix, Metric, ProximityLabels};
pub use error::{Error, Result};
pub use index::PackedCodes;

pub use mincut::{BitVector, SignedWeightMatrix, SolverReport};
pub use oos::{HashModel, KernelClassifier, KernelConfig};

pub use scalar::Scalar;
pub use trainer::{CodeMatrix, InitMethod, TrainConfig, TrainerState, UpdateScheme};

/// Double precision dataset.
pub type Dataset64 = affinity::Dataset<f64>;
/// Single precision dataset.
pub type Dataset32 = affinity::Dataset<f32>;
/// Double precision signed weight matrix.
pub type WeightMatrix = mincut::SignedWeightMatrix<f64>;
/// Single precision signed weight matrix.
pub type WeightMatrix32 = mincut::SignedWeightMatrix<f32>;
/// Double precision hash model.
pub type Model = oos::HashModel<f64>;
/// Single precision hash model.
pub type Model32 = oos::HashModel<f32>;
