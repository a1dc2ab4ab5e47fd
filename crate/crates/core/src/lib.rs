//! Vertex nomination across a clean graph and an adversarially contaminated
//! copy of it.
//!
//! The crate covers the whole pipeline:
//!
//! * [`models`]: stochastic blockmodel and generalized random dot product
//!   graph samplers, correlated pairs, block contamination and diffuse noise.
//! * [`spectral`]: adjacency spectral embedding with elbow-based dimension
//!   selection and signature estimation.
//! * [`clustering`]: BIC-selected Gaussian mixtures, K-means, the penalized
//!   robust K-means used to strip diffuse noise, and block-matrix estimates.
//! * [`regularization`]: model-space block trimming, two-stage cleaning, the
//!   degree-trimming baseline and the matching-separation checker.
//! * [`nomination`]: Mahalanobis ranking and rank-at-k / precision-at-k
//!   evaluation.
//! * [`experiment`]: the Monte Carlo harness behind the `vnreg` binary.
//!
//! Every randomized entry point takes an explicit `u64` seed; see [`rng`].

pub mod clustering;
pub mod error;
pub mod experiment;
pub mod graph;
pub mod io;
pub mod linalg;
pub mod models;
pub mod nomination;
pub mod regularization;
pub mod rng;
pub mod spectral;

pub use error::{Error, Result};
pub use graph::Graph;
pub use linalg::Signature;
