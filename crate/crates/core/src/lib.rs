//! Graph signal processing toolkit for analysing graph neural networks as
//! low-pass filters followed by ordinary classifiers.
//!
//! The crate is organised bottom-up:
//!
//! - [`graph`]: undirected unweighted graphs, the variation functional, the
//!   degree-weighted inner product and the sparse propagation operators.
//! - [`spectral`]: generalized eigenbasis of `(L, D + γI)`, graph Fourier
//!   transform, spectral filtering and frequency truncation.
//! - [`filters`]: k-step propagation, Laplacian-regularized denoising, random
//!   walk return probabilities and the advisory choice of filter depth.
//! - [`models`]: dense MLP / logistic regression / GCN / SGC / gfNN models with
//!   analytic gradients and Adam.
//! - [`data`]: dataset container and on-disk layout, synthetic generators,
//!   k-NN graphs, noise injection and splits.
//! - [`experiments`]: reproducible experiment drivers and the empirical
//!   verification suite for the filtering bounds.
//!
//! Row-parallel kernels run on rayon when the `parallel` feature is enabled
//! (the default); see [`exec`].

pub mod data;
pub mod error;
pub mod exec;
pub mod experiments;
pub mod filters;
pub mod graph;
pub mod linalg;
pub mod models;
pub mod spectral;

pub use error::{Error, Result};

/// Dense `n × d` matrix of vertex features, one column per graph signal.
pub type FeatureMatrix = ndarray::Array2<f64>;
