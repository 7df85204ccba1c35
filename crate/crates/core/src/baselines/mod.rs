//! Probabilistic comparison methods: collapsed Gibbs sampling and
//! KL-divergence k-means.

pub mod cgs;
pub mod kmeans;

pub use cgs::{cgs_fit, estimate_psi_from_sample, CgsConfig, CgsSample, CgsSampler};
pub use kmeans::{kl_kmeans_fit, KMeansConfig, KMeansResult};
