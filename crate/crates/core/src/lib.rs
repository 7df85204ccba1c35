//! Hard (small-variance) topic modeling.
//!
//! The objective assigns every token a topic and charges the token's
//! distance `-ln psi[z][w]` plus `lambda` for each distinct topic a document
//! uses. This crate provides the corpus model, a synthetic LDA generator,
//! three optimizers for the objective (Basic, Word, Word+Refine), Gibbs
//! sampling and KL k-means baselines, and the evaluation metrics used to
//! compare them.

pub mod baselines;
pub mod corpus;
pub mod error;
pub mod eval;
pub mod model;
pub mod sva;
pub mod synthgen;
pub mod textio;

pub use corpus::{Corpus, Document, Split, SplitSpec, Vocabulary};
pub use error::{Error, Result};
pub use model::{
    compute_objective, update_topics, FitConfig, Schedule, TopicMatrix, TopicState, DEFAULT_GAMMA,
    INFINITE_DISTANCE,
};
pub use sva::{fit, fit_from, FitResult, Phase, TraceRecord};
pub use synthgen::{generate_lda_corpus, GroundTruth, LdaGenSpec};
