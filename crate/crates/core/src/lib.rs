//! Recovery simulation for individual semantic networks.
//!
//! The pipeline builds a common ground-truth network from word embeddings,
//! individualizes it by triangle-score perturbation, simulates free
//! association and relatedness judgment data from each individual network,
//! infers networks back from that behavior, and scores how well the
//! inferred networks' measures track the truth.

pub mod behavior;
pub mod error;
pub mod evaluation;
pub mod graph;
pub mod groundtruth;
pub mod inference;
pub mod rng;
pub mod runner;
pub mod stats;

pub use error::{Error, Result};
pub use graph::WeightedGraph;
