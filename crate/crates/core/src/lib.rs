//! Node embeddings that preserve vertex-similarity distributions.
//!
//! A model assigns every node a `d`-dimensional vector so that the softmax
//! of dot products from a node reconstructs a chosen similarity distribution
//! (Personalized PageRank, adjacency or SimRank). The crate contains the CSR
//! graph store, similarity samplers and exact oracles, the sampled and
//! exhaustive trainers, and the evaluation protocols.

pub mod datasets;
pub mod eval;
pub mod generators;
pub mod graph;
pub mod similarity;
pub mod trainer;

pub use graph::{load_edge_list, Graph, GraphError, LoadOptions, ReversedGraph};
pub use similarity::{Distribution, Order, SimilarityKind, SimilaritySpec};
pub use trainer::{train_fverse, train_verse, EmbeddingModel, TrainConfig};
