//! Evaluation protocols over trained embeddings: link prediction, node
//! classification, clustering, graph reconstruction, similarity ranking and
//! the similarity sweep.

use thiserror::Error;

use crate::graph::GraphError;
use crate::similarity::SimilarityError;
use crate::trainer::TrainError;

mod classify;
mod cluster;
mod features;
mod linear;
mod linkpred;
mod ndcg;
mod reconstruct;
mod report;
mod sweep;

pub use classify::{
    classification_eval, read_labels, score_split, split_nodes, ClassificationMode, ClassificationScores, LabeledNodes,
};
pub use cluster::{kmeans, kmeans_points, modularity, modularity_search, nmi, KMeansResult, ModularitySearch, KMEANS_MAX_ITERATIONS};
pub use features::{edge_features, EdgeOperator};
pub use linear::{logistic_train, softmax_train, LinearOptions, LogisticModel, SoftmaxModel};
pub use linkpred::{link_prediction_eval, sample_negatives, split_edges, undirected_pairs, EdgeSplit};
pub use ndcg::{ndcg_at_k, ndcg_for_scores};
pub use reconstruct::{graph_reconstruction, sample_nodes_uniform, ReconstructionReport};
pub use report::{mean_sd, EvalReport, MetricRow, CSV_HEADER};
pub use sweep::{default_grid, hverse_sweep, SweepCell, SweepOutcome, SweepTask, CV_FOLDS};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("empty {0}")]
    EmptyInput(&'static str),
    #[error("training targets contain a single class")]
    SingleClass,
    #[error("label {label} out of range for {classes} classes")]
    LabelOutOfRange { label: usize, classes: usize },
    #[error("cannot form {k} clusters from {n} points")]
    BadClusterCount { k: usize, n: usize },
    #[error("embedding has {model} rows but the graph has {graph} nodes")]
    NodeCountMismatch { model: usize, graph: usize },
    #[error("cutoff k={k} must lie in [1, {n})")]
    BadCutoff { k: usize, n: usize },
    #[error("train fraction must lie in (0, 1), got {0}")]
    BadFraction(f64),
    #[error("labels: {0}")]
    Labels(String),
    #[error("could only find {found} of {wanted} non-edges")]
    NotEnoughNegatives { wanted: usize, found: usize },
    #[error("sweep: {0}")]
    Task(String),
    #[error(transparent)]
    Train(#[from] TrainError),
    #[error(transparent)]
    Similarity(#[from] SimilarityError),
    #[error(transparent)]
    Graph(#[from] GraphError),
}
