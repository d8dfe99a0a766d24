//! Similarity sweep: train one model per `(order, measure)` cell and keep
//! the one that scores best on a task.

use std::collections::{BTreeSet, HashSet};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::classify::{score_split, ClassificationMode, LabeledNodes};
use super::cluster::{kmeans, modularity_search, nmi};
use super::features::EdgeOperator;
use super::linkpred::{link_prediction_eval, sample_negatives, undirected_pairs, EdgeSplit};
use super::reconstruct::graph_reconstruction;
use super::EvalError;
use crate::graph::{Graph, ReversedGraph};
use crate::similarity::{Order, SimilarityKind, SimilaritySpec};
use crate::trainer::{train_verse, EmbeddingModel, TrainConfig};

pub const CV_FOLDS: usize = 5;

const PPR_GRID: [f64; 6] = [0.45, 0.55, 0.65, 0.75, 0.85, 0.95];
const SIMRANK_GRID: [f64; 6] = [0.15, 0.25, 0.35, 0.45, 0.55, 0.65];

/// The 26-cell grid: for each order, PPR damping values, then SimRank decay
/// values, then adjacency.
pub fn default_grid() -> Vec<SimilaritySpec> {
    let mut grid = Vec::with_capacity(26);
    for order in [Order::First, Order::Second] {
        for a in PPR_GRID {
            grid.push(SimilaritySpec::new(SimilarityKind::Ppr { alpha: a }, order));
        }
        for c in SIMRANK_GRID {
            grid.push(SimilaritySpec::new(SimilarityKind::SimRank { c }, order));
        }
        grid.push(SimilaritySpec::new(SimilarityKind::Adjacency, order));
    }
    grid
}

/// What a sweep cell is scored on.
#[derive(Clone, Debug)]
pub enum SweepTask {
    /// Micro-F1, cross-validated over the labeled nodes.
    Classification { labels: LabeledNodes, mode: ClassificationMode },
    /// Accuracy, cross-validated over the graph's edges and as many sampled
    /// non-edges per edge as `negative_ratio`.
    LinkPrediction { op: EdgeOperator, negative_ratio: f64 },
    /// NMI against `labels` with `k` = number of distinct labels, or the
    /// best modularity over `k_min..=k_max` when no labels are given.
    Clustering {
        labels: Option<Vec<usize>>,
        k_min: usize,
        k_max: usize,
        k_step: usize,
    },
    /// Reconstruction precision on the training graph.
    Reconstruction { sample_nodes: Option<usize> },
}

impl SweepTask {
    pub fn name(&self) -> &'static str {
        match self {
            SweepTask::Classification { .. } => "classify",
            SweepTask::LinkPrediction { .. } => "linkpred",
            SweepTask::Clustering { .. } => "cluster",
            SweepTask::Reconstruction { .. } => "reconstruct",
        }
    }

    pub fn metric(&self) -> &'static str {
        match self {
            SweepTask::Classification { .. } => "micro_f1",
            SweepTask::LinkPrediction { .. } => "accuracy",
            SweepTask::Clustering { labels: Some(_), .. } => "nmi",
            SweepTask::Clustering { labels: None, .. } => "modularity",
            SweepTask::Reconstruction { .. } => "precision",
        }
    }

    fn check(&self, n: usize) -> Result<(), EvalError> {
        match self {
            SweepTask::Classification { labels, .. } => {
                labels.check_range(n)?;
                if labels.len() < 2 * CV_FOLDS {
                    return Err(EvalError::Task(format!(
                        "need at least {} labeled nodes, found {}",
                        2 * CV_FOLDS,
                        labels.len()
                    )));
                }
            }
            SweepTask::LinkPrediction { negative_ratio, .. } => {
                if !(negative_ratio.is_finite() && *negative_ratio > 0.0) {
                    return Err(EvalError::Task(format!("negative ratio must be positive, got {negative_ratio}")));
                }
            }
            SweepTask::Clustering { labels: Some(l), .. } if l.len() != n => {
                return Err(EvalError::DimensionMismatch {
                    expected: n,
                    found: l.len(),
                });
            }
            SweepTask::Clustering {
                labels: None,
                k_min,
                k_max,
                k_step,
            } if *k_min < 2 || k_min > k_max || *k_step == 0 => {
                return Err(EvalError::Task(format!("bad k range {k_min}..={k_max} step {k_step}")));
            }
            _ => {}
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepCell {
    pub spec: SimilaritySpec,
    pub score: f64,
}

#[derive(Clone, Debug)]
pub struct SweepOutcome {
    pub best: SimilaritySpec,
    pub best_score: f64,
    pub cells: Vec<SweepCell>,
    /// Output embedding of the winning cell.
    pub best_model: EmbeddingModel,
}

fn folds<T: Clone>(items: &[T], k: usize) -> Vec<(Vec<T>, Vec<T>)> {
    (0..k)
        .map(|f| {
            let mut train = Vec::new();
            let mut test = Vec::new();
            for (i, x) in items.iter().enumerate() {
                if i % k == f {
                    test.push(x.clone());
                } else {
                    train.push(x.clone());
                }
            }
            (train, test)
        })
        .collect()
}

/// Score `model` on `task` over graph `g`; supervised tasks average over
/// [`CV_FOLDS`] folds drawn with `seed`.
fn score_cell(model: &EmbeddingModel, g: &Graph, task: &SweepTask, seed: u64) -> Result<f64, EvalError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match task {
        SweepTask::Classification { labels, mode } => {
            let mut nodes: Vec<usize> = labels.nodes().collect();
            nodes.shuffle(&mut rng);
            let mut total = 0.0;
            for (train, test) in folds(&nodes, CV_FOLDS) {
                total += score_split(model, labels, &train, &test, *mode, seed)?.micro_f1;
            }
            Ok(total / CV_FOLDS as f64)
        }
        SweepTask::LinkPrediction { op, negative_ratio } => {
            let mut pos = undirected_pairs(g);
            if pos.len() < CV_FOLDS {
                return Err(EvalError::Task(format!("need at least {CV_FOLDS} edges, found {}", pos.len())));
            }
            let exclude: HashSet<(u32, u32)> = pos.iter().copied().collect();
            let count = ((pos.len() as f64 * negative_ratio).round() as usize).max(CV_FOLDS);
            let neg = sample_negatives(g.node_count(), &exclude, count, &mut rng)?;
            pos.shuffle(&mut rng);
            let mut total = 0.0;
            for ((train_pos, test_pos), (train_neg, test_neg)) in folds(&pos, CV_FOLDS).into_iter().zip(folds(&neg, CV_FOLDS)) {
                let split = EdgeSplit {
                    train_pos,
                    train_neg,
                    test_pos,
                    test_neg,
                };
                total += link_prediction_eval(model, &split, *op, seed)?;
            }
            Ok(total / CV_FOLDS as f64)
        }
        SweepTask::Clustering { labels: Some(labels), .. } => {
            let k = labels.iter().collect::<BTreeSet<_>>().len();
            if k < 2 {
                return Err(EvalError::Task("clustering labels have a single class".into()));
            }
            let found = kmeans(model, k, seed)?;
            nmi(&found.assignment, labels)
        }
        SweepTask::Clustering {
            labels: None,
            k_min,
            k_max,
            k_step,
        } => Ok(modularity_search(model, g, *k_min, *k_max, *k_step, seed)?.modularity),
        SweepTask::Reconstruction { sample_nodes } => Ok(graph_reconstruction(model, g, *sample_nodes, seed)?.precision),
    }
}

/// Train one sampled model per grid cell with `cfg`, score it on `task`
/// and return the best cell (ties keep the earlier cell). `on_cell` sees
/// every cell as soon as it is scored.
pub fn hverse_sweep<F>(
    g: &Graph,
    gr: &ReversedGraph,
    task: &SweepTask,
    cfg: &TrainConfig,
    grid: &[SimilaritySpec],
    mut on_cell: F,
) -> Result<SweepOutcome, EvalError>
where
    F: FnMut(&SweepCell),
{
    if grid.is_empty() {
        return Err(EvalError::Task("empty grid".into()));
    }
    task.check(g.node_count())?;
    let mut cells: Vec<SweepCell> = Vec::with_capacity(grid.len());
    let mut best: Option<(usize, EmbeddingModel)> = None;
    for &spec in grid {
        let model = train_verse(g, gr, spec, cfg)?.into_output(false);
        let score = score_cell(&model, g, task, cfg.seed)?;
        log::info!("sweep cell {spec}: {} = {score}", task.metric());
        let cell = SweepCell { spec, score };
        on_cell(&cell);
        let better = match &best {
            None => true,
            Some((i, _)) => score > cells[*i].score,
        };
        cells.push(cell);
        if better {
            best = Some((cells.len() - 1, model));
        }
    }
    let (index, best_model) = best.expect("grid is not empty");
    Ok(SweepOutcome {
        best: cells[index].spec,
        best_score: cells[index].score,
        cells,
        best_model,
    })
}
