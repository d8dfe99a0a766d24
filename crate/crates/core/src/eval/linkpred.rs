//! Link prediction: hold out edges, sample non-edges, classify edge features.

use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::features::{edge_features, EdgeOperator};
use super::linear::{logistic_train, LinearOptions};
use super::EvalError;
use crate::graph::Graph;
use crate::trainer::EmbeddingModel;

/// Unique unordered pairs `(min, max)` joined by an edge in either
/// direction, self-loops dropped, sorted.
pub fn undirected_pairs(g: &Graph) -> Vec<(u32, u32)> {
    let mut pairs: Vec<(u32, u32)> = g
        .edges()
        .filter(|(u, v)| u != v)
        .map(|(u, v)| (u.min(v), u.max(v)))
        .collect();
    pairs.sort_unstable();
    pairs.dedup();
    pairs
}

/// Draw `count` distinct unordered non-adjacent pairs `u != v` uniformly,
/// avoiding everything in `exclude` (stored as `(min, max)`).
pub fn sample_negatives<R: Rng + ?Sized>(
    n: usize,
    exclude: &HashSet<(u32, u32)>,
    count: usize,
    rng: &mut R,
) -> Result<Vec<(u32, u32)>, EvalError> {
    let available = (n * n.saturating_sub(1) / 2).saturating_sub(exclude.len());
    if count > available {
        return Err(EvalError::NotEnoughNegatives {
            wanted: count,
            found: available,
        });
    }
    let mut seen = HashSet::with_capacity(count);
    let mut out = Vec::with_capacity(count);
    let mut attempts = 0usize;
    let budget = 100 * count + 10_000;
    while out.len() < count {
        attempts += 1;
        if attempts > budget {
            return Err(EvalError::NotEnoughNegatives {
                wanted: count,
                found: out.len(),
            });
        }
        let u = rng.random_range(0..n) as u32;
        let v = rng.random_range(0..n) as u32;
        if u == v {
            continue;
        }
        let pair = (u.min(v), u.max(v));
        if exclude.contains(&pair) || !seen.insert(pair) {
            continue;
        }
        out.push(pair);
    }
    Ok(out)
}

/// Held-out edges plus sampled non-edges on both sides of the split.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct EdgeSplit {
    pub train_pos: Vec<(u32, u32)>,
    pub train_neg: Vec<(u32, u32)>,
    pub test_pos: Vec<(u32, u32)>,
    pub test_neg: Vec<(u32, u32)>,
}

impl EdgeSplit {
    /// Symmetric graph over the training edges, on the original `n` nodes.
    pub fn train_graph(&self, n: usize) -> Result<Graph, EvalError> {
        let arcs: Vec<(u32, u32)> = self.train_pos.iter().flat_map(|&(u, v)| [(u, v), (v, u)]).collect();
        Ok(Graph::from_edges(n, &arcs)?)
    }
}

/// Hold out `test_fraction` of the undirected edges of `g` and draw
/// `negative_ratio` non-edges per positive for each side. Negatives avoid
/// every edge of `g` and do not repeat across sides.
pub fn split_edges(g: &Graph, test_fraction: f64, negative_ratio: f64, seed: u64) -> Result<EdgeSplit, EvalError> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(EvalError::BadFraction(test_fraction));
    }
    if !(negative_ratio.is_finite() && negative_ratio > 0.0) {
        return Err(EvalError::Task(format!("negative ratio must be positive, got {negative_ratio}")));
    }
    let mut pairs = undirected_pairs(g);
    if pairs.len() < 2 {
        return Err(EvalError::EmptyInput("edge set"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    pairs.shuffle(&mut rng);
    let test_len = ((pairs.len() as f64 * test_fraction).round() as usize).clamp(1, pairs.len() - 1);
    let train_pos = pairs.split_off(test_len);
    let test_pos = pairs;

    let exclude: HashSet<(u32, u32)> = train_pos.iter().chain(&test_pos).copied().collect();
    let train_count = (train_pos.len() as f64 * negative_ratio).round().max(1.0) as usize;
    let test_count = (test_pos.len() as f64 * negative_ratio).round().max(1.0) as usize;
    let mut negatives = sample_negatives(g.node_count(), &exclude, train_count + test_count, &mut rng)?;
    let test_neg = negatives.split_off(train_count);
    Ok(EdgeSplit {
        train_pos,
        train_neg: negatives,
        test_pos,
        test_neg,
    })
}

fn featurize(model: &EmbeddingModel, op: EdgeOperator, pairs: &[(u32, u32)]) -> Result<Vec<Vec<f64>>, EvalError> {
    let n = model.node_count();
    pairs
        .iter()
        .map(|&(u, v)| {
            let (u, v) = (u as usize, v as usize);
            if u >= n || v >= n {
                return Err(EvalError::NodeCountMismatch {
                    model: n,
                    graph: u.max(v) + 1,
                });
            }
            edge_features(op, model.row(u), model.row(v))
        })
        .collect()
}

/// Train a logistic classifier on `op` features of the training pairs and
/// return its accuracy on the test pairs.
pub fn link_prediction_eval(
    model: &EmbeddingModel,
    split: &EdgeSplit,
    op: EdgeOperator,
    seed: u64,
) -> Result<f64, EvalError> {
    if split.train_pos.is_empty() || split.train_neg.is_empty() {
        return Err(EvalError::EmptyInput("training edges"));
    }
    if split.test_pos.is_empty() && split.test_neg.is_empty() {
        return Err(EvalError::EmptyInput("test edges"));
    }
    let mut x = featurize(model, op, &split.train_pos)?;
    x.extend(featurize(model, op, &split.train_neg)?);
    let y: Vec<bool> = (0..x.len()).map(|i| i < split.train_pos.len()).collect();
    let clf = logistic_train(&x, &y, LinearOptions::with_seed(seed))?;

    let mut xt = featurize(model, op, &split.test_pos)?;
    xt.extend(featurize(model, op, &split.test_neg)?);
    let yt: Vec<bool> = (0..xt.len()).map(|i| i < split.test_pos.len()).collect();
    Ok(clf.accuracy(&xt, &yt))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::watts_strogatz;
    use crate::similarity::Order;
    use crate::trainer::init_model;

    #[test]
    fn split_is_disjoint_and_negatives_are_non_edges() {
        let g = watts_strogatz(200, 6, 0.2, 3).unwrap();
        let s = split_edges(&g, 0.3, 1.0, 9).unwrap();
        let all = undirected_pairs(&g);
        assert_eq!(s.train_pos.len() + s.test_pos.len(), all.len());
        let edges: HashSet<_> = all.iter().copied().collect();
        let train: HashSet<_> = s.train_pos.iter().copied().collect();
        assert!(s.test_pos.iter().all(|p| !train.contains(p)));
        let negs: HashSet<_> = s.train_neg.iter().chain(&s.test_neg).copied().collect();
        assert_eq!(negs.len(), s.train_neg.len() + s.test_neg.len());
        assert!(negs.iter().all(|p| !edges.contains(p) && p.0 != p.1));
        assert_eq!(s.train_neg.len(), s.train_pos.len());
        let tg = s.train_graph(200).unwrap();
        assert_eq!(tg.edge_count(), 2 * s.train_pos.len());
    }

    #[test]
    fn separable_construction() {
        // first coordinate carries a sign; linked pairs share it, so their
        // Hadamard feature is positive there and negative for non-links
        let n = 200;
        let mut w = vec![0.0f32; n * 2];
        for v in 0..n {
            let sign = if v % 2 == 0 { 1.0 } else { -1.0 };
            w[v * 2] = sign * (1.0 + (v % 7) as f32 * 0.1);
            w[v * 2 + 1] = 0.3;
        }
        let model = EmbeddingModel::from_matrix(n, 2, w).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut pairs = |same: bool| -> Vec<(u32, u32)> {
            (0..150)
                .map(|_| {
                    let u = rng.random_range(0..n / 2) * 2;
                    let v = rng.random_range(0..n / 2) * 2 + usize::from(!same);
                    (u as u32, v as u32)
                })
                .collect()
        };
        let pos = pairs(true);
        let neg = pairs(false);
        let split = EdgeSplit {
            train_pos: pos[..75].to_vec(),
            train_neg: neg[..75].to_vec(),
            test_pos: pos[75..].to_vec(),
            test_neg: neg[75..].to_vec(),
        };
        let acc = link_prediction_eval(&model, &split, EdgeOperator::Hadamard, 0).unwrap();
        assert!(acc >= 0.95, "accuracy {acc}");
    }

    #[test]
    fn random_embeddings_are_near_chance() {
        let g = watts_strogatz(400, 6, 0.3, 1).unwrap();
        for seed in 0..10 {
            let model = init_model(400, 16, Order::First, 100 + seed).unwrap();
            let split = split_edges(&g, 0.5, 1.0, seed).unwrap();
            let acc = link_prediction_eval(&model, &split, EdgeOperator::Hadamard, seed).unwrap();
            assert!((0.40..=0.60).contains(&acc), "seed {seed}: {acc}");
        }
    }

    #[test]
    fn identical_feature_distributions() {
        // every node has the same row, so positives and negatives coincide
        let model = EmbeddingModel::from_matrix(50, 2, vec![0.5; 100]).unwrap();
        let g = watts_strogatz(50, 4, 0.1, 2).unwrap();
        let split = split_edges(&g, 0.5, 1.0, 4).unwrap();
        let acc = link_prediction_eval(&model, &split, EdgeOperator::Hadamard, 0).unwrap();
        assert!((acc - 0.5).abs() <= 0.02, "accuracy {acc}");
    }

    #[test]
    fn errors() {
        let model = init_model(4, 2, Order::First, 0).unwrap();
        assert!(link_prediction_eval(&model, &EdgeSplit::default(), EdgeOperator::Hadamard, 0).is_err());
        let full = Graph::from_edges(3, &[(0, 1), (1, 2), (0, 2)]).unwrap();
        assert!(matches!(
            split_edges(&full, 0.5, 1.0, 0),
            Err(EvalError::NotEnoughNegatives { .. })
        ));
        assert!(split_edges(&full, 1.0, 1.0, 0).is_err());
    }
}
