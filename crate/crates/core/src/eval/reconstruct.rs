//! Graph reconstruction: do a node's nearest rows by cosine similarity
//! coincide with its out-neighbors?

use std::cmp::Ordering;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::EvalError;
use crate::graph::Graph;
use crate::trainer::EmbeddingModel;

#[derive(Clone, Debug, PartialEq)]
pub struct ReconstructionReport {
    /// Mean precision over evaluated nodes.
    pub precision: f64,
    /// Nodes that entered the mean.
    pub evaluated: usize,
    /// Evaluated nodes whose row is all zeros; each scored 0.
    pub zero_rows: Vec<usize>,
}

/// `count` distinct nodes of `[0, n)` drawn uniformly with `seed`, sorted;
/// every node when `count >= n`.
pub fn sample_nodes_uniform(n: usize, count: usize, seed: u64) -> Vec<usize> {
    if count >= n {
        return (0..n).collect();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut picked = sample(&mut rng, n, count).into_vec();
    picked.sort_unstable();
    picked
}

/// For every evaluated node `u` with `k > 0` distinct out-neighbors other
/// than itself, rank all `v != u` by descending cosine similarity (ties by
/// ascending index) and score `|top k ∩ neighbors(u)| / k`. With
/// `sample_nodes`, a uniform sample of that many nodes is evaluated.
pub fn graph_reconstruction(
    model: &EmbeddingModel,
    g: &Graph,
    sample_nodes: Option<usize>,
    seed: u64,
) -> Result<ReconstructionReport, EvalError> {
    let n = g.node_count();
    if model.node_count() != n {
        return Err(EvalError::NodeCountMismatch {
            model: model.node_count(),
            graph: n,
        });
    }
    let nodes = match sample_nodes {
        Some(count) => sample_nodes_uniform(n, count, seed),
        None => (0..n).collect(),
    };
    let norms: Vec<f64> = (0..n)
        .map(|v| model.row(v).iter().map(|&x| (x as f64).powi(2)).sum::<f64>().sqrt())
        .collect();

    let mut total = 0.0;
    let mut evaluated = 0;
    let mut zero_rows = Vec::new();
    let mut scored: Vec<(f64, usize)> = Vec::with_capacity(n);
    for u in nodes {
        let mut nbrs: Vec<u32> = g.neighbors(u).iter().copied().filter(|&v| v as usize != u).collect();
        nbrs.sort_unstable();
        nbrs.dedup();
        let k = nbrs.len();
        if k == 0 {
            continue;
        }
        evaluated += 1;
        if norms[u] == 0.0 {
            zero_rows.push(u);
            continue;
        }
        let row = model.row(u);
        scored.clear();
        scored.extend((0..n).filter(|&v| v != u).map(|v| {
            let cos = if norms[v] == 0.0 {
                0.0
            } else {
                row.iter().zip(model.row(v)).map(|(&a, &b)| a as f64 * b as f64).sum::<f64>() / (norms[u] * norms[v])
            };
            (cos, v)
        }));
        let by_rank = |a: &(f64, usize), b: &(f64, usize)| b.0.partial_cmp(&a.0).unwrap_or(Ordering::Equal).then(a.1.cmp(&b.1));
        if k < scored.len() {
            scored.select_nth_unstable_by(k - 1, by_rank);
        }
        let hits = scored[..k.min(scored.len())]
            .iter()
            .filter(|(_, v)| nbrs.binary_search(&(*v as u32)).is_ok())
            .count();
        total += hits as f64 / k as f64;
    }
    if !zero_rows.is_empty() {
        log::warn!("{} node(s) have all-zero embeddings; scored as 0", zero_rows.len());
    }
    Ok(ReconstructionReport {
        precision: if evaluated == 0 { 0.0 } else { total / evaluated as f64 },
        evaluated,
        zero_rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datasets::cliques;
    use crate::similarity::Order;
    use crate::trainer::init_model;
    use proptest::prelude::*;

    fn adjacency_rows(g: &Graph) -> EmbeddingModel {
        let n = g.node_count();
        let mut w = vec![0.0f32; n * n];
        for (u, v) in g.edges() {
            w[u as usize * n + v as usize] = 1.0;
        }
        EmbeddingModel::from_matrix(n, n, w).unwrap()
    }

    #[test]
    fn adjacency_indicator_on_cliques_is_perfect() {
        let g = cliques(2, 6, false);
        let r = graph_reconstruction(&adjacency_rows(&g), &g, None, 0).unwrap();
        assert_eq!(r.precision, 1.0);
        assert_eq!(r.evaluated, 12);
    }

    #[test]
    fn random_embeddings_on_sparse_graph() {
        let g = crate::generators::watts_strogatz(1000, 4, 0.1, 1).unwrap();
        let m = init_model(1000, 16, Order::First, 2).unwrap();
        let r = graph_reconstruction(&m, &g, None, 0).unwrap();
        assert!(r.precision < 0.05, "precision {}", r.precision);
        let sampled = graph_reconstruction(&m, &g, Some(100), 5).unwrap();
        assert_eq!(sampled.evaluated, 100);
    }

    #[test]
    fn sinks_excluded_zero_rows_flagged() {
        // 0 -> 1, 0 -> 2; 1 and 2 are sinks
        let g = Graph::from_edges(3, &[(0, 1), (0, 2)]).unwrap();
        let m = EmbeddingModel::from_matrix(3, 2, vec![1.0, 0.0, 1.0, 0.1, 0.9, 0.1]).unwrap();
        let r = graph_reconstruction(&m, &g, None, 0).unwrap();
        assert_eq!(r.evaluated, 1);
        assert_eq!(r.precision, 1.0);

        let zero = EmbeddingModel::from_matrix(3, 2, vec![0.0, 0.0, 1.0, 0.1, 0.9, 0.1]).unwrap();
        let r = graph_reconstruction(&zero, &g, None, 0).unwrap();
        assert_eq!(r.zero_rows, vec![0]);
        assert_eq!(r.precision, 0.0);
    }

    #[test]
    fn node_count_mismatch() {
        let g = cliques(1, 3, false);
        let m = init_model(4, 2, Order::First, 0).unwrap();
        assert!(matches!(
            graph_reconstruction(&m, &g, None, 0),
            Err(EvalError::NodeCountMismatch { model: 4, graph: 3 })
        ));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn invariant_under_row_scaling_and_rotation(
            seed in 0u64..1000,
            exponents in prop::collection::vec(-6i32..7, 30),
            perm in Just([0usize, 1, 2]).prop_shuffle(),
            signs in prop::array::uniform3(prop::bool::ANY),
        ) {
            // power-of-two scales and signed coordinate permutations are
            // exact in floating point, so rankings cannot drift
            let g = crate::generators::watts_strogatz(30, 4, 0.3, seed).unwrap();
            let m = init_model(30, 3, Order::First, seed).unwrap();
            let base = graph_reconstruction(&m, &g, None, 0).unwrap().precision;

            let scaled: Vec<f32> = (0..30)
                .flat_map(|v| {
                    let s = 2f32.powi(exponents[v]);
                    m.row(v).iter().map(move |&x| x * s).collect::<Vec<_>>()
                })
                .collect();
            let scaled = EmbeddingModel::from_matrix(30, 3, scaled).unwrap();
            prop_assert_eq!(graph_reconstruction(&scaled, &g, None, 0).unwrap().precision, base);

            let rotated: Vec<f32> = (0..30)
                .flat_map(|v| {
                    let r = m.row(v);
                    (0..3).map(|i| if signs[i] { -r[perm[i]] } else { r[perm[i]] }).collect::<Vec<_>>()
                })
                .collect();
            let rotated = EmbeddingModel::from_matrix(30, 3, rotated).unwrap();
            prop_assert_eq!(graph_reconstruction(&rotated, &g, None, 0).unwrap().precision, base);
        }
    }
}
