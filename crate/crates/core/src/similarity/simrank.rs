use rand::Rng;

use super::SimilarityError;
use crate::graph::{Graph, ReversedGraph};

/// Largest graph accepted by the exact SimRank computation.
pub const DEFAULT_EXACT_CAP: usize = 2000;

/// Dense symmetric SimRank matrix, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct SimRankMatrix {
    n: usize,
    values: Vec<f64>,
}

impl SimRankMatrix {
    pub fn node_count(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, u: usize, v: usize) -> f64 {
        self.values[u * self.n + v]
    }

    pub fn row(&self, u: usize) -> &[f64] {
        &self.values[u * self.n..(u + 1) * self.n]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }
}

/// Reversed walk of up to `steps` in-edges from `u` followed by the same
/// number of forward steps. Both legs stop early at a node without the
/// needed edges; the forward leg replays only as many steps as the reversed
/// leg actually took.
#[inline]
pub fn simrank_walk<R: Rng + ?Sized>(g: &Graph, gr: &ReversedGraph, u: usize, steps: usize, rng: &mut R) -> usize {
    let mut current = u;
    let mut taken = 0;
    while taken < steps {
        let preds = gr.in_neighbors(current);
        if preds.is_empty() {
            break;
        }
        current = preds[rng.random_range(0..preds.len())] as usize;
        taken += 1;
    }
    for _ in 0..taken {
        let succ = g.neighbors(current);
        if succ.is_empty() {
            break;
        }
        current = succ[rng.random_range(0..succ.len())] as usize;
    }
    current
}

/// SimRank-aware walk sample: the walk length is geometric with
/// continuation probability `sqrt(c)`.
#[inline]
pub fn sample_simrank<R: Rng + ?Sized>(g: &Graph, gr: &ReversedGraph, u: usize, c: f64, rng: &mut R) -> u32 {
    let continuation = c.sqrt();
    let mut steps = 0;
    while rng.random::<f64>() < continuation {
        steps += 1;
    }
    simrank_walk(g, gr, u, steps, rng) as u32
}

/// Exact SimRank by `iterations` rounds of the fixed-point recursion from
/// the identity, with the default node cap.
pub fn exact_simrank_matrix(g: &Graph, c: f64, iterations: usize) -> Result<SimRankMatrix, SimilarityError> {
    exact_simrank_matrix_with_cap(g, c, iterations, DEFAULT_EXACT_CAP)
}

pub fn exact_simrank_matrix_with_cap(
    g: &Graph,
    c: f64,
    iterations: usize,
    cap: usize,
) -> Result<SimRankMatrix, SimilarityError> {
    if g.node_count() > cap {
        return Err(SimilarityError::CapExceeded { n: g.node_count(), cap });
    }
    exact_simrank_matrix_from(g, &g.reverse(), c, iterations, cap)
}

/// Each round computes `S' = c Q S Q^T` off the diagonal, with `Q` the
/// row-normalized in-adjacency (in-neighbor multisets), in `O(n m)`.
pub(crate) fn exact_simrank_matrix_from(
    g: &Graph,
    gr: &ReversedGraph,
    c: f64,
    iterations: usize,
    cap: usize,
) -> Result<SimRankMatrix, SimilarityError> {
    let n = g.node_count();
    if n > cap {
        return Err(SimilarityError::CapExceeded { n, cap });
    }
    if !(c > 0.0 && c < 1.0) {
        return Err(SimilarityError::BadDecay(c));
    }
    if iterations == 0 {
        return Err(SimilarityError::NoIterations);
    }

    let mut sim = vec![0.0; n * n];
    for v in 0..n {
        sim[v * n + v] = 1.0;
    }
    // half[a * n + v] = mean over j in I(v) of sim[a][j]
    let mut half = vec![0.0; n * n];
    let mut next = vec![0.0; n * n];
    for _ in 0..iterations {
        for a in 0..n {
            let row = &sim[a * n..(a + 1) * n];
            let out = &mut half[a * n..(a + 1) * n];
            for (v, slot) in out.iter_mut().enumerate() {
                let preds = gr.in_neighbors(v);
                *slot = if preds.is_empty() {
                    0.0
                } else {
                    preds.iter().map(|&j| row[j as usize]).sum::<f64>() / preds.len() as f64
                };
            }
        }
        for u in 0..n {
            let preds = gr.in_neighbors(u);
            let out = &mut next[u * n..(u + 1) * n];
            out.iter_mut().for_each(|x| *x = 0.0);
            if !preds.is_empty() {
                let scale = c / preds.len() as f64;
                for &i in preds {
                    let src = &half[i as usize * n..(i as usize + 1) * n];
                    for (slot, &x) in out.iter_mut().zip(src) {
                        *slot += scale * x;
                    }
                }
            }
            out[u] = 1.0;
        }
        std::mem::swap(&mut sim, &mut next);
    }
    Ok(SimRankMatrix { n, values: sim })
}
