//! Synthetic graph generators for smoke and scaling runs.

use std::collections::HashSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::datasets::symmetric_edges;
use crate::graph::Graph;

#[derive(Debug, Error, PartialEq)]
pub enum GeneratorError {
    #[error("k must be even and satisfy 2 <= k < n (got n={n}, k={k})")]
    BadDegree { n: usize, k: usize },
    #[error("rewiring probability must lie in [0, 1], got {0}")]
    BadBeta(f64),
}

/// Undirected Watts–Strogatz small-world edges: a ring lattice where every
/// node links to its `k/2` clockwise neighbors, each edge rewired to a
/// uniform random endpoint with probability `beta`. No self-loops or
/// duplicate edges are produced.
pub fn watts_strogatz_edges(n: usize, k: usize, beta: f64, seed: u64) -> Result<Vec<(u32, u32)>, GeneratorError> {
    if k < 2 || k % 2 != 0 || k >= n {
        return Err(GeneratorError::BadDegree { n, k });
    }
    if !(0.0..=1.0).contains(&beta) {
        return Err(GeneratorError::BadBeta(beta));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let key = |a: u32, b: u32| if a < b { (a, b) } else { (b, a) };

    let mut present: HashSet<(u32, u32)> = HashSet::with_capacity(n * k / 2);
    let mut degree = vec![k; n];
    let mut edges = Vec::with_capacity(n * k / 2);
    for u in 0..n {
        for j in 1..=k / 2 {
            let v = ((u + j) % n) as u32;
            present.insert(key(u as u32, v));
            edges.push((u as u32, v));
        }
    }
    for edge in edges.iter_mut() {
        if !rng.random_bool(beta) {
            continue;
        }
        let (u, old) = *edge;
        // a node adjacent to everything keeps its edge
        if degree[u as usize] == n - 1 {
            continue;
        }
        let w = loop {
            let w = rng.random_range(0..n as u32);
            if w != u && !present.contains(&key(u, w)) {
                break w;
            }
        };
        present.remove(&key(u, old));
        present.insert(key(u, w));
        degree[old as usize] -= 1;
        degree[w as usize] += 1;
        *edge = (u, w);
    }
    Ok(edges)
}

/// Watts–Strogatz graph with both orientations of every edge.
pub fn watts_strogatz(n: usize, k: usize, beta: f64, seed: u64) -> Result<Graph, GeneratorError> {
    let edges = watts_strogatz_edges(n, k, beta, seed)?;
    Ok(Graph::from_edges(n, &symmetric_edges(&edges)).expect("generated edges are in range"))
}
