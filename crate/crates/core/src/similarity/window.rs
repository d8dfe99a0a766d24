//! Relationship between skip-gram context windows and PPR walk lengths.

use rand::Rng;

use super::{Distribution, SimilarityError};
use crate::graph::Graph;

/// Integer weights `2 (w - j + 1)` for `j = 1..=w` and their common
/// denominator `w (w + 1)`.
pub fn window_weights(w: usize) -> Result<(Vec<u64>, u64), SimilarityError> {
    if w == 0 {
        return Err(SimilarityError::BadWindow { got: w, min: 1 });
    }
    let w64 = w as u64;
    let numerators = (1..=w64).map(|j| 2 * (w64 - j + 1)).collect();
    Ok((numerators, w64 * (w64 + 1)))
}

/// Probability that a skip-gram pair produced with maximum window `w` spans
/// distance `j`, for `j = 1..=w` (entry `j - 1`).
pub fn deepwalk_window_distribution(w: usize) -> Result<Distribution, SimilarityError> {
    let (numerators, denominator) = window_weights(w)?;
    Distribution::new(numerators.into_iter().map(|x| x as f64 / denominator as f64).collect())
}

/// PPR continuation probability whose walk-length distribution best matches
/// a skip-gram window of size `w`: `(w - 1) / (w + 1)`.
pub fn alpha_for_window(w: usize) -> Result<f64, SimilarityError> {
    if w < 2 {
        return Err(SimilarityError::BadWindow { got: w, min: 2 });
    }
    Ok((w as f64 - 1.0) / (w as f64 + 1.0))
}

/// Simulate skip-gram context sampling over random walks and report the
/// observed frequency of every center-to-context distance.
///
/// Each round picks a uniform center node, walks `w` steps on either side,
/// draws an effective window `b ~ U{1..w}` and emits every context within
/// distance `b` on both sides. Walks stop at sinks, so use a graph without
/// sinks to reproduce the closed form. Rounds continue until at least
/// `pairs` context pairs have been emitted.
pub fn context_distance_frequencies<R: Rng + ?Sized>(g: &Graph, w: usize, pairs: usize, rng: &mut R) -> Vec<f64> {
    assert!(w >= 1, "window must be at least 1");
    let n = g.node_count();
    let mut counts = vec![0u64; w];
    let mut emitted = 0usize;
    let mut side = Vec::with_capacity(w);
    while emitted < pairs {
        let center = rng.random_range(0..n);
        let b = rng.random_range(1..=w);
        for _ in 0..2 {
            side.clear();
            let mut current = center;
            for _ in 0..w {
                let nbrs = g.neighbors(current);
                if nbrs.is_empty() {
                    break;
                }
                current = nbrs[rng.random_range(0..nbrs.len())] as usize;
                side.push(current);
            }
            let reach = b.min(side.len());
            for count in counts.iter_mut().take(reach) {
                *count += 1;
            }
            emitted += reach;
        }
    }
    counts.iter().map(|&c| c as f64 / emitted as f64).collect()
}
