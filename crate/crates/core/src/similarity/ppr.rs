use rand::Rng;

use super::{Distribution, SimilarityError};
use crate::graph::Graph;

/// Walk exactly `steps` uniform out-edges from `u`. A step out of a sink
/// moves back to `u`.
#[inline]
pub fn ppr_walk<R: Rng + ?Sized>(g: &Graph, u: usize, steps: usize, rng: &mut R) -> usize {
    let mut current = u;
    for _ in 0..steps {
        current = step_or_restart(g, u, current, rng);
    }
    current
}

#[inline]
fn step_or_restart<R: Rng + ?Sized>(g: &Graph, source: usize, current: usize, rng: &mut R) -> usize {
    let nbrs = g.neighbors(current);
    if nbrs.is_empty() {
        source
    } else {
        nbrs[rng.random_range(0..nbrs.len())] as usize
    }
}

/// Endpoint of a random walk with restart from `u`: the walk length is
/// geometric with `P(L = k) = (1 - alpha) alpha^k`.
#[inline]
pub fn sample_ppr<R: Rng + ?Sized>(g: &Graph, u: usize, alpha: f64, rng: &mut R) -> u32 {
    let mut current = u;
    while rng.random::<f64>() < alpha {
        current = step_or_restart(g, u, current, rng);
    }
    current as u32
}

/// Personalized PageRank row of `u` by power iteration on
/// `pi <- (1 - alpha) e_u + alpha pi A`, where sink rows of `A` are `e_u`.
/// Iterates until the L1 change drops below `tol`.
pub fn exact_ppr_row(g: &Graph, u: usize, alpha: f64, tol: f64) -> Result<Distribution, SimilarityError> {
    let n = g.node_count();
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(SimilarityError::BadAlpha(alpha));
    }
    if tol.is_nan() || tol <= 0.0 {
        return Err(SimilarityError::BadTolerance);
    }
    if u >= n {
        return Err(SimilarityError::NodeOutOfRange { node: u, n });
    }
    let mut pi = vec![0.0; n];
    pi[u] = 1.0;
    let mut next = vec![0.0; n];
    loop {
        next.iter_mut().for_each(|x| *x = 0.0);
        next[u] = 1.0 - alpha;
        for (x, &mass) in pi.iter().enumerate() {
            if mass == 0.0 {
                continue;
            }
            let nbrs = g.neighbors(x);
            if nbrs.is_empty() {
                next[u] += alpha * mass;
            } else {
                let share = alpha * mass / nbrs.len() as f64;
                for &v in nbrs {
                    next[v as usize] += share;
                }
            }
        }
        let change: f64 = pi.iter().zip(&next).map(|(a, b)| (a - b).abs()).sum();
        std::mem::swap(&mut pi, &mut next);
        if change < tol {
            break;
        }
    }
    let sum: f64 = pi.iter().sum();
    pi.iter_mut().for_each(|x| *x /= sum);
    Distribution::new(pi)
}
