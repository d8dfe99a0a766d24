//! k-means++ clustering and partition quality scores.

use std::collections::{HashMap, HashSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::EvalError;
use crate::graph::Graph;
use crate::trainer::EmbeddingModel;

pub const KMEANS_MAX_ITERATIONS: usize = 300;

#[derive(Clone, Debug, PartialEq)]
pub struct KMeansResult {
    pub assignment: Vec<usize>,
    /// Row-major `k x dim`.
    pub centroids: Vec<f64>,
    /// Sum of squared distances to the assigned centroid.
    pub inertia: f64,
    pub iterations: usize,
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Cluster the model's rows.
pub fn kmeans(model: &EmbeddingModel, k: usize, seed: u64) -> Result<KMeansResult, EvalError> {
    let data: Vec<f64> = model.matrix().iter().map(|&x| x as f64).collect();
    kmeans_points(&data, model.dim(), k, seed)
}

/// k-means over `data` (row-major, `dim` columns): k-means++ seeding, then
/// Lloyd iterations until the assignment stops changing or
/// [`KMEANS_MAX_ITERATIONS`]. A cluster left empty is re-seeded at the point
/// farthest from its current centroid.
pub fn kmeans_points(data: &[f64], dim: usize, k: usize, seed: u64) -> Result<KMeansResult, EvalError> {
    if dim == 0 || data.is_empty() || data.len() % dim != 0 {
        return Err(EvalError::EmptyInput("points"));
    }
    let n = data.len() / dim;
    if k == 0 || k > n {
        return Err(EvalError::BadClusterCount { k, n });
    }
    let point = |i: usize| &data[i * dim..(i + 1) * dim];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    // k-means++ seeding
    let mut chosen = vec![rng.random_range(0..n)];
    let mut nearest: Vec<f64> = (0..n).map(|i| sq_dist(point(i), point(chosen[0]))).collect();
    while chosen.len() < k {
        let total: f64 = nearest.iter().sum();
        let next = if total > 0.0 {
            let mut target = rng.random::<f64>() * total;
            let mut pick = n - 1;
            for (i, &d) in nearest.iter().enumerate() {
                if d > 0.0 && target < d {
                    pick = i;
                    break;
                }
                target -= d;
            }
            pick
        } else {
            let unused: Vec<usize> = (0..n).filter(|i| !chosen.contains(i)).collect();
            unused[rng.random_range(0..unused.len())]
        };
        chosen.push(next);
        for (i, slot) in nearest.iter_mut().enumerate() {
            *slot = slot.min(sq_dist(point(i), point(next)));
        }
    }
    let mut centroids: Vec<f64> = chosen.iter().flat_map(|&i| point(i).to_vec()).collect();

    let mut assignment = vec![usize::MAX; n];
    let mut iterations = 0;
    loop {
        iterations += 1;
        let mut changed = false;
        for i in 0..n {
            let mut best = 0;
            let mut best_d = f64::INFINITY;
            for c in 0..k {
                let d = sq_dist(point(i), &centroids[c * dim..(c + 1) * dim]);
                if d < best_d {
                    best_d = d;
                    best = c;
                }
            }
            if assignment[i] != best {
                assignment[i] = best;
                changed = true;
            }
        }
        if !changed || iterations >= KMEANS_MAX_ITERATIONS {
            break;
        }
        let mut sums = vec![0.0; k * dim];
        let mut counts = vec![0usize; k];
        for i in 0..n {
            let c = assignment[i];
            counts[c] += 1;
            for (s, &x) in sums[c * dim..(c + 1) * dim].iter_mut().zip(point(i)) {
                *s += x;
            }
        }
        let mut reseeded = HashSet::new();
        for c in 0..k {
            if counts[c] > 0 {
                for (dst, &s) in centroids[c * dim..(c + 1) * dim].iter_mut().zip(&sums[c * dim..(c + 1) * dim]) {
                    *dst = s / counts[c] as f64;
                }
            }
        }
        for c in 0..k {
            if counts[c] == 0 {
                let far = (0..n)
                    .filter(|i| !reseeded.contains(i))
                    .map(|i| {
                        let a = assignment[i];
                        (i, sq_dist(point(i), &centroids[a * dim..(a + 1) * dim]))
                    })
                    .fold((usize::MAX, -1.0), |best, cand| if cand.1 > best.1 { cand } else { best });
                if far.0 != usize::MAX {
                    reseeded.insert(far.0);
                    let p = point(far.0).to_vec();
                    centroids[c * dim..(c + 1) * dim].copy_from_slice(&p);
                }
            }
        }
    }
    let inertia = (0..n)
        .map(|i| {
            let c = assignment[i];
            sq_dist(point(i), &centroids[c * dim..(c + 1) * dim])
        })
        .sum();
    Ok(KMeansResult {
        assignment,
        centroids,
        inertia,
        iterations,
    })
}

fn entropy(counts: impl Iterator<Item = usize>, total: f64) -> f64 {
    counts
        .filter(|&c| c > 0)
        .map(|c| {
            let p = c as f64 / total;
            -p * p.ln()
        })
        .sum()
}

/// Normalized mutual information `I(a; b) / sqrt(H(a) H(b))`. Two
/// single-cluster partitions score 1; if exactly one is a single cluster
/// the score is 0.
pub fn nmi(a: &[usize], b: &[usize]) -> Result<f64, EvalError> {
    if a.len() != b.len() {
        return Err(EvalError::DimensionMismatch {
            expected: a.len(),
            found: b.len(),
        });
    }
    if a.is_empty() {
        return Err(EvalError::EmptyInput("partition"));
    }
    let total = a.len() as f64;
    let mut ca: HashMap<usize, usize> = HashMap::new();
    let mut cb: HashMap<usize, usize> = HashMap::new();
    let mut joint: HashMap<(usize, usize), usize> = HashMap::new();
    for (&x, &y) in a.iter().zip(b) {
        *ca.entry(x).or_default() += 1;
        *cb.entry(y).or_default() += 1;
        *joint.entry((x, y)).or_default() += 1;
    }
    let ha = entropy(ca.values().copied(), total);
    let hb = entropy(cb.values().copied(), total);
    if ha == 0.0 && hb == 0.0 {
        return Ok(1.0);
    }
    if ha == 0.0 || hb == 0.0 {
        return Ok(0.0);
    }
    let mutual: f64 = joint
        .iter()
        .map(|(&(x, y), &nxy)| {
            let nxy = nxy as f64;
            nxy / total * (total * nxy / (ca[&x] as f64 * cb[&y] as f64)).ln()
        })
        .sum();
    Ok((mutual / (ha * hb).sqrt()).clamp(0.0, 1.0))
}

/// Newman modularity of `assignment` on the undirected simple graph
/// underlying `g`: each unordered pair `{u, v}` joined by an edge in either
/// direction counts once, a self-loop adds 2 to its node's degree.
pub fn modularity(g: &Graph, assignment: &[usize]) -> Result<f64, EvalError> {
    let n = g.node_count();
    if assignment.len() != n {
        return Err(EvalError::DimensionMismatch {
            expected: n,
            found: assignment.len(),
        });
    }
    let mut pairs: Vec<(u32, u32)> = g.edges().map(|(u, v)| (u.min(v), u.max(v))).collect();
    pairs.sort_unstable();
    pairs.dedup();
    if pairs.is_empty() {
        return Ok(0.0);
    }
    let m = pairs.len() as f64;
    let mut internal: HashMap<usize, f64> = HashMap::new();
    let mut degree: HashMap<usize, f64> = HashMap::new();
    for &(u, v) in &pairs {
        let (cu, cv) = (assignment[u as usize], assignment[v as usize]);
        *degree.entry(cu).or_default() += 1.0;
        *degree.entry(cv).or_default() += 1.0;
        if cu == cv {
            *internal.entry(cu).or_default() += 1.0;
        }
    }
    Ok(degree
        .iter()
        .map(|(c, &d)| internal.get(c).copied().unwrap_or(0.0) / m - (d / (2.0 * m)).powi(2))
        .sum())
}

#[derive(Clone, Debug, PartialEq)]
pub struct ModularitySearch {
    pub k: usize,
    pub modularity: f64,
    pub assignment: Vec<usize>,
    /// `(k, modularity)` for every tried `k`.
    pub tried: Vec<(usize, f64)>,
}

/// Run k-means for `k = k_min, k_min + step, ...` up to `k_max` (clamped to
/// `n`) and keep the partition with the highest modularity; ties keep the
/// smaller `k`.
pub fn modularity_search(
    model: &EmbeddingModel,
    g: &Graph,
    k_min: usize,
    k_max: usize,
    step: usize,
    seed: u64,
) -> Result<ModularitySearch, EvalError> {
    let n = model.node_count();
    if n != g.node_count() {
        return Err(EvalError::NodeCountMismatch {
            model: n,
            graph: g.node_count(),
        });
    }
    let k_max = k_max.min(n);
    if k_min < 2 || k_min > k_max || step == 0 {
        return Err(EvalError::BadClusterCount { k: k_min, n });
    }
    let data: Vec<f64> = model.matrix().iter().map(|&x| x as f64).collect();
    let mut best: Option<ModularitySearch> = None;
    let mut tried = Vec::new();
    for k in (k_min..=k_max).step_by(step) {
        let assignment = kmeans_points(&data, model.dim(), k, seed)?.assignment;
        let q = modularity(g, &assignment)?;
        tried.push((k, q));
        if best.as_ref().is_none_or(|b| q > b.modularity) {
            best = Some(ModularitySearch {
                k,
                modularity: q,
                assignment,
                tried: Vec::new(),
            });
        }
    }
    let mut best = best.expect("at least one k tried");
    best.tried = tried;
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datasets::{cliques, clique_membership};
    use rand::Rng;
    use proptest::prelude::*;

    #[test]
    fn two_clouds() {
        let mut data = Vec::new();
        for i in 0..20 {
            let offset = if i < 10 { 0.0 } else { 100.0 };
            data.extend([offset + (i as f64 * 0.01), offset - (i as f64 * 0.02)]);
        }
        for seed in 0..5 {
            let r = kmeans_points(&data, 2, 2, seed).unwrap();
            let first = r.assignment[0];
            assert!(r.assignment[..10].iter().all(|&c| c == first));
            assert!(r.assignment[10..].iter().all(|&c| c != first));
        }
    }

    #[test]
    fn identical_points_collapse() {
        let data = vec![1.0; 12];
        let r = kmeans_points(&data, 3, 2, 0).unwrap();
        assert!(r.assignment.iter().all(|&c| c == r.assignment[0]));
        assert_eq!(r.inertia, 0.0);
    }

    #[test]
    fn k_equals_n() {
        let data: Vec<f64> = (0..6).map(|i| (i * i) as f64).collect();
        let r = kmeans_points(&data, 1, 6, 3).unwrap();
        let distinct: HashSet<_> = r.assignment.iter().collect();
        assert_eq!(distinct.len(), 6);
        assert_eq!(r.inertia, 0.0);
        assert!(matches!(kmeans_points(&data, 1, 7, 0), Err(EvalError::BadClusterCount { .. })));
    }

    #[test]
    fn nmi_examples() {
        let a = vec![0, 0, 1, 1, 2, 2];
        assert!((nmi(&a, &a).unwrap() - 1.0).abs() < 1e-12);
        let permuted = vec![5, 5, 3, 3, 9, 9];
        assert!((nmi(&a, &permuted).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(nmi(&[0, 0], &[1, 1]).unwrap(), 1.0);
        assert_eq!(nmi(&[0, 0, 0], &[0, 1, 2]).unwrap(), 0.0);
        assert!(nmi(&[0], &[0, 1]).is_err());
    }

    #[test]
    fn nmi_of_independent_partitions_is_small() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let a: Vec<usize> = (0..10_000).map(|_| rng.random_range(0..2)).collect();
        let b: Vec<usize> = (0..10_000).map(|_| rng.random_range(0..2)).collect();
        assert!(nmi(&a, &b).unwrap() < 0.01);
    }

    #[test]
    fn modularity_examples() {
        let g = cliques(2, 3, false);
        assert!((modularity(&g, &[0, 0, 0, 1, 1, 1]).unwrap() - 0.5).abs() < 1e-12);
        assert!(modularity(&g, &[0; 6]).unwrap().abs() < 1e-12);
        assert!(modularity(&g, &[0; 5]).is_err());
    }

    #[test]
    fn modularity_of_random_split_is_near_zero() {
        let g = crate::generators::watts_strogatz(2000, 10, 1.0, 4).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut assignment: Vec<usize> = (0..2000).map(|i| i % 2).collect();
        rand::seq::SliceRandom::shuffle(assignment.as_mut_slice(), &mut rng);
        assert!(modularity(&g, &assignment).unwrap().abs() < 0.05);
    }

    proptest! {
        #[test]
        fn relabeling_invariance(labels in prop::collection::vec(0usize..4, 20), shift in 1usize..10) {
            let g = cliques(4, 5, true);
            let truth = clique_membership(4, 5);
            let relabeled: Vec<usize> = labels.iter().map(|&c| (c + shift) * 7).collect();
            let q1 = modularity(&g, &labels).unwrap();
            let q2 = modularity(&g, &relabeled).unwrap();
            prop_assert!((q1 - q2).abs() < 1e-12);
            prop_assert!((-0.5..=1.0).contains(&q1));
            let s1 = nmi(&labels, &truth).unwrap();
            let s2 = nmi(&relabeled, &truth).unwrap();
            prop_assert!((s1 - s2).abs() < 1e-12);
            prop_assert!((0.0..=1.0).contains(&s1));
        }
    }
}
