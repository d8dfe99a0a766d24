//! Vertex-similarity measures: one-sample draws for the sampled trainer and
//! exact per-node distribution rows for the exhaustive trainer and for
//! validation.
//!
//! The PPR parameter `alpha` is the *continuation* probability: a walk
//! restarts with probability `1 - alpha` at every step, so `alpha = 0.85` is
//! the classical damping factor and larger values explore farther.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use thiserror::Error;

use crate::graph::{Graph, ReversedGraph};

mod ppr;
mod simrank;
mod window;

pub use ppr::{exact_ppr_row, ppr_walk, sample_ppr};
pub use simrank::{
    exact_simrank_matrix, exact_simrank_matrix_with_cap, sample_simrank, simrank_walk, SimRankMatrix,
    DEFAULT_EXACT_CAP,
};
pub use window::{alpha_for_window, context_distance_frequencies, deepwalk_window_distribution, window_weights};

/// Default PPR continuation probability.
pub const DEFAULT_ALPHA: f64 = 0.85;

/// L1 tolerance used for exact PPR rows.
pub const EXACT_PPR_TOL: f64 = 1e-12;

/// Max absolute SimRank error accepted when iterating to the fixed point.
pub const EXACT_SIMRANK_TOL: f64 = 1e-10;

#[derive(Debug, Error, PartialEq)]
pub enum SimilarityError {
    #[error("PPR alpha must lie strictly inside (0, 1), got {0}")]
    BadAlpha(f64),
    #[error("SimRank decay must lie strictly inside (0, 1), got {0}")]
    BadDecay(f64),
    #[error("cannot parse similarity `{0}`; expected ppr[:ALPHA], adj or simrank[:C]")]
    Parse(String),
    #[error("exact computation needs n <= {cap}, graph has {n} nodes")]
    CapExceeded { n: usize, cap: usize },
    #[error("node {node} out of range for graph with {n} nodes")]
    NodeOutOfRange { node: usize, n: usize },
    #[error("window size must be at least {min}, got {got}")]
    BadWindow { got: usize, min: usize },
    #[error("iteration count must be at least 1")]
    NoIterations,
    #[error("tolerance must be positive")]
    BadTolerance,
    #[error("values do not form a distribution (sum {sum}, n {n})")]
    NotADistribution { sum: f64, n: usize },
    #[error("similarity {0} needs a graph with at least one edge")]
    NoEdges(SimilarityKind),
}

/// Which similarity measure to reconstruct.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SimilarityKind {
    Ppr { alpha: f64 },
    Adjacency,
    SimRank { c: f64 },
}

impl SimilarityKind {
    pub fn ppr(alpha: f64) -> Result<Self, SimilarityError> {
        if alpha > 0.0 && alpha < 1.0 {
            Ok(SimilarityKind::Ppr { alpha })
        } else {
            Err(SimilarityError::BadAlpha(alpha))
        }
    }

    pub fn simrank(c: f64) -> Result<Self, SimilarityError> {
        if c > 0.0 && c < 1.0 {
            Ok(SimilarityKind::SimRank { c })
        } else {
            Err(SimilarityError::BadDecay(c))
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            SimilarityKind::Ppr { .. } => "ppr",
            SimilarityKind::Adjacency => "adj",
            SimilarityKind::SimRank { .. } => "simrank",
        }
    }

    pub fn parameter(&self) -> Option<f64> {
        match *self {
            SimilarityKind::Ppr { alpha } => Some(alpha),
            SimilarityKind::Adjacency => None,
            SimilarityKind::SimRank { c } => Some(c),
        }
    }
}

impl fmt::Display for SimilarityKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.parameter() {
            Some(p) => write!(f, "{}:{}", self.name(), p),
            None => f.write_str(self.name()),
        }
    }
}

impl FromStr for SimilarityKind {
    type Err = SimilarityError;

    /// Accepts `ppr[:ALPHA]`, `adj`/`adjacency` and `simrank[:C]`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let (kind, param) = match s.split_once(':') {
            Some((k, p)) => (k, Some(p)),
            None => (s, None),
        };
        let value = |p: Option<&str>, default: f64| -> Result<f64, SimilarityError> {
            match p {
                None => Ok(default),
                Some(p) => p.trim().parse().map_err(|_| SimilarityError::Parse(s.to_string())),
            }
        };
        match kind.to_ascii_lowercase().as_str() {
            "ppr" => SimilarityKind::ppr(value(param, DEFAULT_ALPHA)?),
            "simrank" => SimilarityKind::simrank(value(param, 0.5)?),
            "adj" | "adjacency" if param.is_none() => Ok(SimilarityKind::Adjacency),
            _ => Err(SimilarityError::Parse(s.to_string())),
        }
    }
}

/// Symmetric (single matrix) or asymmetric (source + context matrix)
/// embedding-space similarity.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Order {
    #[default]
    First,
    Second,
}

impl Order {
    pub fn as_number(&self) -> u8 {
        match self {
            Order::First => 1,
            Order::Second => 2,
        }
    }
}

impl fmt::Display for Order {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_number())
    }
}

impl FromStr for Order {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "1" | "first" => Ok(Order::First),
            "2" | "second" => Ok(Order::Second),
            other => Err(format!("order must be 1 or 2, got `{other}`")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SimilaritySpec {
    pub kind: SimilarityKind,
    pub order: Order,
}

impl SimilaritySpec {
    pub fn new(kind: SimilarityKind, order: Order) -> Self {
        SimilaritySpec { kind, order }
    }
}

impl Default for SimilaritySpec {
    fn default() -> Self {
        SimilaritySpec {
            kind: SimilarityKind::Ppr { alpha: DEFAULT_ALPHA },
            order: Order::First,
        }
    }
}

impl fmt::Display for SimilaritySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}@{}", self.kind, self.order)
    }
}

impl FromStr for SimilaritySpec {
    type Err = SimilarityError;

    /// `KIND[@ORDER]`, first order when the suffix is absent.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (kind, order) = match s.rsplit_once('@') {
            Some((k, o)) => (k, o.parse().map_err(|_| SimilarityError::Parse(s.to_string()))?),
            None => (s, Order::First),
        };
        Ok(SimilaritySpec::new(kind.parse()?, order))
    }
}

/// A nonnegative vector over the nodes summing to one.
#[derive(Clone, Debug, PartialEq)]
pub struct Distribution(Vec<f64>);

impl Distribution {
    pub const SUM_TOLERANCE: f64 = 1e-6;

    pub fn new(values: Vec<f64>) -> Result<Self, SimilarityError> {
        let sum: f64 = values.iter().sum();
        let valid = !values.is_empty()
            && values.iter().all(|&x| x.is_finite() && x >= 0.0)
            && (sum - 1.0).abs() <= Self::SUM_TOLERANCE;
        if valid {
            Ok(Distribution(values))
        } else {
            Err(SimilarityError::NotADistribution { sum, n: values.len() })
        }
    }

    pub fn point_mass(n: usize, u: usize) -> Self {
        let mut values = vec![0.0; n];
        values[u] = 1.0;
        Distribution(values)
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    /// Total-variation distance to another distribution of the same length.
    pub fn total_variation(&self, other: &[f64]) -> f64 {
        0.5 * self.0.iter().zip(other).map(|(a, b)| (a - b).abs()).sum::<f64>()
    }
}

/// Uniform draw from the out-neighbors of `u`; `None` for a sink.
#[inline]
pub fn sample_adjacency<R: Rng + ?Sized>(g: &Graph, u: usize, rng: &mut R) -> Option<u32> {
    let nbrs = g.neighbors(u);
    if nbrs.is_empty() {
        None
    } else {
        Some(nbrs[rng.random_range(0..nbrs.len())])
    }
}

/// Row `u` of the normalized adjacency matrix; a sink row is the point mass on `u`.
pub fn exact_adjacency_row(g: &Graph, u: usize) -> Distribution {
    let n = g.node_count();
    let nbrs = g.neighbors(u);
    if nbrs.is_empty() {
        return Distribution::point_mass(n, u);
    }
    let mut values = vec![0.0; n];
    let share = 1.0 / nbrs.len() as f64;
    for &v in nbrs {
        values[v as usize] += share;
    }
    Distribution(values)
}

/// Draws `v ~ simG(u, ·)` for a fixed graph and measure.
#[derive(Clone, Copy, Debug)]
pub struct Sampler<'a> {
    graph: &'a Graph,
    reversed: &'a ReversedGraph,
    kind: SimilarityKind,
}

impl<'a> Sampler<'a> {
    pub fn new(graph: &'a Graph, reversed: &'a ReversedGraph, kind: SimilarityKind) -> Result<Self, SimilarityError> {
        if matches!(kind, SimilarityKind::Adjacency) && graph.edge_count() == 0 {
            return Err(SimilarityError::NoEdges(kind));
        }
        Ok(Sampler { graph, reversed, kind })
    }

    /// One draw; `None` only for the adjacency measure at a sink.
    #[inline]
    pub fn sample<R: Rng + ?Sized>(&self, u: usize, rng: &mut R) -> Option<u32> {
        match self.kind {
            SimilarityKind::Ppr { alpha } => Some(sample_ppr(self.graph, u, alpha, rng)),
            SimilarityKind::Adjacency => sample_adjacency(self.graph, u, rng),
            SimilarityKind::SimRank { c } => Some(sample_simrank(self.graph, self.reversed, u, c, rng)),
        }
    }

    pub fn kind(&self) -> SimilarityKind {
        self.kind
    }
}

/// Exact `simG(u, ·)` for the given measure.
///
/// SimRank rows drop the diagonal and renormalize; an all-zero row becomes
/// the point mass on `u`.
pub fn exact_row(g: &Graph, gr: &ReversedGraph, kind: SimilarityKind, u: usize) -> Result<Distribution, SimilarityError> {
    let n = g.node_count();
    if u >= n {
        return Err(SimilarityError::NodeOutOfRange { node: u, n });
    }
    match kind {
        SimilarityKind::Ppr { alpha } => exact_ppr_row(g, u, alpha, EXACT_PPR_TOL),
        SimilarityKind::Adjacency => Ok(exact_adjacency_row(g, u)),
        SimilarityKind::SimRank { c } => {
            let matrix = simrank_fixed_point(g, gr, c)?;
            Ok(simrank_target_row(&matrix, u))
        }
    }
}

/// Exact rows for every node. SimRank computes the matrix once.
pub fn exact_rows(g: &Graph, gr: &ReversedGraph, kind: SimilarityKind) -> Result<Vec<Distribution>, SimilarityError> {
    let n = g.node_count();
    match kind {
        SimilarityKind::SimRank { c } => {
            let matrix = simrank_fixed_point(g, gr, c)?;
            Ok((0..n).map(|u| simrank_target_row(&matrix, u)).collect())
        }
        _ => (0..n).map(|u| exact_row(g, gr, kind, u)).collect(),
    }
}

/// Iterations after which the SimRank fixed-point error is below
/// [`EXACT_SIMRANK_TOL`] (the error after `k` iterations is at most `c^(k+1)`).
pub fn simrank_iterations(c: f64) -> usize {
    (EXACT_SIMRANK_TOL.ln() / c.ln()).ceil().max(1.0) as usize
}

fn simrank_fixed_point(g: &Graph, gr: &ReversedGraph, c: f64) -> Result<SimRankMatrix, SimilarityError> {
    simrank::exact_simrank_matrix_from(g, gr, c, simrank_iterations(c), DEFAULT_EXACT_CAP)
}

fn simrank_target_row(matrix: &SimRankMatrix, u: usize) -> Distribution {
    let n = matrix.node_count();
    let mut values = matrix.row(u).to_vec();
    values[u] = 0.0;
    let sum: f64 = values.iter().sum();
    if sum <= 0.0 {
        return Distribution::point_mass(n, u);
    }
    values.iter_mut().for_each(|x| *x /= sum);
    Distribution(values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn parse_specs() {
        assert_eq!("ppr:0.85".parse::<SimilarityKind>(), Ok(SimilarityKind::Ppr { alpha: 0.85 }));
        assert_eq!("ppr".parse::<SimilarityKind>(), Ok(SimilarityKind::Ppr { alpha: 0.85 }));
        assert_eq!("adj".parse::<SimilarityKind>(), Ok(SimilarityKind::Adjacency));
        assert_eq!("simrank:0.25".parse::<SimilarityKind>(), Ok(SimilarityKind::SimRank { c: 0.25 }));
        assert_eq!("simrank:1.5".parse::<SimilarityKind>(), Err(SimilarityError::BadDecay(1.5)));
        assert_eq!("ppr:0".parse::<SimilarityKind>(), Err(SimilarityError::BadAlpha(0.0)));
        assert!(matches!("ppr:x".parse::<SimilarityKind>(), Err(SimilarityError::Parse(_))));
        assert!(matches!("adj:3".parse::<SimilarityKind>(), Err(SimilarityError::Parse(_))));
        assert!(matches!("katz".parse::<SimilarityKind>(), Err(SimilarityError::Parse(_))));
    }

    #[test]
    fn display_round_trips() {
        for s in ["ppr:0.85", "adj", "simrank:0.15"] {
            assert_eq!(s.parse::<SimilarityKind>().unwrap().to_string(), s);
        }
        for s in ["ppr:0.85@1", "adj@2", "simrank:0.15@2"] {
            assert_eq!(s.parse::<SimilaritySpec>().unwrap().to_string(), s);
        }
        assert_eq!("ppr:0.5".parse::<SimilaritySpec>().unwrap().order, Order::First);
        assert!("ppr:0.5@3".parse::<SimilaritySpec>().is_err());
    }

    #[test]
    fn adjacency_sampler_frequencies() {
        // 0 -> {1, 2}; 3 -> {1, 1, 2}
        let g = Graph::from_edges(4, &[(0, 1), (0, 2), (3, 1), (3, 1), (3, 2)]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let draws = 100_000;
        let hits = (0..draws).filter(|_| sample_adjacency(&g, 0, &mut rng) == Some(1)).count();
        assert!((hits as f64 / draws as f64 - 0.5).abs() < 0.005);
        let hits = (0..draws).filter(|_| sample_adjacency(&g, 3, &mut rng) == Some(1)).count();
        assert!((hits as f64 / draws as f64 - 2.0 / 3.0).abs() < 0.01);
        assert_eq!(sample_adjacency(&g, 1, &mut rng), None);
    }

    #[test]
    fn adjacency_rows() {
        let g = Graph::from_edges(3, &[(0, 1), (0, 2)]).unwrap();
        let gr = g.reverse();
        let row = exact_row(&g, &gr, SimilarityKind::Adjacency, 0).unwrap();
        assert_eq!(row.values(), &[0.0, 0.5, 0.5]);
        let sink = exact_row(&g, &gr, SimilarityKind::Adjacency, 2).unwrap();
        assert_eq!(sink.values(), &[0.0, 0.0, 1.0]);
    }

    #[test]
    fn simrank_rows_drop_diagonal() {
        // c -> a, c -> b with a = 0, b = 1, c = 2
        let g = Graph::from_edges(3, &[(2, 0), (2, 1)]).unwrap();
        let gr = g.reverse();
        let kind = SimilarityKind::SimRank { c: 0.6 };
        let row = exact_row(&g, &gr, kind, 0).unwrap();
        assert_eq!(row.values(), &[0.0, 1.0, 0.0]);
        // c has no in-neighbors: every off-diagonal entry is zero
        let row = exact_row(&g, &gr, kind, 2).unwrap();
        assert_eq!(row.values(), &[0.0, 0.0, 1.0]);
    }

    #[test]
    fn ppr_row_on_two_cycle() {
        let g = Graph::from_edges(2, &[(0, 1), (1, 0)]).unwrap();
        let gr = g.reverse();
        let row = exact_row(&g, &gr, SimilarityKind::Ppr { alpha: 0.85 }, 0).unwrap();
        assert!((row.values()[0] - 1.0 / 1.85).abs() < 1e-10);
        assert!((row.values()[1] - 0.85 / 1.85).abs() < 1e-10);
    }

    #[test]
    fn exact_row_rejects_bad_node() {
        let g = Graph::from_edges(2, &[(0, 1)]).unwrap();
        let gr = g.reverse();
        assert_eq!(
            exact_row(&g, &gr, SimilarityKind::Adjacency, 5),
            Err(SimilarityError::NodeOutOfRange { node: 5, n: 2 })
        );
    }

    #[test]
    fn distribution_validation() {
        assert!(Distribution::new(vec![0.5, 0.5]).is_ok());
        assert!(Distribution::new(vec![0.5, 0.6]).is_err());
        assert!(Distribution::new(vec![1.5, -0.5]).is_err());
        assert!(Distribution::new(vec![]).is_err());
    }

    #[test]
    fn adjacency_sampler_needs_edges() {
        let g = Graph::from_edges(2, &[]).unwrap();
        let gr = g.reverse();
        assert!(Sampler::new(&g, &gr, SimilarityKind::Adjacency).is_err());
        assert!(Sampler::new(&g, &gr, SimilarityKind::Ppr { alpha: 0.5 }).is_ok());
    }

    #[test]
    fn simrank_iteration_budget() {
        let c: f64 = 0.6;
        let k = simrank_iterations(c);
        assert!(c.powi(k as i32) <= EXACT_SIMRANK_TOL);
        assert!(c.powi(k as i32 - 1) > EXACT_SIMRANK_TOL);
    }
}
