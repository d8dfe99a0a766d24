//! Directed graphs in compressed sparse-row form.
//!
//! Node identifiers are dense indices in `[0, n)`. Duplicate edges are kept
//! (multigraph semantics) and self-loops are ordinary edges, so uniform
//! neighbor sampling weights a target by its edge multiplicity.

use std::collections::HashMap;
use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: io::Error,
    },
    #[error("line {line}: expected two node tokens, found {found}")]
    Malformed { line: usize, found: usize },
    #[error("line {line}: invalid node index `{token}`")]
    BadIndex { line: usize, token: String },
    #[error("node {node} out of range for graph with {n} nodes")]
    NodeOutOfRange { node: usize, n: usize },
    #[error("vocabulary has {vocab} entries but graph has {n} nodes")]
    VocabularyMismatch { vocab: usize, n: usize },
}

/// Options for [`load_edge_list`].
#[derive(Clone, Copy, Debug, Default)]
pub struct LoadOptions {
    /// Map arbitrary tokens to indices in order of first appearance.
    pub remap: bool,
    /// Emit both `(u, v)` and `(v, u)` for every line.
    pub symmetrize: bool,
}

/// Immutable CSR graph.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    offsets: Vec<usize>,
    targets: Vec<u32>,
    names: Option<Vec<String>>,
}

impl Graph {
    /// Build a graph on `n` nodes from an edge list. Within each row, targets
    /// keep the order in which they appear in `edges`.
    pub fn from_edges(n: usize, edges: &[(u32, u32)]) -> Result<Self, GraphError> {
        for &(u, v) in edges {
            for node in [u as usize, v as usize] {
                if node >= n {
                    return Err(GraphError::NodeOutOfRange { node, n });
                }
            }
        }
        let mut offsets = vec![0usize; n + 1];
        for &(u, _) in edges {
            offsets[u as usize + 1] += 1;
        }
        for i in 0..n {
            offsets[i + 1] += offsets[i];
        }
        let mut cursor = offsets[..n].to_vec();
        let mut targets = vec![0u32; edges.len()];
        for &(u, v) in edges {
            let slot = &mut cursor[u as usize];
            targets[*slot] = v;
            *slot += 1;
        }
        Ok(Graph {
            offsets,
            targets,
            names: None,
        })
    }

    /// Attach the original node tokens; `names[i]` is the token of node `i`.
    pub fn with_names(mut self, names: Vec<String>) -> Result<Self, GraphError> {
        if names.len() != self.node_count() {
            return Err(GraphError::VocabularyMismatch {
                vocab: names.len(),
                n: self.node_count(),
            });
        }
        self.names = Some(names);
        Ok(self)
    }

    #[inline]
    pub fn node_count(&self) -> usize {
        self.offsets.len() - 1
    }

    #[inline]
    pub fn edge_count(&self) -> usize {
        self.targets.len()
    }

    pub fn offsets(&self) -> &[usize] {
        &self.offsets
    }

    pub fn targets(&self) -> &[u32] {
        &self.targets
    }

    pub fn names(&self) -> Option<&[String]> {
        self.names.as_deref()
    }

    /// Index of an original token, when the graph carries a vocabulary.
    pub fn index_of(&self, token: &str) -> Option<usize> {
        self.names
            .as_ref()
            .and_then(|names| names.iter().position(|name| name == token))
    }

    /// Out-neighbors of `u`, with multiplicity. Panics if `u >= n`.
    #[inline]
    pub fn neighbors(&self, u: usize) -> &[u32] {
        &self.targets[self.offsets[u]..self.offsets[u + 1]]
    }

    /// Checked variant of [`Graph::neighbors`].
    pub fn try_neighbors(&self, u: usize) -> Result<&[u32], GraphError> {
        if u >= self.node_count() {
            return Err(GraphError::NodeOutOfRange {
                node: u,
                n: self.node_count(),
            });
        }
        Ok(self.neighbors(u))
    }

    #[inline]
    pub fn out_degree(&self, u: usize) -> usize {
        self.offsets[u + 1] - self.offsets[u]
    }

    /// All edges in row order.
    pub fn edges(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        (0..self.node_count()).flat_map(move |u| self.neighbors(u).iter().map(move |&v| (u as u32, v)))
    }

    /// Transposed graph: every edge `(u, v)` becomes `(v, u)`.
    pub fn reverse(&self) -> ReversedGraph {
        let reversed: Vec<(u32, u32)> = self.edges().map(|(u, v)| (v, u)).collect();
        let inner = Graph::from_edges(self.node_count(), &reversed)
            .expect("transposed edges stay in range");
        ReversedGraph { inner }
    }

    /// Heap bytes held by the adjacency arrays.
    pub fn heap_bytes(&self) -> usize {
        self.offsets.len() * std::mem::size_of::<usize>() + self.targets.len() * std::mem::size_of::<u32>()
    }

    /// Write the graph as a whitespace-separated edge list. Node tokens are
    /// the original names when present, indices otherwise.
    pub fn write_edge_list<W: Write>(&self, mut out: W) -> io::Result<()> {
        for (u, v) in self.edges() {
            match &self.names {
                Some(names) => writeln!(out, "{} {}", names[u as usize], names[v as usize])?,
                None => writeln!(out, "{u} {v}")?,
            }
        }
        Ok(())
    }
}

/// The transpose of a [`Graph`]; out-neighbors here are in-neighbors of the
/// original.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReversedGraph {
    inner: Graph,
}

impl ReversedGraph {
    /// In-neighbors of `v` in the original graph, with multiplicity.
    #[inline]
    pub fn in_neighbors(&self, v: usize) -> &[u32] {
        self.inner.neighbors(v)
    }

    #[inline]
    pub fn in_degree(&self, v: usize) -> usize {
        self.inner.out_degree(v)
    }

    pub fn node_count(&self) -> usize {
        self.inner.node_count()
    }

    pub fn edge_count(&self) -> usize {
        self.inner.edge_count()
    }

    /// The reversed graph viewed as an ordinary graph.
    pub fn as_graph(&self) -> &Graph {
        &self.inner
    }

    /// Transpose back to the original orientation.
    pub fn reverse(&self) -> Graph {
        self.inner.reverse().inner
    }
}

/// Load a graph from a whitespace-separated edge list.
///
/// Lines starting with `#` and blank lines are skipped. Without `remap`,
/// tokens must be nonnegative integers and `n` is one more than the largest
/// index seen.
pub fn load_edge_list<P: AsRef<Path>>(path: P, opts: LoadOptions) -> Result<Graph, GraphError> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|source| GraphError::Io {
        path: path.display().to_string(),
        source,
    })?;
    read_edge_list(BufReader::new(file), opts).map_err(|e| match e {
        GraphError::Io { source, .. } => GraphError::Io {
            path: path.display().to_string(),
            source,
        },
        other => other,
    })
}

/// Parse an edge list from any buffered reader; see [`load_edge_list`].
pub fn read_edge_list<R: BufRead>(reader: R, opts: LoadOptions) -> Result<Graph, GraphError> {
    let mut edges = Vec::new();
    let mut vocab: HashMap<String, u32> = HashMap::new();
    let mut names: Vec<String> = Vec::new();
    let mut max_index: Option<u32> = None;

    for (lineno, line) in reader.lines().enumerate() {
        let line = line.map_err(|source| GraphError::Io {
            path: String::new(),
            source,
        })?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let tokens: Vec<&str> = trimmed.split_whitespace().collect();
        if tokens.len() != 2 {
            return Err(GraphError::Malformed {
                line: lineno + 1,
                found: tokens.len(),
            });
        }
        let mut ids = [0u32; 2];
        for (slot, token) in ids.iter_mut().zip(&tokens) {
            *slot = if opts.remap {
                match vocab.get(*token) {
                    Some(&id) => id,
                    None => {
                        let id = names.len() as u32;
                        vocab.insert(token.to_string(), id);
                        names.push(token.to_string());
                        id
                    }
                }
            } else {
                let id: u32 = token.parse().map_err(|_| GraphError::BadIndex {
                    line: lineno + 1,
                    token: token.to_string(),
                })?;
                if id == u32::MAX {
                    return Err(GraphError::BadIndex {
                        line: lineno + 1,
                        token: token.to_string(),
                    });
                }
                max_index = Some(max_index.map_or(id, |m| m.max(id)));
                id
            };
        }
        edges.push((ids[0], ids[1]));
        if opts.symmetrize {
            edges.push((ids[1], ids[0]));
        }
    }

    if opts.remap {
        Graph::from_edges(names.len(), &edges)?.with_names(names)
    } else {
        let n = max_index.map_or(0, |m| m as usize + 1);
        Graph::from_edges(n, &edges)
    }
}

/// Write the vocabulary, one original token per line; line number is the index.
pub fn write_vocabulary<P: AsRef<Path>>(names: &[String], path: P) -> io::Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    for name in names {
        writeln!(out, "{name}")?;
    }
    out.flush()
}

pub fn read_vocabulary<P: AsRef<Path>>(path: P) -> io::Result<Vec<String>> {
    let reader = BufReader::new(File::open(path)?);
    reader.lines().collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str, opts: LoadOptions) -> Result<Graph, GraphError> {
        read_edge_list(text.as_bytes(), opts)
    }

    fn star() -> Graph {
        Graph::from_edges(4, &[(0, 1), (0, 2), (0, 3)]).unwrap()
    }

    #[test]
    fn two_cycle() {
        let g = parse("0 1\n1 0\n", LoadOptions::default()).unwrap();
        assert_eq!(g.node_count(), 2);
        assert_eq!(g.edge_count(), 2);
        assert_eq!(g.neighbors(0), &[1]);
        assert_eq!(g.neighbors(1), &[0]);
    }

    #[test]
    fn remap_first_appearance() {
        let g = parse("a b\nb c\n", LoadOptions { remap: true, ..Default::default() }).unwrap();
        assert_eq!(g.node_count(), 3);
        assert_eq!(g.edge_count(), 2);
        assert_eq!(g.names().unwrap(), &["a", "b", "c"]);
        assert_eq!(g.index_of("c"), Some(2));
        assert_eq!(g.neighbors(0), &[1]);
    }

    #[test]
    fn duplicates_and_comments() {
        let g = parse("# header\n0 1\n\n0 1\n", LoadOptions::default()).unwrap();
        assert_eq!(g.edge_count(), 2);
        assert_eq!(g.out_degree(0), 2);
        assert_eq!(g.neighbors(0), &[1, 1]);
    }

    #[test]
    fn symmetrize_doubles_edges() {
        let g = parse("0 1\n1 2\n", LoadOptions { symmetrize: true, ..Default::default() }).unwrap();
        assert_eq!(g.edge_count(), 4);
        assert_eq!(g.neighbors(1), &[0, 2]);
    }

    #[test]
    fn malformed_lines() {
        assert!(matches!(
            parse("0 1 2\n", LoadOptions::default()),
            Err(GraphError::Malformed { line: 1, found: 3 })
        ));
        assert!(matches!(
            parse("0 1\n3\n", LoadOptions::default()),
            Err(GraphError::Malformed { line: 2, found: 1 })
        ));
        assert!(matches!(parse("a b\n", LoadOptions::default()), Err(GraphError::BadIndex { .. })));
        assert!(matches!(parse("-1 0\n", LoadOptions::default()), Err(GraphError::BadIndex { .. })));
        assert!(matches!(
            parse("0 99999999999\n", LoadOptions::default()),
            Err(GraphError::BadIndex { .. })
        ));
    }

    #[test]
    fn unreadable_file() {
        let err = load_edge_list("/nonexistent/graph.edges", LoadOptions::default()).unwrap_err();
        assert!(matches!(err, GraphError::Io { .. }));
    }

    #[test]
    fn star_neighbors() {
        let g = star();
        assert_eq!(g.neighbors(0), &[1, 2, 3]);
        assert!(g.neighbors(1).is_empty());
        assert!(g.try_neighbors(4).is_err());
    }

    #[test]
    fn reverse_star() {
        let r = star().reverse();
        assert!(r.in_neighbors(0).is_empty());
        for v in 1..4 {
            assert_eq!(r.in_neighbors(v), &[0]);
        }
        assert_eq!(r.edge_count(), 3);
    }

    #[test]
    fn reverse_single_edge_and_cycle() {
        let g = Graph::from_edges(2, &[(0, 1)]).unwrap();
        let r = g.reverse();
        assert_eq!(r.as_graph().edges().collect::<Vec<_>>(), vec![(1, 0)]);

        let cycle = Graph::from_edges(2, &[(0, 1), (1, 0)]).unwrap();
        assert_eq!(cycle.reverse().as_graph(), &cycle);
    }

    #[test]
    fn edge_out_of_range() {
        assert!(matches!(
            Graph::from_edges(2, &[(0, 2)]),
            Err(GraphError::NodeOutOfRange { node: 2, n: 2 })
        ));
    }

    #[test]
    fn vocabulary_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("vocab.txt");
        let names = vec!["x".to_string(), "y".to_string()];
        write_vocabulary(&names, &path).unwrap();
        assert_eq!(read_vocabulary(&path).unwrap(), names);
    }
}
