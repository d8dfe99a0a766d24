//! Small built-in graphs used by tests, examples and smoke runs.

use crate::graph::Graph;

/// Undirected edges of Zachary's karate club, 0-indexed.
const KARATE_EDGES: [(u32, u32); 78] = [
    (0, 1), (0, 2), (0, 3), (0, 4), (0, 5), (0, 6), (0, 7), (0, 8), (0, 10), (0, 11),
    (0, 12), (0, 13), (0, 17), (0, 19), (0, 21), (0, 31), (1, 2), (1, 3), (1, 7), (1, 13),
    (1, 17), (1, 19), (1, 21), (1, 30), (2, 3), (2, 7), (2, 8), (2, 9), (2, 13), (2, 27),
    (2, 28), (2, 32), (3, 7), (3, 12), (3, 13), (4, 6), (4, 10), (5, 6), (5, 10), (5, 16),
    (6, 16), (8, 30), (8, 32), (8, 33), (9, 33), (13, 33), (14, 32), (14, 33), (15, 32),
    (15, 33), (18, 32), (18, 33), (19, 33), (20, 32), (20, 33), (22, 32), (22, 33),
    (23, 25), (23, 27), (23, 29), (23, 32), (23, 33), (24, 25), (24, 27), (24, 31),
    (25, 31), (26, 29), (26, 33), (27, 33), (28, 31), (28, 33), (29, 32), (29, 33),
    (30, 32), (30, 33), (31, 32), (31, 33), (32, 33),
];

/// Emit both orientations of every undirected edge.
pub fn symmetric_edges(edges: &[(u32, u32)]) -> Vec<(u32, u32)> {
    edges.iter().flat_map(|&(u, v)| [(u, v), (v, u)]).collect()
}

/// Zachary's karate club (34 nodes, 78 undirected edges) as a symmetric
/// directed graph with 156 arcs.
pub fn karate_club() -> Graph {
    Graph::from_edges(34, &symmetric_edges(&KARATE_EDGES)).expect("static edges are valid")
}

/// `count` disjoint cliques of `size` nodes each; clique `c` holds nodes
/// `c*size .. (c+1)*size`. `bridges` adds undirected edges between the last
/// node of clique `c` and the first node of clique `c+1`.
pub fn cliques(count: usize, size: usize, bridges: bool) -> Graph {
    let mut edges = Vec::new();
    for c in 0..count {
        let base = (c * size) as u32;
        for i in 0..size as u32 {
            for j in (i + 1)..size as u32 {
                edges.push((base + i, base + j));
            }
        }
        if bridges && c + 1 < count {
            edges.push((base + size as u32 - 1, base + size as u32));
        }
    }
    Graph::from_edges(count * size, &symmetric_edges(&edges)).expect("clique edges are valid")
}

/// Community id of every node in [`cliques`].
pub fn clique_membership(count: usize, size: usize) -> Vec<usize> {
    (0..count * size).map(|v| v / size).collect()
}
