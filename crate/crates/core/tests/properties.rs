use proptest::prelude::*;
use verse_core::eval::{modularity, nmi};
use verse_core::graph::read_edge_list;
use verse_core::similarity::exact_rows;
use verse_core::{train_fverse, train_verse, Graph, LoadOptions, Order, SimilarityKind, SimilaritySpec, TrainConfig};

/// Edge lists whose largest index is `n - 1`, so the reloaded graph keeps `n`.
fn edge_list(max_n: usize) -> impl Strategy<Value = (usize, Vec<(u32, u32)>)> {
    (2..=max_n).prop_flat_map(|n| {
        let edge = (0..n as u32, 0..n as u32);
        prop::collection::vec(edge, 0..4 * n).prop_map(move |mut edges| {
            edges.push((0, n as u32 - 1));
            (n, edges)
        })
    })
}

fn kind() -> impl Strategy<Value = SimilarityKind> {
    prop_oneof![
        (0.05f64..0.95).prop_map(|alpha| SimilarityKind::Ppr { alpha }),
        Just(SimilarityKind::Adjacency),
        (0.05f64..0.95).prop_map(|c| SimilarityKind::SimRank { c }),
    ]
}

fn sorted_rows(g: &Graph) -> Vec<Vec<u32>> {
    (0..g.node_count())
        .map(|u| {
            let mut row = g.neighbors(u).to_vec();
            row.sort_unstable();
            row
        })
        .collect()
}

proptest! {
    #[test]
    fn edge_list_round_trip((n, edges) in edge_list(30)) {
        let g = Graph::from_edges(n, &edges).unwrap();
        let mut text = Vec::new();
        g.write_edge_list(&mut text).unwrap();
        let back = read_edge_list(text.as_slice(), LoadOptions::default()).unwrap();
        prop_assert_eq!(back.offsets(), g.offsets());
        prop_assert_eq!(back.targets(), g.targets());
    }

    #[test]
    fn csr_layout_and_transposition((n, edges) in edge_list(30)) {
        let g = Graph::from_edges(n, &edges).unwrap();
        let offsets = g.offsets();
        prop_assert_eq!(offsets[0], 0);
        prop_assert_eq!(offsets[n], g.edge_count());
        prop_assert!(offsets.windows(2).all(|w| w[0] <= w[1]));
        prop_assert!(g.targets().iter().all(|&t| (t as usize) < n));

        let gr = g.reverse();
        prop_assert_eq!(gr.edge_count(), g.edge_count());
        let out: usize = (0..n).map(|u| g.out_degree(u)).sum();
        let inn: usize = (0..n).map(|v| gr.in_degree(v)).sum();
        prop_assert_eq!(out, g.edge_count());
        prop_assert_eq!(inn, g.edge_count());
        prop_assert_eq!(sorted_rows(&gr.reverse()), sorted_rows(&g));
    }

    #[test]
    fn exact_rows_are_distributions((n, edges) in edge_list(15), kind in kind()) {
        let g = Graph::from_edges(n, &edges).unwrap();
        let gr = g.reverse();
        for row in exact_rows(&g, &gr, kind).unwrap() {
            let sum: f64 = row.values().iter().sum();
            prop_assert!((sum - 1.0).abs() <= 1e-6, "{kind}: sum {sum}");
            prop_assert!(row.values().iter().all(|&p| p >= 0.0));
        }
    }

    #[test]
    fn nmi_and_modularity_bounds(
        (n, edges) in edge_list(20),
        seed in any::<u64>(),
        k in 1usize..5,
    ) {
        let g = Graph::from_edges(n, &edges).unwrap();
        let mut state = seed | 1;
        let mut next = || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state % k as u64) as usize
        };
        let a: Vec<usize> = (0..n).map(|_| next()).collect();
        let b: Vec<usize> = (0..n).map(|_| next()).collect();
        let score = nmi(&a, &b).unwrap();
        prop_assert!((0.0..=1.0 + 1e-12).contains(&score), "nmi {score}");
        if let Ok(q) = modularity(&g, &a) {
            prop_assert!((-0.5 - 1e-12..=1.0 + 1e-12).contains(&q), "modularity {q}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    // learning rates well above 1 can diverge; the clamp only bounds logits
    #[test]
    fn training_stays_finite(
        (n, edges) in edge_list(12),
        kind in kind(),
        second in any::<bool>(),
        lr in prop::sample::select(vec![0.0025f32, 0.1, 0.5, 1.0]),
        seed in any::<u64>(),
    ) {
        let g = Graph::from_edges(n, &edges).unwrap();
        let gr = g.reverse();
        let order = if second { Order::Second } else { Order::First };
        let spec = SimilaritySpec::new(kind, order);
        let cfg = TrainConfig { dim: 4, epochs: 20, lr0: lr, seed, ..TrainConfig::default() };
        let sampled = train_verse(&g, &gr, spec, &cfg).unwrap();
        prop_assert!(sampled.is_finite());
        prop_assert_eq!(sampled.context().is_some(), second);
        let exhaustive = train_fverse(&g, &gr, spec, &cfg).unwrap();
        prop_assert!(exhaustive.is_finite());
    }
}
