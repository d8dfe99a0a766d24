use verse_core::datasets::{clique_membership, cliques, karate_club};
use verse_core::eval::{classification_eval, default_grid, hverse_sweep, ClassificationMode, LabeledNodes, SweepTask};
use verse_core::similarity::exact_rows;
use verse_core::trainer::{kl_objective, train_fverse_with};
use verse_core::{
    train_verse, Distribution, EmbeddingModel, Graph, Order, SimilarityKind, SimilaritySpec, TrainConfig,
};

fn ppr_first() -> SimilaritySpec {
    SimilaritySpec::new(SimilarityKind::Ppr { alpha: 0.85 }, Order::First)
}

fn mean_dots(model: &EmbeddingModel, membership: &[usize]) -> (f64, f64) {
    let (mut within, mut across) = ((0.0, 0), (0.0, 0));
    for u in 0..membership.len() {
        for v in 0..membership.len() {
            if u == v {
                continue;
            }
            let slot = if membership[u] == membership[v] { &mut within } else { &mut across };
            slot.0 += model.logit(u, v);
            slot.1 += 1;
        }
    }
    (within.0 / within.1 as f64, across.0 / across.1 as f64)
}

#[test]
fn cliques_separate_in_dot_product() {
    let g = cliques(2, 10, false);
    let gr = g.reverse();
    let membership = clique_membership(2, 10);
    let separated = (0..10)
        .filter(|&seed| {
            let cfg = TrainConfig { dim: 8, epochs: 200, seed, ..TrainConfig::default() };
            let model = train_verse(&g, &gr, ppr_first(), &cfg).unwrap();
            let (within, across) = mean_dots(&model, &membership);
            within > across
        })
        .count();
    assert!(separated >= 9, "separated in {separated}/10 seeds");
}

#[test]
fn nearest_neighbour_stays_in_clique() {
    let g = cliques(2, 10, true);
    let gr = g.reverse();
    let membership = clique_membership(2, 10);
    let stable = (0..10)
        .filter(|&seed| {
            let cfg = TrainConfig { dim: 8, epochs: 1000, lr0: 0.025, seed, ..TrainConfig::default() };
            let model = train_verse(&g, &gr, ppr_first(), &cfg).unwrap();
            let inside = (0..20)
                .filter(|&u| {
                    let best = (0..20)
                        .filter(|&j| j != u)
                        .max_by(|&a, &b| model.logit(u, a).total_cmp(&model.logit(u, b)))
                        .unwrap();
                    membership[best] == membership[u]
                })
                .count();
            inside as f64 >= 0.95 * 20.0
        })
        .count();
    assert!(stable >= 9, "argmax stable in {stable}/10 seeds");
}

#[test]
fn clique_labels_are_classified() {
    let g = cliques(2, 50, true);
    let gr = g.reverse();
    let labels = LabeledNodes::from_pairs(clique_membership(2, 50).into_iter().enumerate().map(|(v, c)| (v, vec![c]))).unwrap();
    for seed in 0..3 {
        let cfg = TrainConfig { dim: 8, epochs: 300, lr0: 0.025, seed, ..TrainConfig::default() };
        let model = train_verse(&g, &gr, ppr_first(), &cfg).unwrap();
        let scores = classification_eval(&model, &labels, 0.1, ClassificationMode::Multiclass, seed).unwrap();
        assert!(scores.micro_f1 >= 0.95, "seed {seed}: micro-F1 {}", scores.micro_f1);
    }
}

fn smoothed(values: &[f64], window: usize) -> Vec<f64> {
    values.windows(window).map(|w| w.iter().sum::<f64>() / window as f64).collect()
}

fn exhaustive_loss_curve(g: &Graph, order: Order, lr: f32, seed: u64) -> Vec<f64> {
    let gr = g.reverse();
    let kind = SimilarityKind::Ppr { alpha: 0.85 };
    let rows: Vec<(usize, Distribution)> = exact_rows(g, &gr, kind).unwrap().into_iter().enumerate().collect();
    let cfg = TrainConfig { dim: 4, epochs: 200, lr0: lr, seed, ..TrainConfig::default() };
    let mut curve = Vec::new();
    train_fverse_with(g, &gr, SimilaritySpec::new(kind, order), &cfg, |_, m| curve.push(kl_objective(m, &rows))).unwrap();
    curve
}

#[test]
fn smoothed_exhaustive_loss_never_rises() {
    let karate = karate_club();
    let ring = verse_core::generators::watts_strogatz(40, 4, 0.3, 2).unwrap();
    for g in [&karate, &ring] {
        for order in [Order::First, Order::Second] {
            for lr in [0.0025f32, 0.01] {
                let curve = smoothed(&exhaustive_loss_curve(g, order, lr, 1), 10);
                for (i, w) in curve.windows(2).enumerate() {
                    assert!(w[1] <= w[0], "{order} lr {lr}: smoothed loss rose at window {i}: {} -> {}", w[0], w[1]);
                }
            }
        }
    }
}

#[test]
fn adjacency_cell_wins_reconstruction_on_cliques() {
    let g = cliques(3, 8, true);
    let gr = g.reverse();
    let grid: Vec<SimilaritySpec> = default_grid()
        .into_iter()
        .filter(|s| s.order == Order::First && !matches!(s.kind, SimilarityKind::SimRank { .. }))
        .collect();
    let task = SweepTask::Reconstruction { sample_nodes: None };
    let wins = (0..10)
        .filter(|&seed| {
            let cfg = TrainConfig { dim: 8, epochs: 300, lr0: 0.025, seed, ..TrainConfig::default() };
            let outcome = hverse_sweep(&g, &gr, &task, &cfg, &grid, |_| {}).unwrap();
            let adjacency = outcome.cells.iter().find(|c| c.spec.kind == SimilarityKind::Adjacency).unwrap().score;
            outcome
                .cells
                .iter()
                .filter(|c| matches!(c.spec.kind, SimilarityKind::Ppr { .. }))
                .all(|c| adjacency >= c.score)
        })
        .count();
    assert!(wins >= 8, "adjacency >= every PPR cell in {wins}/10 seeds");
}
