//! Exhaustive trainer: gradient descent on the cross-entropy between exact
//! similarity rows and the softmax of embedding dot products.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::model::{dot_f64, init_model, softmax, EmbeddingModel};
use super::{TrainConfig, TrainError};
use crate::graph::{Graph, ReversedGraph};
use crate::similarity::{exact_rows, Distribution, SimilarityError, SimilaritySpec, DEFAULT_EXACT_CAP};

/// Gradient of one source row's cross-entropy.
#[derive(Clone, Debug, PartialEq)]
pub struct RowGradient {
    /// With respect to `W_u`, through the source role only.
    pub source: Vec<f64>,
    /// With respect to every target row `B_j`, row-major `n x dim`. In
    /// first-order mode `B = W`, so the full gradient of `W_u` is
    /// `source + targets[u]`.
    pub targets: Vec<f64>,
}

/// `-sum_j target_j log softmax(W_u . B)_j`.
pub fn cross_entropy_row(model: &EmbeddingModel, u: usize, target: &[f64]) -> f64 {
    let q = model.embedding_distribution(u);
    target
        .iter()
        .zip(&q)
        .filter(|(&p, _)| p > 0.0)
        .map(|(&p, &qj)| -p * qj.ln())
        .sum()
}

/// Analytic gradient of [`cross_entropy_row`]: with `r = target - softmax`,
/// `d/dW_u = -sum_j r_j B_j` and `d/dB_j = -r_j W_u`.
pub fn cross_entropy_gradient(model: &EmbeddingModel, u: usize, target: &[f64]) -> RowGradient {
    let mut grad = RowGradient {
        source: vec![0.0; model.dim()],
        targets: vec![0.0; model.node_count() * model.dim()],
    };
    gradient_into(model, u, target, &mut grad);
    grad
}

fn gradient_into(model: &EmbeddingModel, u: usize, target: &[f64], grad: &mut RowGradient) {
    let n = model.node_count();
    let dim = model.dim();
    let source = model.row(u);
    let logits: Vec<f64> = (0..n).map(|j| dot_f64(source, model.target_row(j))).collect();
    let p = softmax(&logits);
    grad.source.iter_mut().for_each(|x| *x = 0.0);
    for j in 0..n {
        let r = target[j] - p[j];
        for (k, &b) in model.target_row(j).iter().enumerate() {
            grad.source[k] -= r * b as f64;
        }
        let out = &mut grad.targets[j * dim..(j + 1) * dim];
        for (slot, &a) in out.iter_mut().zip(source) {
            *slot = -r * a as f64;
        }
    }
}

/// One exact step for source `u`: `W_u += lr (r . B)` and, unless
/// `freeze_targets`, `B_j += lr r_j W_u` for every `j`, all from pre-update
/// values.
pub fn fverse_step(model: &mut EmbeddingModel, u: usize, target: &[f64], lr: f64, freeze_targets: bool) {
    let mut grad = RowGradient {
        source: vec![0.0; model.dim()],
        targets: vec![0.0; model.node_count() * model.dim()],
    };
    apply_step(model, u, target, lr, freeze_targets, &mut grad);
}

fn apply_step(
    model: &mut EmbeddingModel,
    u: usize,
    target: &[f64],
    lr: f64,
    freeze_targets: bool,
    grad: &mut RowGradient,
) {
    gradient_into(model, u, target, grad);
    let dim = model.dim();
    let (w, context) = model.parts_mut();
    if !freeze_targets {
        let targets: &mut [f32] = match context {
            Some(c) => c,
            None => w,
        };
        for (x, &gx) in targets.iter_mut().zip(&grad.targets) {
            *x -= (lr * gx) as f32;
        }
    }
    for (x, &gx) in w[u * dim..(u + 1) * dim].iter_mut().zip(&grad.source) {
        *x -= (lr * gx) as f32;
    }
}

/// Exhaustive trainer; see [`train_fverse_with`].
pub fn train_fverse(
    g: &Graph,
    gr: &ReversedGraph,
    spec: SimilaritySpec,
    cfg: &TrainConfig,
) -> Result<EmbeddingModel, TrainError> {
    train_fverse_with(g, gr, spec, cfg, |_, _| {})
}

/// Precomputes every exact row, then per epoch visits all sources in a
/// shuffled order and applies [`fverse_step`]. The learning rate decays
/// linearly over all `epochs * n` steps. `observer` sees the model after
/// every epoch.
pub fn train_fverse_with<F>(
    g: &Graph,
    gr: &ReversedGraph,
    spec: SimilaritySpec,
    cfg: &TrainConfig,
    observer: F,
) -> Result<EmbeddingModel, TrainError>
where
    F: FnMut(usize, &EmbeddingModel),
{
    cfg.validate()?;
    let n = g.node_count();
    if n > DEFAULT_EXACT_CAP {
        return Err(SimilarityError::CapExceeded { n, cap: DEFAULT_EXACT_CAP }.into());
    }
    let rows = exact_rows(g, gr, spec.kind)?;
    let model = init_model(n, cfg.dim, spec.order, cfg.seed)?;
    Ok(fit_rows(model, &rows, cfg, observer))
}

/// Run the exhaustive loop from a given model on precomputed rows.
pub(crate) fn fit_rows<F>(mut model: EmbeddingModel, rows: &[Distribution], cfg: &TrainConfig, mut observer: F) -> EmbeddingModel
where
    F: FnMut(usize, &EmbeddingModel),
{
    let n = model.node_count();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(1);
    let mut order: Vec<usize> = (0..n).collect();
    let mut grad = RowGradient {
        source: vec![0.0; model.dim()],
        targets: vec![0.0; n * model.dim()],
    };
    let total = cfg.epochs as u64 * n as u64;
    let mut done = 0u64;
    for epoch in 0..cfg.epochs {
        order.shuffle(&mut rng);
        for &u in &order {
            let lr = cfg.learning_rate(done, total) as f64;
            apply_step(&mut model, u, rows[u].values(), lr, cfg.freeze_targets, &mut grad);
            done += 1;
        }
        observer(epoch, &model);
    }
    model
}
