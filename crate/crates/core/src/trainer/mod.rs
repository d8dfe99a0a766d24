//! Embedding trainers.
//!
//! [`train_verse`] runs noise-contrastive estimation over sampled
//! `(source, similar node)` pairs with uniform noise, updating a shared
//! matrix from any number of lock-free workers. [`train_fverse`] runs exact
//! cross-entropy gradient descent over full similarity rows and is meant for
//! small graphs.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::graph::{Graph, ReversedGraph};
use crate::similarity::{Sampler, SimilarityError, SimilaritySpec};

mod full;
mod hogwild;
mod io;
mod model;

pub use full::{cross_entropy_gradient, cross_entropy_row, fverse_step, train_fverse, train_fverse_with, RowGradient};
pub use hogwild::SharedMatrix;
pub use io::{format_significant, load_model, load_raw, load_text, save_model, write_model, ModelFormat, ModelIoError};
pub use model::{
    init_model, kl_divergence, kl_objective, nce_update, sigmoid, softmax, EmbeddingModel, LOGIT_CLAMP,
};

#[derive(Debug, Error)]
pub enum TrainError {
    #[error("invalid training configuration: {0}")]
    Config(String),
    #[error("model needs at least one node and one dimension (n={n}, dim={dim})")]
    EmptyModel { n: usize, dim: usize },
    #[error("matrix has {found} entries, expected {expected}")]
    ShapeMismatch { expected: usize, found: usize },
    #[error(transparent)]
    Similarity(#[from] SimilarityError),
}

/// Hyperparameters shared by both trainers.
#[derive(Clone, Debug, PartialEq)]
pub struct TrainConfig {
    pub dim: usize,
    /// Noise samples per positive pair.
    pub negatives: usize,
    /// One epoch is `n` source draws (sampled) or `n` row updates (exhaustive).
    pub epochs: usize,
    pub lr0: f32,
    /// Learning rate reached at the end of training by linear decay.
    pub lr_floor: f32,
    pub threads: usize,
    pub seed: u64,
    /// Exhaustive trainer only: update the source row and leave target rows fixed.
    pub freeze_targets: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            dim: 128,
            negatives: 3,
            epochs: 100,
            lr0: 0.0025,
            lr_floor: 1e-4,
            threads: 1,
            seed: 0,
            freeze_targets: false,
        }
    }
}

impl TrainConfig {
    /// Our reading of the published step budget for the sampled trainer:
    /// the main loop runs 10^5 times with `n` updates each.
    pub fn paper_scale_verse() -> Self {
        TrainConfig {
            epochs: 100_000,
            ..TrainConfig::default()
        }
    }

    /// Published budget for the exhaustive trainer: 250 passes.
    pub fn paper_scale_fverse() -> Self {
        TrainConfig {
            epochs: 250,
            ..TrainConfig::default()
        }
    }

    pub fn validate(&self) -> Result<(), TrainError> {
        if self.dim == 0 {
            return Err(TrainError::Config("dim must be at least 1".into()));
        }
        if self.negatives == 0 {
            return Err(TrainError::Config("negatives must be at least 1".into()));
        }
        if self.epochs == 0 {
            return Err(TrainError::Config("epochs must be at least 1".into()));
        }
        if !(self.lr0.is_finite() && self.lr0 > 0.0) {
            return Err(TrainError::Config(format!("learning rate must be positive, got {}", self.lr0)));
        }
        if !(self.lr_floor.is_finite() && self.lr_floor >= 0.0) {
            return Err(TrainError::Config(format!(
                "learning-rate floor must be nonnegative, got {}",
                self.lr_floor
            )));
        }
        if self.threads == 0 {
            return Err(TrainError::Config("threads must be at least 1".into()));
        }
        Ok(())
    }

    /// Learning rate after `done` of `total` steps.
    #[inline]
    pub fn learning_rate(&self, done: u64, total: u64) -> f32 {
        let floor = self.lr_floor.min(self.lr0);
        let progress = if total == 0 { 0.0 } else { done as f64 / total as f64 };
        (self.lr0 as f64 + (floor as f64 - self.lr0 as f64) * progress) as f32
    }
}

/// Sampled trainer. Runs `epochs * n` iterations; each draws a uniform
/// source `u`, a positive `v ~ simG(u, ·)` (redrawing `u` when the measure
/// has no sample, i.e. adjacency at a sink), and `negatives` uniform noise
/// nodes, applying one logistic step per pair.
///
/// With `threads == 1` the result is a deterministic function of the seed.
pub fn train_verse(
    g: &Graph,
    gr: &ReversedGraph,
    spec: SimilaritySpec,
    cfg: &TrainConfig,
) -> Result<EmbeddingModel, TrainError> {
    cfg.validate()?;
    let n = g.node_count();
    let sampler = Sampler::new(g, gr, spec.kind)?;
    let model = init_model(n, cfg.dim, spec.order, cfg.seed)?;
    let (_, dim, w, context) = model.into_parts();

    let source = SharedMatrix::from_vec(w, dim);
    let context = context.map(|c| SharedMatrix::from_vec(c, dim));
    let target = context.as_ref().unwrap_or(&source);

    let total = cfg.epochs as u64 * n as u64;
    let threads = cfg.threads.min(total.max(1) as usize);
    let worker = |t: usize, iterations: u64| {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(t as u64 + 1);
        run_worker(&sampler, &source, target, n, dim, cfg, iterations, &mut rng);
    };
    if threads == 1 {
        worker(0, total);
    } else {
        let share = total / threads as u64;
        let extra = total % threads as u64;
        std::thread::scope(|s| {
            for t in 0..threads {
                let iterations = share + u64::from((t as u64) < extra);
                let worker = &worker;
                s.spawn(move || worker(t, iterations));
            }
        });
    }
    log::debug!("trained {spec} on {n} nodes: {total} iterations over {threads} worker(s)");

    let model = EmbeddingModel::from_matrix(n, dim, source.into_vec())?;
    match context {
        Some(c) => model.with_context(c.into_vec()),
        None => Ok(model),
    }
}

#[allow(clippy::too_many_arguments)]
fn run_worker<R: Rng>(
    sampler: &Sampler<'_>,
    source: &SharedMatrix,
    target: &SharedMatrix,
    n: usize,
    dim: usize,
    cfg: &TrainConfig,
    iterations: u64,
    rng: &mut R,
) {
    let mut a = vec![0.0f32; dim];
    let mut b = vec![0.0f32; dim];
    let step = |u: usize, v: usize, label: f32, lr: f32, a: &mut [f32], b: &mut [f32]| {
        source.load_row(u, a);
        target.load_row(v, b);
        let g = model::pair_coefficient(a, b, label, lr);
        source.axpy_row(u, g, b);
        target.axpy_row(v, g, a);
    };
    for done in 0..iterations {
        let lr = cfg.learning_rate(done, iterations);
        let (u, v) = loop {
            let u = rng.random_range(0..n);
            if let Some(v) = sampler.sample(u, rng) {
                break (u, v as usize);
            }
        };
        step(u, v, 1.0, lr, &mut a, &mut b);
        for _ in 0..cfg.negatives {
            let noise = rng.random_range(0..n);
            step(u, noise, 0.0, lr, &mut a, &mut b);
        }
    }
}
