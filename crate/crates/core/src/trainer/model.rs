use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution as _, Normal};

use super::TrainError;
use crate::similarity::{Distribution, Order};

/// Logits are clamped to this magnitude before the sigmoid.
pub const LOGIT_CLAMP: f32 = 30.0;

/// Node embeddings: `w` is the `n x dim` row-major matrix whose row `v` is
/// the embedding of node `v`. Second-order models also carry a context
/// matrix of the same shape.
#[derive(Clone, Debug, PartialEq)]
pub struct EmbeddingModel {
    n: usize,
    dim: usize,
    w: Vec<f32>,
    context: Option<Vec<f32>>,
}

impl EmbeddingModel {
    /// Wrap an existing first-order matrix.
    pub fn from_matrix(n: usize, dim: usize, w: Vec<f32>) -> Result<Self, TrainError> {
        if n == 0 || dim == 0 {
            return Err(TrainError::EmptyModel { n, dim });
        }
        if w.len() != n * dim {
            return Err(TrainError::ShapeMismatch {
                expected: n * dim,
                found: w.len(),
            });
        }
        Ok(EmbeddingModel { n, dim, w, context: None })
    }

    pub fn with_context(mut self, context: Vec<f32>) -> Result<Self, TrainError> {
        if context.len() != self.w.len() {
            return Err(TrainError::ShapeMismatch {
                expected: self.w.len(),
                found: context.len(),
            });
        }
        self.context = Some(context);
        Ok(self)
    }

    #[inline]
    pub fn node_count(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn order(&self) -> Order {
        if self.context.is_some() {
            Order::Second
        } else {
            Order::First
        }
    }

    #[inline]
    pub fn row(&self, v: usize) -> &[f32] {
        &self.w[v * self.dim..(v + 1) * self.dim]
    }

    #[inline]
    pub fn row_mut(&mut self, v: usize) -> &mut [f32] {
        &mut self.w[v * self.dim..(v + 1) * self.dim]
    }

    /// Row of the matrix that plays the target role: the context matrix in
    /// second-order mode, `w` otherwise.
    #[inline]
    pub fn target_row(&self, v: usize) -> &[f32] {
        match &self.context {
            Some(c) => &c[v * self.dim..(v + 1) * self.dim],
            None => self.row(v),
        }
    }

    pub fn matrix(&self) -> &[f32] {
        &self.w
    }

    pub fn context(&self) -> Option<&[f32]> {
        self.context.as_deref()
    }

    pub(crate) fn parts_mut(&mut self) -> (&mut Vec<f32>, Option<&mut Vec<f32>>) {
        (&mut self.w, self.context.as_mut())
    }

    pub(crate) fn into_parts(self) -> (usize, usize, Vec<f32>, Option<Vec<f32>>) {
        (self.n, self.dim, self.w, self.context)
    }

    /// `W_u . W_v` in the source embedding space.
    pub fn dot(&self, u: usize, v: usize) -> f32 {
        dot(self.row(u), self.row(v))
    }

    /// Score of `v` in the distribution of `u`: `W_u . W'_v`.
    pub fn logit(&self, u: usize, v: usize) -> f64 {
        dot_f64(self.row(u), self.target_row(v))
    }

    pub fn is_finite(&self) -> bool {
        self.w.iter().chain(self.context.iter().flatten()).all(|x| x.is_finite())
    }

    /// Single-matrix representation used downstream: `w` alone, or `[w | w']`
    /// row-wise when `concat_context` is set on a second-order model.
    pub fn into_output(self, concat_context: bool) -> EmbeddingModel {
        match (self.context, concat_context) {
            (Some(context), true) => {
                let dim = self.dim;
                let mut joined = Vec::with_capacity(self.w.len() * 2);
                for v in 0..self.n {
                    joined.extend_from_slice(&self.w[v * dim..(v + 1) * dim]);
                    joined.extend_from_slice(&context[v * dim..(v + 1) * dim]);
                }
                EmbeddingModel {
                    n: self.n,
                    dim: 2 * dim,
                    w: joined,
                    context: None,
                }
            }
            _ => EmbeddingModel {
                n: self.n,
                dim: self.dim,
                w: self.w,
                context: None,
            },
        }
    }

    /// `simE(u, ·)`: softmax of `W_u . B_j` over all nodes `j`.
    pub fn embedding_distribution(&self, u: usize) -> Vec<f64> {
        let source = self.row(u);
        let logits: Vec<f64> = (0..self.n)
            .map(|j| dot_f64(source, self.target_row(j)))
            .collect();
        softmax(&logits)
    }
}

/// Draw an `n x dim` model with i.i.d. `N(0, 1/dim)` entries. A second-order
/// model draws its context matrix from the same distribution, after `w`.
pub fn init_model(n: usize, dim: usize, order: Order, seed: u64) -> Result<EmbeddingModel, TrainError> {
    if n == 0 || dim == 0 {
        return Err(TrainError::EmptyModel { n, dim });
    }
    let normal = Normal::new(0.0f32, (1.0 / dim as f32).sqrt()).expect("positive std-dev");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draw = |len: usize| -> Vec<f32> { (0..len).map(|_| normal.sample(&mut rng)).collect() };
    let w = draw(n * dim);
    let context = match order {
        Order::First => None,
        Order::Second => Some(draw(n * dim)),
    };
    Ok(EmbeddingModel { n, dim, w, context })
}

#[inline]
pub(crate) fn dot(a: &[f32], b: &[f32]) -> f32 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub(crate) fn dot_f64(a: &[f32], b: &[f32]) -> f64 {
    a.iter().zip(b).map(|(&x, &y)| x as f64 * y as f64).sum()
}

#[inline]
pub fn sigmoid(x: f32) -> f32 {
    let x = x.clamp(-LOGIT_CLAMP, LOGIT_CLAMP);
    1.0 / (1.0 + (-x).exp())
}

/// Scale shared by both rows of one logistic step: `(label - sigmoid(a.b)) * lr`.
#[inline]
pub(crate) fn pair_coefficient(a: &[f32], b: &[f32], label: f32, lr: f32) -> f32 {
    (label - sigmoid(dot(a, b))) * lr
}

/// One logistic step on the pair `(u, v)`: with `a = W_u` and `b` the target
/// row of `v`, `g = (label - sigmoid(a.b)) lr`, then `a += g b` and
/// `b += g a`, both from pre-update values. When `a` and `b` are the same
/// row both deltas apply.
pub fn nce_update(model: &mut EmbeddingModel, u: usize, v: usize, label: bool, lr: f32) {
    let dim = model.dim;
    let a_old = model.row(u).to_vec();
    let b_old = model.target_row(v).to_vec();
    let g = pair_coefficient(&a_old, &b_old, if label { 1.0 } else { 0.0 }, lr);
    for (x, &y) in model.row_mut(u).iter_mut().zip(&b_old) {
        *x += g * y;
    }
    let target = match model.context.as_mut() {
        Some(c) => &mut c[v * dim..(v + 1) * dim],
        None => &mut model.w[v * dim..(v + 1) * dim],
    };
    for (x, &y) in target.iter_mut().zip(&a_old) {
        *x += g * y;
    }
}

/// Numerically stable softmax.
pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut out: Vec<f64> = logits.iter().map(|&z| (z - max).exp()).collect();
    let sum: f64 = out.iter().sum();
    out.iter_mut().for_each(|x| *x /= sum);
    out
}

/// `KL(p || q)` in nats with `0 log(0/x) = 0`; infinite when `q` vanishes
/// where `p` does not.
pub fn kl_divergence(p: &[f64], q: &[f64]) -> f64 {
    let mut total = 0.0;
    for (&pi, &qi) in p.iter().zip(q) {
        if pi <= 0.0 {
            continue;
        }
        if qi <= 0.0 {
            return f64::INFINITY;
        }
        total += pi * (pi / qi).ln();
    }
    total
}

/// Mean `KL(simG(u, ·) || simE(u, ·))` over the given rows.
pub fn kl_objective(model: &EmbeddingModel, rows: &[(usize, Distribution)]) -> f64 {
    if rows.is_empty() {
        return 0.0;
    }
    let total: f64 = rows
        .iter()
        .map(|(u, target)| kl_divergence(target.values(), &model.embedding_distribution(*u)))
        .sum();
    total / rows.len() as f64
}
