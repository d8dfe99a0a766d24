use std::cmp::Ordering;

use super::EvalError;
use crate::similarity::Distribution;
use crate::trainer::EmbeddingModel;

fn descending(scores: &[f64], u: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..scores.len()).filter(|&v| v != u).collect();
    order.sort_by(|&a, &b| scores[b].partial_cmp(&scores[a]).unwrap_or(Ordering::Equal).then(a.cmp(&b)));
    order
}

fn dcg(order: &[usize], gains: &[f64], k: usize) -> f64 {
    order
        .iter()
        .take(k)
        .enumerate()
        .map(|(i, &v)| gains[v] / ((i + 2) as f64).log2())
        .sum()
}

/// NDCG@k of the ranking of `v != u` by descending `scores[v]` against
/// graded relevance `gains[v]`. A row without any positive gain off `u` is
/// ranked ideally by every ordering and scores 1.
pub fn ndcg_for_scores(scores: &[f64], u: usize, gains: &[f64], k: usize) -> f64 {
    let ideal = dcg(&descending(gains, u), gains, k);
    if ideal <= 0.0 {
        return 1.0;
    }
    dcg(&descending(scores, u), gains, k) / ideal
}

/// Mean NDCG@k over the given oracle rows, ranking candidates by the model's
/// logit `W_u . W'_v` (`W'` is `W` for first-order models).
pub fn ndcg_at_k(model: &EmbeddingModel, oracle_rows: &[(usize, Distribution)], k: usize) -> Result<f64, EvalError> {
    let n = model.node_count();
    if k == 0 || k >= n {
        return Err(EvalError::BadCutoff { k, n });
    }
    if oracle_rows.is_empty() {
        return Err(EvalError::EmptyInput("oracle rows"));
    }
    let mut total = 0.0;
    for (u, row) in oracle_rows {
        if row.len() != n {
            return Err(EvalError::NodeCountMismatch {
                model: n,
                graph: row.len(),
            });
        }
        let scores: Vec<f64> = (0..n).map(|v| model.logit(*u, v)).collect();
        total += ndcg_for_scores(&scores, *u, row.values(), k);
    }
    Ok(total / oracle_rows.len() as f64)
}
