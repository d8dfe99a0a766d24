//! Small linear classifiers trained by SGD: binary logistic regression and
//! multinomial (softmax) regression.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::EvalError;
use crate::trainer::softmax;

/// SGD settings shared by the classifiers.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LinearOptions {
    pub epochs: usize,
    pub lr: f64,
    pub l2: f64,
    pub seed: u64,
}

impl Default for LinearOptions {
    fn default() -> Self {
        LinearOptions {
            epochs: 100,
            lr: 0.1,
            l2: 1e-4,
            seed: 0,
        }
    }
}

impl LinearOptions {
    pub fn with_seed(seed: u64) -> Self {
        LinearOptions {
            seed,
            ..LinearOptions::default()
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LogisticModel {
    pub weights: Vec<f64>,
    pub bias: f64,
}

impl LogisticModel {
    pub fn probability(&self, x: &[f64]) -> f64 {
        let z = self.bias + self.weights.iter().zip(x).map(|(w, x)| w * x).sum::<f64>();
        1.0 / (1.0 + (-z.clamp(-500.0, 500.0)).exp())
    }

    pub fn predict(&self, x: &[f64]) -> bool {
        self.probability(x) >= 0.5
    }

    pub fn accuracy(&self, features: &[Vec<f64>], targets: &[bool]) -> f64 {
        if features.is_empty() {
            return 0.0;
        }
        let correct = features
            .iter()
            .zip(targets)
            .filter(|(x, &y)| self.predict(x) == y)
            .count();
        correct as f64 / features.len() as f64
    }
}

fn check_shape(features: &[Vec<f64>], targets: usize) -> Result<usize, EvalError> {
    if features.is_empty() {
        return Err(EvalError::EmptyInput("training set"));
    }
    if features.len() != targets {
        return Err(EvalError::DimensionMismatch {
            expected: features.len(),
            found: targets,
        });
    }
    let dim = features[0].len();
    if let Some(bad) = features.iter().find(|x| x.len() != dim) {
        return Err(EvalError::DimensionMismatch {
            expected: dim,
            found: bad.len(),
        });
    }
    Ok(dim)
}

/// Binary logistic regression with L2 penalty, plain SGD over a freshly
/// shuffled order every epoch.
pub fn logistic_train(features: &[Vec<f64>], targets: &[bool], opts: LinearOptions) -> Result<LogisticModel, EvalError> {
    let dim = check_shape(features, targets.len())?;
    let positives = targets.iter().filter(|&&t| t).count();
    if positives == 0 || positives == targets.len() {
        return Err(EvalError::SingleClass);
    }
    let mut model = LogisticModel {
        weights: vec![0.0; dim],
        bias: 0.0,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut order: Vec<usize> = (0..features.len()).collect();
    for _ in 0..opts.epochs {
        order.shuffle(&mut rng);
        for &i in &order {
            let x = &features[i];
            let err = model.probability(x) - if targets[i] { 1.0 } else { 0.0 };
            for (w, &xi) in model.weights.iter_mut().zip(x) {
                *w -= opts.lr * (err * xi + opts.l2 * *w);
            }
            model.bias -= opts.lr * err;
        }
    }
    Ok(model)
}

#[derive(Clone, Debug, PartialEq)]
pub struct SoftmaxModel {
    /// `classes x dim`, row-major.
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
    pub dim: usize,
}

impl SoftmaxModel {
    pub fn classes(&self) -> usize {
        self.bias.len()
    }

    pub fn probabilities(&self, x: &[f64]) -> Vec<f64> {
        let logits: Vec<f64> = (0..self.classes())
            .map(|c| {
                self.bias[c]
                    + self.weights[c * self.dim..(c + 1) * self.dim]
                        .iter()
                        .zip(x)
                        .map(|(w, x)| w * x)
                        .sum::<f64>()
            })
            .collect();
        softmax(&logits)
    }

    /// Most probable class; ties go to the lowest index.
    pub fn predict(&self, x: &[f64]) -> usize {
        let p = self.probabilities(x);
        let mut best = 0;
        for (c, &pc) in p.iter().enumerate() {
            if pc > p[best] {
                best = c;
            }
        }
        best
    }
}

/// Multinomial logistic regression over `classes` labels in `[0, classes)`.
pub fn softmax_train(
    features: &[Vec<f64>],
    labels: &[usize],
    classes: usize,
    opts: LinearOptions,
) -> Result<SoftmaxModel, EvalError> {
    let dim = check_shape(features, labels.len())?;
    if let Some(&bad) = labels.iter().find(|&&c| c >= classes) {
        return Err(EvalError::LabelOutOfRange { label: bad, classes });
    }
    let mut model = SoftmaxModel {
        weights: vec![0.0; classes * dim],
        bias: vec![0.0; classes],
        dim,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut order: Vec<usize> = (0..features.len()).collect();
    for _ in 0..opts.epochs {
        order.shuffle(&mut rng);
        for &i in &order {
            let x = &features[i];
            let p = model.probabilities(x);
            for c in 0..classes {
                let err = p[c] - if labels[i] == c { 1.0 } else { 0.0 };
                let row = &mut model.weights[c * dim..(c + 1) * dim];
                for (w, &xi) in row.iter_mut().zip(x) {
                    *w -= opts.lr * (err * xi + opts.l2 * *w);
                }
                model.bias[c] -= opts.lr * err;
            }
        }
    }
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn separable_points() {
        let x = vec![vec![-1.0], vec![1.0], vec![-1.0], vec![1.0]];
        let y = vec![false, true, false, true];
        let m = logistic_train(&x, &y, LinearOptions::default()).unwrap();
        assert_eq!(m.accuracy(&x, &y), 1.0);
    }

    #[test]
    fn identical_features_predict_majority() {
        let x = vec![vec![0.5, 0.5]; 100];
        let y: Vec<bool> = (0..100).map(|i| i < 70).collect();
        let m = logistic_train(&x, &y, LinearOptions::default()).unwrap();
        assert!((m.accuracy(&x, &y) - 0.7).abs() <= 0.01);
    }

    #[test]
    fn xor_is_not_linearly_separable() {
        let x = vec![vec![-2.0], vec![-1.0], vec![1.0], vec![2.0]];
        let y = vec![true, false, false, true];
        for seed in 0..5 {
            let m = logistic_train(&x, &y, LinearOptions::with_seed(seed)).unwrap();
            assert!(m.accuracy(&x, &y) <= 0.75);
        }
    }

    #[test]
    fn rejects_single_class_and_empty() {
        let x = vec![vec![1.0], vec![2.0]];
        assert!(matches!(
            logistic_train(&x, &[true, true], LinearOptions::default()),
            Err(EvalError::SingleClass)
        ));
        assert!(matches!(
            logistic_train(&[], &[], LinearOptions::default()),
            Err(EvalError::EmptyInput(_))
        ));
    }

    #[test]
    fn deterministic_given_seed() {
        let x: Vec<Vec<f64>> = (0..20).map(|i| vec![(i as f64).sin(), (i as f64).cos()]).collect();
        let y: Vec<bool> = (0..20).map(|i| i % 3 == 0).collect();
        let a = logistic_train(&x, &y, LinearOptions::with_seed(4)).unwrap();
        let b = logistic_train(&x, &y, LinearOptions::with_seed(4)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn softmax_separates_one_hot_classes() {
        let x: Vec<Vec<f64>> = (0..30)
            .map(|i| {
                let mut v = vec![0.0; 3];
                v[i % 3] = 1.0;
                v
            })
            .collect();
        let y: Vec<usize> = (0..30).map(|i| i % 3).collect();
        let m = softmax_train(&x, &y, 3, LinearOptions::default()).unwrap();
        assert!(x.iter().zip(&y).all(|(x, &c)| m.predict(x) == c));
        assert!(softmax_train(&x, &y, 2, LinearOptions::default()).is_err());
    }
}
