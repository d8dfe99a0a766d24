use std::fmt;
use std::str::FromStr;

use super::EvalError;

/// Binary operators that turn two node embeddings into an edge feature.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum EdgeOperator {
    Average,
    Concat,
    #[default]
    Hadamard,
    WeightedL1,
    WeightedL2,
}

impl EdgeOperator {
    pub const ALL: [EdgeOperator; 5] = [
        EdgeOperator::Average,
        EdgeOperator::Concat,
        EdgeOperator::Hadamard,
        EdgeOperator::WeightedL1,
        EdgeOperator::WeightedL2,
    ];

    pub fn output_dim(&self, dim: usize) -> usize {
        match self {
            EdgeOperator::Concat => 2 * dim,
            _ => dim,
        }
    }
}

impl fmt::Display for EdgeOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EdgeOperator::Average => "average",
            EdgeOperator::Concat => "concat",
            EdgeOperator::Hadamard => "hadamard",
            EdgeOperator::WeightedL1 => "l1",
            EdgeOperator::WeightedL2 => "l2",
        })
    }
}

impl FromStr for EdgeOperator {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "average" | "avg" => Ok(EdgeOperator::Average),
            "concat" => Ok(EdgeOperator::Concat),
            "hadamard" => Ok(EdgeOperator::Hadamard),
            "l1" | "weighted-l1" => Ok(EdgeOperator::WeightedL1),
            "l2" | "weighted-l2" => Ok(EdgeOperator::WeightedL2),
            other => Err(format!("unknown edge operator `{other}`")),
        }
    }
}

pub fn edge_features(op: EdgeOperator, a: &[f32], b: &[f32]) -> Result<Vec<f64>, EvalError> {
    if a.len() != b.len() {
        return Err(EvalError::DimensionMismatch {
            expected: a.len(),
            found: b.len(),
        });
    }
    let pairs = a.iter().zip(b).map(|(&x, &y)| (x as f64, y as f64));
    Ok(match op {
        EdgeOperator::Average => pairs.map(|(x, y)| (x + y) / 2.0).collect(),
        EdgeOperator::Concat => a.iter().chain(b).map(|&x| x as f64).collect(),
        EdgeOperator::Hadamard => pairs.map(|(x, y)| x * y).collect(),
        EdgeOperator::WeightedL1 => pairs.map(|(x, y)| (x - y).abs()).collect(),
        EdgeOperator::WeightedL2 => pairs.map(|(x, y)| (x - y) * (x - y)).collect(),
    })
}
