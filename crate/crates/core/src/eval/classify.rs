//! Node classification from embeddings.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::linear::{logistic_train, softmax_train, LinearOptions};
use super::EvalError;
use crate::trainer::EmbeddingModel;

/// Label sets of the labeled nodes.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct LabeledNodes {
    /// Node index to sorted, deduplicated label ids.
    labels: BTreeMap<usize, Vec<usize>>,
    /// Label id to its name in the source file.
    names: Vec<String>,
}

impl LabeledNodes {
    /// Build from `(node, label ids)` pairs; names default to the ids.
    pub fn from_pairs<I: IntoIterator<Item = (usize, Vec<usize>)>>(pairs: I) -> Result<Self, EvalError> {
        let mut labels = BTreeMap::new();
        let mut max_label = None;
        for (node, mut ids) in pairs {
            if ids.is_empty() {
                return Err(EvalError::Labels(format!("node {node} has no labels")));
            }
            ids.sort_unstable();
            ids.dedup();
            max_label = max_label.max(ids.last().copied());
            labels.insert(node, ids);
        }
        let names = (0..max_label.map_or(0, |m| m + 1)).map(|i| i.to_string()).collect();
        Ok(LabeledNodes { labels, names })
    }

    pub fn label_count(&self) -> usize {
        self.names.len()
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels_of(&self, node: usize) -> Option<&[usize]> {
        self.labels.get(&node).map(Vec::as_slice)
    }

    pub fn nodes(&self) -> impl Iterator<Item = usize> + '_ {
        self.labels.keys().copied()
    }

    pub fn label_name(&self, id: usize) -> &str {
        &self.names[id]
    }

    /// Smallest label of every labeled node, for single-label protocols.
    pub fn primary_labels(&self) -> BTreeMap<usize, usize> {
        self.labels.iter().map(|(&v, ids)| (v, ids[0])).collect()
    }

    /// Every node index must be below `n`.
    pub fn check_range(&self, n: usize) -> Result<(), EvalError> {
        match self.labels.keys().next_back() {
            Some(&last) if last >= n => Err(EvalError::Labels(format!(
                "labeled node {last} out of range for {n} nodes"
            ))),
            _ => Ok(()),
        }
    }
}

/// Read `NODE<TAB>label[,label...]` lines. `resolve` maps a node token to
/// its index; unknown tokens are errors.
pub fn read_labels<P, F>(path: P, resolve: F) -> Result<LabeledNodes, EvalError>
where
    P: AsRef<Path>,
    F: Fn(&str) -> Option<usize>,
{
    let file = File::open(path.as_ref()).map_err(|e| EvalError::Labels(format!("{}: {e}", path.as_ref().display())))?;
    let mut ids: HashMap<String, usize> = HashMap::new();
    let mut names: Vec<String> = Vec::new();
    let mut labels: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (lineno, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| EvalError::Labels(e.to_string()))?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (token, rest) = line
            .split_once(|c: char| c.is_whitespace())
            .ok_or_else(|| EvalError::Labels(format!("line {}: expected NODE<TAB>LABELS", lineno + 1)))?;
        let node = resolve(token).ok_or_else(|| EvalError::Labels(format!("line {}: unknown node `{token}`", lineno + 1)))?;
        let entry = labels.entry(node).or_default();
        for label in rest.trim().split(',').map(str::trim).filter(|l| !l.is_empty()) {
            let id = *ids.entry(label.to_string()).or_insert_with(|| {
                names.push(label.to_string());
                names.len() - 1
            });
            entry.push(id);
        }
        if entry.is_empty() {
            return Err(EvalError::Labels(format!("line {}: node `{token}` has no labels", lineno + 1)));
        }
    }
    for ids in labels.values_mut() {
        ids.sort_unstable();
        ids.dedup();
    }
    Ok(LabeledNodes { labels, names })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum ClassificationMode {
    /// One label per node (the smallest), softmax regression.
    #[default]
    Multiclass,
    /// One-vs-rest logistic regression per label, 0.5 threshold.
    Multilabel,
}

impl FromStr for ClassificationMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "multiclass" => Ok(ClassificationMode::Multiclass),
            "multilabel" => Ok(ClassificationMode::Multilabel),
            other => Err(format!("unknown classification mode `{other}`")),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ClassificationScores {
    pub micro_f1: f64,
    pub macro_f1: f64,
    /// Labels left out of the macro average (absent from the training
    /// split, or never seen nor predicted on the test split).
    pub skipped_labels: Vec<usize>,
}

#[derive(Clone, Copy, Default, Debug)]
struct Counts {
    tp: usize,
    fp: usize,
    fn_: usize,
}

impl Counts {
    fn f1(&self) -> Option<f64> {
        let denom = 2 * self.tp + self.fp + self.fn_;
        (denom > 0).then(|| 2.0 * self.tp as f64 / denom as f64)
    }
}

fn features(model: &EmbeddingModel, nodes: &[usize]) -> Vec<Vec<f64>> {
    nodes.iter().map(|&v| model.row(v).iter().map(|&x| x as f64).collect()).collect()
}

/// Split `nodes` into train/test by `train_fraction` after a seeded shuffle.
/// Both sides receive at least one node.
pub fn split_nodes(nodes: &[usize], train_fraction: f64, seed: u64) -> (Vec<usize>, Vec<usize>) {
    let mut shuffled = nodes.to_vec();
    shuffled.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let cut = ((train_fraction * nodes.len() as f64).round() as usize).clamp(1, nodes.len().saturating_sub(1));
    let test = shuffled.split_off(cut);
    (shuffled, test)
}

/// Train on a random `train_fraction` of the labeled nodes and report
/// micro/macro F1 on the rest.
pub fn classification_eval(
    model: &EmbeddingModel,
    labels: &LabeledNodes,
    train_fraction: f64,
    mode: ClassificationMode,
    seed: u64,
) -> Result<ClassificationScores, EvalError> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(EvalError::BadFraction(train_fraction));
    }
    if labels.len() < 10 {
        return Err(EvalError::Labels(format!("need at least 10 labeled nodes, found {}", labels.len())));
    }
    labels.check_range(model.node_count())?;
    let nodes: Vec<usize> = labels.nodes().collect();
    let (train, test) = split_nodes(&nodes, train_fraction, seed);
    score_split(model, labels, &train, &test, mode, seed)
}

/// Fit on `train` nodes and score on `test` nodes.
pub fn score_split(
    model: &EmbeddingModel,
    labels: &LabeledNodes,
    train: &[usize],
    test: &[usize],
    mode: ClassificationMode,
    seed: u64,
) -> Result<ClassificationScores, EvalError> {
    let opts = LinearOptions::with_seed(seed);
    let x_train = features(model, train);
    let x_test = features(model, test);
    let label_count = labels.label_count();
    let mut counts = vec![Counts::default(); label_count];
    let mut trained = vec![false; label_count];

    match mode {
        ClassificationMode::Multiclass => {
            let primary = labels.primary_labels();
            let train_classes: BTreeSet<usize> = train.iter().map(|v| primary[v]).collect();
            let compact: Vec<usize> = train_classes.iter().copied().collect();
            let index: HashMap<usize, usize> = compact.iter().enumerate().map(|(i, &c)| (c, i)).collect();
            let y: Vec<usize> = train.iter().map(|v| index[&primary[v]]).collect();
            let clf = softmax_train(&x_train, &y, compact.len(), opts)?;
            for &c in &compact {
                trained[c] = true;
            }
            for (x, v) in x_test.iter().zip(test) {
                let predicted = compact[clf.predict(x)];
                let truth = primary[v];
                if predicted == truth {
                    counts[truth].tp += 1;
                } else {
                    counts[predicted].fp += 1;
                    counts[truth].fn_ += 1;
                }
            }
        }
        ClassificationMode::Multilabel => {
            for (label, slot) in counts.iter_mut().enumerate() {
                let y: Vec<bool> = train.iter().map(|&v| labels.labels_of(v).unwrap().contains(&label)).collect();
                let clf = match logistic_train(&x_train, &y, opts) {
                    Ok(clf) => clf,
                    Err(EvalError::SingleClass) => continue,
                    Err(e) => return Err(e),
                };
                trained[label] = true;
                for (x, &v) in x_test.iter().zip(test) {
                    let truth = labels.labels_of(v).unwrap().contains(&label);
                    match (clf.predict(x), truth) {
                        (true, true) => slot.tp += 1,
                        (true, false) => slot.fp += 1,
                        (false, true) => slot.fn_ += 1,
                        (false, false) => {}
                    }
                }
            }
        }
    }

    let mut skipped = Vec::new();
    let mut macro_sum = 0.0;
    let mut macro_n = 0;
    let mut total = Counts::default();
    for (label, c) in counts.iter().enumerate() {
        total.tp += c.tp;
        total.fp += c.fp;
        total.fn_ += c.fn_;
        match (trained[label], c.f1()) {
            (true, Some(f1)) => {
                macro_sum += f1;
                macro_n += 1;
            }
            _ => skipped.push(label),
        }
    }
    let skipped_untrained = skipped.iter().filter(|&&l| !trained[l]).count();
    if skipped_untrained > 0 {
        log::warn!("{skipped_untrained} label(s) absent from the training split; left out of macro-F1");
    }
    Ok(ClassificationScores {
        micro_f1: total.f1().unwrap_or(0.0),
        macro_f1: if macro_n == 0 { 0.0 } else { macro_sum / macro_n as f64 },
        skipped_labels: skipped,
    })
}
