use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use clap::{Args, Subcommand};
use verse_core::eval::{
    classification_eval, graph_reconstruction, kmeans, link_prediction_eval, modularity, modularity_search, ndcg_at_k,
    nmi, read_labels, sample_nodes_uniform, ClassificationMode, EdgeOperator, EvalReport, LabeledNodes, LinearOptions,
};
use verse_core::similarity::{exact_row, exact_rows};
use verse_core::trainer::EmbeddingModel;
use verse_core::{Graph, SimilarityKind};

use crate::common::{check_rows, load_embedding, EmbeddingFormat, GraphOpts};
use crate::error::CliError;
use crate::gen::read_split;
use crate::output::{read_manifest, sibling, write_atomic, Run};

#[derive(Subcommand, Debug)]
pub enum EvalCommand {
    /// Edge classification accuracy on a split written by `gen split`.
    Linkpred(LinkpredArgs),
    /// Micro- and macro-F1 of node labels.
    Classify(ClassifyArgs),
    /// k-means partitions scored by NMI against labels or by modularity.
    Cluster(ClusterArgs),
    /// Precision of nearest rows against graph neighbors.
    Reconstruct(ReconstructArgs),
    /// NDCG@k of dot-product rankings against exact similarity rows.
    Ndcg(NdcgArgs),
}

#[derive(Args, Debug)]
pub struct Common {
    #[arg(long)]
    pub embedding: PathBuf,
    #[arg(long, value_enum, default_value_t = EmbeddingFormat::Auto)]
    pub embedding_format: EmbeddingFormat,
    /// Runs with seeds seed, seed+1, ...; mean and sd are reported.
    #[arg(long, default_value_t = 10)]
    pub repeats: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// key=value report [default: <embedding>.<task>.txt].
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// CSV table [default: <output>.csv].
    #[arg(long)]
    pub csv: Option<PathBuf>,
    #[command(flatten)]
    pub graph_opts: GraphOpts,
}

#[derive(Args, Debug)]
pub struct LinkpredArgs {
    /// Split file from `gen split`.
    #[arg(long)]
    pub split: PathBuf,
    /// Graph the embedding was trained on, for a row-count check.
    #[arg(long, visible_alias = "input")]
    pub graph: Option<PathBuf>,
    /// average, concat, hadamard, l1 or l2.
    #[arg(long, default_value = "hadamard")]
    pub operator: EdgeOperator,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug)]
pub struct ClassifyArgs {
    #[arg(long, visible_alias = "input")]
    pub graph: PathBuf,
    /// `NODE<TAB>label[,label...]` lines.
    #[arg(long)]
    pub labels: PathBuf,
    #[arg(long, default_value_t = 0.1)]
    pub train_fraction: f64,
    /// multiclass or multilabel.
    #[arg(long, default_value = "multiclass")]
    pub mode: ClassificationMode,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug)]
pub struct ClusterArgs {
    #[arg(long, visible_alias = "input")]
    pub graph: PathBuf,
    /// Score NMI against these labels (smallest label per node).
    #[arg(long)]
    pub labels: Option<PathBuf>,
    /// Cluster count with --labels [default: number of distinct labels].
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long, default_value_t = 2)]
    pub k_min: usize,
    #[arg(long, default_value_t = 50)]
    pub k_max: usize,
    #[arg(long, default_value_t = 1)]
    pub k_step: usize,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug)]
pub struct ReconstructArgs {
    #[arg(long, visible_alias = "input")]
    pub graph: PathBuf,
    /// Evaluate a uniform sample of nodes instead of all.
    #[arg(long)]
    pub sample_nodes: Option<usize>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug)]
pub struct NdcgArgs {
    #[arg(long, visible_alias = "input")]
    pub graph: PathBuf,
    #[arg(long, default_value = "ppr:0.85")]
    pub similarity: SimilarityKind,
    #[arg(long, default_value_t = 10)]
    pub k: usize,
    /// Evaluate a uniform sample of nodes instead of all.
    #[arg(long)]
    pub sample_nodes: Option<usize>,
    #[command(flatten)]
    pub common: Common,
}

struct Session {
    run: Run,
    report: EvalReport,
    model: EmbeddingModel,
    seeds: Vec<u64>,
}

impl Session {
    fn open(task: &str, common: &Common, graph: Option<&Path>) -> Result<(Self, Option<Graph>), CliError> {
        if common.repeats == 0 {
            return Err(CliError::Usage("--repeats must be at least 1".into()));
        }
        let mut run = Run::start(&format!("eval {task}"), common.seed);
        let g = match graph {
            Some(path) => {
                run.input(path)?;
                let g = common.graph_opts.load(path)?;
                common.graph_opts.record(&mut run, &g);
                Some(g)
            }
            None => None,
        };
        run.input(&common.embedding)?;
        let model = load_embedding(&common.embedding, common.embedding_format, g.as_ref().map(Graph::node_count))?;
        if let Some(g) = &g {
            check_rows(&model, g)?;
        }
        let (spec, order) = read_manifest(&common.embedding)
            .map(|m| {
                let get = |k: &str| m.config.get(k).map(|v| v.to_string().trim_matches('"').to_string());
                (get("similarity").unwrap_or_else(|| "-".into()), get("order").unwrap_or_else(|| "-".into()))
            })
            .unwrap_or_else(|| ("-".into(), "-".into()));
        let mut report = EvalReport::new(task).with_spec(spec, order);
        report.set("embedding", common.embedding.display());
        report.set("rows", model.node_count());
        report.set("dim", model.dim());
        report.set("repeats", common.repeats);
        report.set("seed", common.seed);
        run.set("repeats", common.repeats);
        let seeds = (0..common.repeats as u64).map(|r| common.seed.wrapping_add(r)).collect();
        Ok((
            Session {
                run,
                report,
                model,
                seeds,
            },
            g,
        ))
    }

    fn finish(mut self, task: &str, common: &Common) -> Result<(), CliError> {
        let output = common
            .output
            .clone()
            .unwrap_or_else(|| sibling(&common.embedding, &format!(".{task}.txt")));
        let csv = common.csv.clone().unwrap_or_else(|| sibling(&output, ".csv"));
        write_atomic(&output, |w| self.report.write_text(w))?;
        write_atomic(&csv, |w| self.report.write_csv(w, true))?;
        for (k, v) in &self.report.config {
            self.run.set(k, v.as_str());
        }
        self.run.output(&output);
        self.run.output(&csv);
        self.run.finish(&output)?;
        self.report.write_text(std::io::stdout().lock())?;
        Ok(())
    }
}

fn labels_for(path: &Path, g: &Graph, opts: &GraphOpts) -> Result<LabeledNodes, CliError> {
    let labels = read_labels(path, opts.resolver(g))?;
    if labels.is_empty() {
        return Err(CliError::Input(format!("{}: no labeled nodes", path.display())));
    }
    Ok(labels)
}

fn classifier_echo(report: &mut EvalReport) {
    let o = LinearOptions::default();
    report.set("classifier_epochs", o.epochs);
    report.set("classifier_lr", o.lr);
    report.set("classifier_l2", o.l2);
}

pub fn run(cmd: EvalCommand) -> Result<(), CliError> {
    match cmd {
        EvalCommand::Linkpred(a) => linkpred(a),
        EvalCommand::Classify(a) => classify(a),
        EvalCommand::Cluster(a) => cluster(a),
        EvalCommand::Reconstruct(a) => reconstruct(a),
        EvalCommand::Ndcg(a) => ndcg(a),
    }
}

fn linkpred(a: LinkpredArgs) -> Result<(), CliError> {
    let (mut s, _) = Session::open("linkpred", &a.common, a.graph.as_deref())?;
    s.run.input(&a.split)?;
    let split = read_split(&a.split)?;
    s.report.set("operator", a.operator);
    s.report.set("train_edges", split.train_pos.len());
    s.report.set("train_non_edges", split.train_neg.len());
    s.report.set("test_edges", split.test_pos.len());
    s.report.set("test_non_edges", split.test_neg.len());
    classifier_echo(&mut s.report);
    let mut runs = Vec::new();
    for &seed in &s.seeds {
        runs.push((seed, link_prediction_eval(&s.model, &split, a.operator, seed)?));
    }
    s.report.push_repeats("accuracy", &runs);
    s.finish("linkpred", &a.common)
}

fn classify(a: ClassifyArgs) -> Result<(), CliError> {
    let (mut s, g) = Session::open("classify", &a.common, Some(&a.graph))?;
    let g = g.expect("graph loaded");
    s.run.input(&a.labels)?;
    let labels = labels_for(&a.labels, &g, &a.common.graph_opts)?;
    s.report.set("labeled_nodes", labels.len());
    s.report.set("label_count", labels.label_count());
    s.report.set("train_fraction", a.train_fraction);
    match a.mode {
        ClassificationMode::Multiclass => {
            s.report.set("mode", "multiclass");
            s.report.set("classifier", "softmax-regression");
        }
        ClassificationMode::Multilabel => {
            s.report.set("mode", "multilabel");
            s.report.set("classifier", "one-vs-rest-logistic");
            s.report.set("multilabel_strategy", "one-vs-rest (deviation: label powerset not used)");
        }
    }
    classifier_echo(&mut s.report);
    let (mut micro, mut macro_) = (Vec::new(), Vec::new());
    for &seed in &s.seeds {
        let scores = classification_eval(&s.model, &labels, a.train_fraction, a.mode, seed)?;
        micro.push((seed, scores.micro_f1));
        macro_.push((seed, scores.macro_f1));
    }
    s.report.push_repeats("micro_f1", &micro);
    s.report.push_repeats("macro_f1", &macro_);
    s.finish("classify", &a.common)
}

fn cluster(a: ClusterArgs) -> Result<(), CliError> {
    let (mut s, g) = Session::open("cluster", &a.common, Some(&a.graph))?;
    let g = g.expect("graph loaded");
    match &a.labels {
        Some(path) => {
            s.run.input(path)?;
            let labels = labels_for(path, &g, &a.common.graph_opts)?;
            let primary = labels.primary_labels();
            let nodes: Vec<usize> = primary.keys().copied().collect();
            let truth: Vec<usize> = primary.values().copied().collect();
            let k = a.k.unwrap_or_else(|| truth.iter().collect::<BTreeSet<_>>().len());
            s.report.set("k", k);
            s.report.set("labeled_nodes", nodes.len());
            let (mut nmis, mut qs) = (Vec::new(), Vec::new());
            for &seed in &s.seeds {
                let found = kmeans(&s.model, k, seed)?;
                let restricted: Vec<usize> = nodes.iter().map(|&v| found.assignment[v]).collect();
                nmis.push((seed, nmi(&restricted, &truth)?));
                qs.push((seed, modularity(&g, &found.assignment)?));
            }
            s.report.push_repeats("nmi", &nmis);
            s.report.push_repeats("modularity", &qs);
        }
        None => {
            s.report.set("k_min", a.k_min);
            s.report.set("k_max", a.k_max);
            s.report.set("k_step", a.k_step);
            let (mut qs, mut ks) = (Vec::new(), Vec::new());
            for &seed in &s.seeds {
                let best = modularity_search(&s.model, &g, a.k_min, a.k_max, a.k_step, seed)?;
                qs.push((seed, best.modularity));
                ks.push((seed, best.k as f64));
            }
            s.report.push_repeats("modularity", &qs);
            s.report.push_repeats("best_k", &ks);
        }
    }
    s.finish("cluster", &a.common)
}

fn reconstruct(a: ReconstructArgs) -> Result<(), CliError> {
    let (mut s, g) = Session::open("reconstruct", &a.common, Some(&a.graph))?;
    let g = g.expect("graph loaded");
    // without sampling the score does not depend on the seed
    let seeds: Vec<u64> = if a.sample_nodes.is_some() { s.seeds.clone() } else { s.seeds[..1].to_vec() };
    if let Some(k) = a.sample_nodes {
        s.report.set("sample_nodes", k);
    } else {
        s.report.set("sample_nodes", "all");
    }
    let mut runs = Vec::new();
    for seed in seeds {
        let r = graph_reconstruction(&s.model, &g, a.sample_nodes, seed)?;
        if !r.zero_rows.is_empty() {
            s.report.set(format!("zero_rows.seed{seed}"), r.zero_rows.len());
        }
        s.report.set(format!("evaluated.seed{seed}"), r.evaluated);
        runs.push((seed, r.precision));
    }
    s.report.set("repeats_run", runs.len());
    s.report.push_repeats("precision", &runs);
    s.finish("reconstruct", &a.common)
}

fn ndcg(a: NdcgArgs) -> Result<(), CliError> {
    let (mut s, g) = Session::open("ndcg", &a.common, Some(&a.graph))?;
    let g = g.expect("graph loaded");
    let gr = g.reverse();
    let n = g.node_count();
    s.report.set("oracle", a.similarity);
    s.report.set("k", a.k);
    let all = match a.similarity {
        SimilarityKind::SimRank { .. } => Some(exact_rows(&g, &gr, a.similarity)?),
        _ => None,
    };
    let row = |u: usize| -> Result<_, CliError> {
        Ok(match &all {
            Some(rows) => rows[u].clone(),
            None => exact_row(&g, &gr, a.similarity, u)?,
        })
    };
    let mut runs = Vec::new();
    match a.sample_nodes {
        Some(count) if count < n => {
            s.report.set("sample_nodes", count);
            for &seed in &s.seeds {
                let nodes = sample_nodes_uniform(n, count, seed);
                let rows = nodes.into_iter().map(|u| Ok((u, row(u)?))).collect::<Result<Vec<_>, CliError>>()?;
                runs.push((seed, ndcg_at_k(&s.model, &rows, a.k)?));
            }
        }
        _ => {
            s.report.set("sample_nodes", "all");
            let rows = (0..n).map(|u| Ok((u, row(u)?))).collect::<Result<Vec<_>, CliError>>()?;
            runs.push((s.seeds[0], ndcg_at_k(&s.model, &rows, a.k)?));
        }
    }
    s.report.set("repeats_run", runs.len());
    s.report.push_repeats("ndcg", &runs);
    s.finish("ndcg", &a.common)
}
