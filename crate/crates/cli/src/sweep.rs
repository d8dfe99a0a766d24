use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use clap::{Args, ValueEnum};
use verse_core::eval::{
    default_grid, hverse_sweep, read_labels, ClassificationMode, EdgeOperator, EvalReport, SweepTask, CSV_HEADER,
};
use verse_core::trainer::{write_model, ModelFormat, TrainConfig};
use verse_core::SimilaritySpec;

use crate::common::{default_path, GraphOpts};
use crate::error::CliError;
use crate::output::{sibling, write_atomic, Run};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum TaskName {
    Classify,
    Linkpred,
    Cluster,
    Reconstruct,
}

#[derive(Args, Debug)]
pub struct SweepArgs {
    #[arg(long, visible_alias = "input")]
    pub graph: PathBuf,
    #[arg(long, value_enum)]
    pub task: TaskName,
    /// Labels for classify, or for NMI-scored clustering.
    #[arg(long)]
    pub labels: Option<PathBuf>,
    /// Cells as KIND[:PARAM][@ORDER], comma-separated [default: full 26-cell grid].
    #[arg(long, value_delimiter = ',')]
    pub grid: Vec<SimilaritySpec>,
    #[arg(long, default_value_t = 128)]
    pub dim: usize,
    #[arg(long, default_value_t = 100)]
    pub epochs: usize,
    #[arg(long, default_value_t = 3)]
    pub negatives: usize,
    #[arg(long, default_value_t = 0.0025)]
    pub lr: f32,
    #[arg(long, default_value_t = 1e-4)]
    pub lr_floor: f32,
    #[arg(long, default_value_t = 1)]
    pub threads: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value = "multiclass")]
    pub mode: ClassificationMode,
    #[arg(long, default_value = "hadamard")]
    pub operator: EdgeOperator,
    #[arg(long, default_value_t = 1.0)]
    pub negative_ratio: f64,
    #[arg(long, default_value_t = 2)]
    pub k_min: usize,
    #[arg(long, default_value_t = 50)]
    pub k_max: usize,
    #[arg(long, default_value_t = 1)]
    pub k_step: usize,
    #[arg(long)]
    pub sample_nodes: Option<usize>,
    /// Embedding of the winning cell [default: <graph>.sweep.emb].
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Per-cell CSV, flushed after every cell [default: <output>.cells.csv].
    #[arg(long)]
    pub table: Option<PathBuf>,
    #[arg(long, default_value = "verse")]
    pub format: ModelFormat,
    #[command(flatten)]
    pub graph_opts: GraphOpts,
}

pub fn run(args: SweepArgs) -> Result<(), CliError> {
    let mut run = Run::start("sweep", args.seed);
    run.input(&args.graph)?;
    let g = args.graph_opts.load(&args.graph)?;
    let gr = g.reverse();

    let labels = match &args.labels {
        Some(path) => {
            run.input(path)?;
            Some(read_labels(path, args.graph_opts.resolver(&g))?)
        }
        None => None,
    };
    let task = match args.task {
        TaskName::Classify => SweepTask::Classification {
            labels: labels.ok_or_else(|| CliError::Usage("--task classify needs --labels".into()))?,
            mode: args.mode,
        },
        TaskName::Linkpred => SweepTask::LinkPrediction {
            op: args.operator,
            negative_ratio: args.negative_ratio,
        },
        TaskName::Cluster => {
            let labels = labels
                .map(|l| {
                    let primary = l.primary_labels();
                    if primary.len() != g.node_count() {
                        return Err(CliError::Input(format!(
                            "clustering labels cover {} of {} nodes",
                            primary.len(),
                            g.node_count()
                        )));
                    }
                    Ok(primary.into_values().collect())
                })
                .transpose()?;
            SweepTask::Clustering {
                labels,
                k_min: args.k_min,
                k_max: args.k_max,
                k_step: args.k_step,
            }
        }
        TaskName::Reconstruct => SweepTask::Reconstruction {
            sample_nodes: args.sample_nodes,
        },
    };
    let grid = if args.grid.is_empty() { default_grid() } else { args.grid.clone() };
    let cfg = TrainConfig {
        dim: args.dim,
        negatives: args.negatives,
        epochs: args.epochs,
        lr0: args.lr,
        lr_floor: args.lr_floor,
        threads: args.threads,
        seed: args.seed,
        freeze_targets: false,
    };
    cfg.validate()?;

    let output = args.output.clone().unwrap_or_else(|| default_path(&args.graph, ".sweep.emb"));
    let table = args.table.clone().unwrap_or_else(|| sibling(&output, ".cells.csv"));
    // the table is written incrementally so an interrupted sweep keeps its
    // finished cells
    let mut table_out = BufWriter::new(File::create(&table).map_err(|e| CliError::input(table.display(), e))?);
    writeln!(table_out, "{CSV_HEADER}")?;
    table_out.flush()?;
    let mut io_error = None;
    let outcome = hverse_sweep(&g, &gr, &task, &cfg, &grid, |cell| {
        let mut row = EvalReport::new(task.name()).with_spec(cell.spec.kind.to_string(), cell.spec.order.to_string());
        row.push(task.metric(), cell.score, Some(args.seed));
        let written = row.write_csv(&mut table_out, false).and_then(|_| table_out.flush());
        if let Err(e) = written {
            io_error.get_or_insert(e);
        }
    })?;
    if let Some(e) = io_error {
        return Err(CliError::input(table.display(), e));
    }

    write_atomic(&output, |mut w| write_model(&outcome.best_model, &mut w, args.format))?;
    let mut report = EvalReport::new(format!("sweep-{}", task.name()))
        .with_spec(outcome.best.kind.to_string(), outcome.best.order.to_string());
    report.set("cells", outcome.cells.len());
    report.set("cv_folds", verse_core::eval::CV_FOLDS);
    report.set("best", outcome.best);
    report.push(format!("best_{}", task.metric()), outcome.best_score, Some(args.seed));
    let report_path = sibling(&output, ".report.txt");
    write_atomic(&report_path, |w| report.write_text(w))?;

    args.graph_opts.record(&mut run, &g);
    run.set("task", task.name());
    run.set("metric", task.metric());
    run.set("grid", grid.iter().map(|s| s.to_string()).collect::<Vec<_>>());
    run.set("dim", cfg.dim);
    run.set("epochs", cfg.epochs);
    run.set("negatives", cfg.negatives);
    run.set_f32("lr", cfg.lr0);
    run.set_f32("lr_floor", cfg.lr_floor);
    run.set("threads", cfg.threads);
    run.set("format", args.format.to_string());
    run.set("similarity", outcome.best.kind.to_string());
    run.set("order", outcome.best.order.as_number());
    run.set("best_score", outcome.best_score);
    run.output(&output);
    run.output(&table);
    run.output(&report_path);
    run.finish(&output)?;
    println!(
        "best {} = {} with {} ({} cells, table {})",
        task.metric(),
        outcome.best_score,
        outcome.best,
        outcome.cells.len(),
        table.display()
    );
    Ok(())
}
