use std::path::PathBuf;

use clap::Args;
use verse_core::trainer::{train_fverse, train_verse, write_model, ModelFormat, TrainConfig};
use verse_core::{Order, SimilarityKind, SimilaritySpec};

use crate::common::{default_path, GraphOpts};
use crate::error::CliError;
use crate::output::{sibling, write_atomic, Run};

/// Default initial rate of the exhaustive trainer, whose row steps need a
/// larger rate than single sampled pairs.
const FULL_LR: f32 = 0.1;

#[derive(Args, Debug)]
pub struct TrainArgs {
    /// Edge list, one `u v` pair per line.
    #[arg(long, visible_alias = "graph")]
    pub input: PathBuf,
    /// Embedding file [default: <input>.emb].
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long, default_value_t = 128)]
    pub dim: usize,
    /// ppr[:ALPHA], adj or simrank[:C].
    #[arg(long, default_value = "ppr:0.85")]
    pub similarity: SimilarityKind,
    /// 1 for a single matrix, 2 for source and context matrices.
    #[arg(long, default_value = "1")]
    pub order: Order,
    #[arg(long, default_value_t = 100)]
    pub epochs: usize,
    /// Noise samples per positive pair.
    #[arg(long, default_value_t = 3)]
    pub negatives: usize,
    /// Initial learning rate [default: 0.0025, or 0.1 with --full].
    #[arg(long)]
    pub lr: Option<f32>,
    /// Learning rate at the end of the linear decay.
    #[arg(long, default_value_t = 1e-4)]
    pub lr_floor: f32,
    #[arg(long, default_value_t = 1)]
    pub threads: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Exhaustive training on exact similarity rows (small graphs).
    #[arg(long)]
    pub full: bool,
    /// With --full, update source rows only.
    #[arg(long, requires = "full")]
    pub freeze_targets: bool,
    /// With --order 2, write [W | W'] instead of W.
    #[arg(long)]
    pub concat_context: bool,
    #[arg(long, default_value = "verse")]
    pub format: ModelFormat,
    #[command(flatten)]
    pub graph: GraphOpts,
}

pub fn run(args: TrainArgs) -> Result<(), CliError> {
    let mut run = Run::start("train", args.seed);
    run.input(&args.input)?;
    let output = args.output.clone().unwrap_or_else(|| default_path(&args.input, ".emb"));
    let g = args.graph.load(&args.input)?;
    let gr = g.reverse();
    let spec = SimilaritySpec::new(args.similarity, args.order);
    let cfg = TrainConfig {
        dim: args.dim,
        negatives: args.negatives,
        epochs: args.epochs,
        lr0: args.lr.unwrap_or(if args.full { FULL_LR } else { TrainConfig::default().lr0 }),
        lr_floor: args.lr_floor,
        threads: args.threads,
        seed: args.seed,
        freeze_targets: args.freeze_targets,
    };

    args.graph.record(&mut run, &g);
    run.set("trainer", if args.full { "fverse" } else { "verse" });
    run.set("similarity", args.similarity.to_string());
    run.set("order", args.order.as_number());
    run.set("dim", cfg.dim);
    run.set("epochs", cfg.epochs);
    run.set("negatives", cfg.negatives);
    run.set_f32("lr", cfg.lr0);
    run.set_f32("lr_floor", cfg.lr_floor);
    run.set("threads", cfg.threads);
    run.set("freeze_targets", cfg.freeze_targets);
    run.set("concat_context", args.concat_context);
    run.set("format", args.format.to_string());

    let model = if args.full {
        train_fverse(&g, &gr, spec, &cfg)?
    } else {
        train_verse(&g, &gr, spec, &cfg)?
    };
    let model = model.into_output(args.concat_context);
    write_atomic(&output, |mut w| write_model(&model, &mut w, args.format))?;
    run.output(&output);
    if let Some(names) = g.names() {
        let vocab = sibling(&output, ".vocab");
        write_atomic(&vocab, |w| names.iter().try_for_each(|name| writeln!(w, "{name}")))?;
        run.output(&vocab);
    }
    run.set("output_dim", model.dim());
    run.finish(&output)?;
    println!("wrote {} ({} x {}, {spec})", output.display(), model.node_count(), model.dim());
    Ok(())
}
