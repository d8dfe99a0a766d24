use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Subcommand};
use verse_core::eval::{split_edges, EdgeSplit};
use verse_core::generators::watts_strogatz_edges;

use crate::common::GraphOpts;
use crate::error::CliError;
use crate::output::{sibling, write_atomic, Run};

#[derive(Subcommand, Debug)]
pub enum GenCommand {
    /// Watts-Strogatz small-world graph, each undirected edge written once.
    Ws(WsArgs),
    /// Hold out edges for link prediction and sample non-edges.
    Split(SplitArgs),
}

#[derive(Args, Debug)]
pub struct WsArgs {
    #[arg(long)]
    pub nodes: usize,
    /// Ring neighbors per node (even).
    #[arg(long)]
    pub k: usize,
    /// Rewiring probability.
    #[arg(long)]
    pub beta: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// [default: ws-<nodes>-<k>-<beta>-<seed>.edges]
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct SplitArgs {
    #[arg(long, visible_alias = "graph")]
    pub input: PathBuf,
    /// Fraction of undirected edges held out for testing.
    #[arg(long, default_value_t = 0.5)]
    pub test_fraction: f64,
    /// Sampled non-edges per edge, on both sides of the split.
    #[arg(long, default_value_t = 1.0)]
    pub negative_ratio: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Writes <prefix>.split.tsv and <prefix>.train.edges [default: <input>].
    #[arg(long)]
    pub prefix: Option<PathBuf>,
    #[command(flatten)]
    pub graph_opts: GraphOpts,
}

pub fn run(cmd: GenCommand) -> Result<(), CliError> {
    match cmd {
        GenCommand::Ws(args) => ws(args),
        GenCommand::Split(args) => split(args),
    }
}

fn ws(args: WsArgs) -> Result<(), CliError> {
    let mut run = Run::start("gen ws", args.seed);
    let edges = watts_strogatz_edges(args.nodes, args.k, args.beta, args.seed)?;
    let output = args
        .output
        .clone()
        .unwrap_or_else(|| PathBuf::from(format!("ws-{}-{}-{}-{}.edges", args.nodes, args.k, args.beta, args.seed)));
    write_atomic(&output, |w| edges.iter().try_for_each(|(u, v)| writeln!(w, "{u} {v}")))?;
    run.set("nodes", args.nodes);
    run.set("k", args.k);
    run.set("beta", args.beta);
    run.set("edges", edges.len());
    run.output(&output);
    run.finish(&output)?;
    println!("wrote {} ({} nodes, {} edges)", output.display(), args.nodes, edges.len());
    Ok(())
}

fn split(args: SplitArgs) -> Result<(), CliError> {
    let mut run = Run::start("gen split", args.seed);
    run.input(&args.input)?;
    let g = args.graph_opts.load(&args.input)?;
    let s = split_edges(&g, args.test_fraction, args.negative_ratio, args.seed)?;
    let prefix = args.prefix.clone().unwrap_or_else(|| args.input.clone());
    let split_path = sibling(&prefix, ".split.tsv");
    let train_path = sibling(&prefix, ".train.edges");
    let n = g.node_count();

    write_atomic(&train_path, |w| {
        writeln!(w, "# nodes {n}")?;
        s.train_pos.iter().try_for_each(|(u, v)| writeln!(w, "{u} {v}"))
    })?;
    write_atomic(&split_path, |w| write_split(w, &s, n))?;

    args.graph_opts.record(&mut run, &g);
    run.set("test_fraction", args.test_fraction);
    run.set("negative_ratio", args.negative_ratio);
    run.set("train_pos", s.train_pos.len());
    run.set("train_neg", s.train_neg.len());
    run.set("test_pos", s.test_pos.len());
    run.set("test_neg", s.test_neg.len());
    run.output(&split_path);
    run.output(&train_path);
    run.finish(&split_path)?;
    println!(
        "wrote {} and {} (train on the latter with --num-nodes {n})",
        split_path.display(),
        train_path.display()
    );
    Ok(())
}

/// `u v label side` lines, `label` 1 for edges and 0 for non-edges.
fn write_split(w: &mut dyn Write, s: &EdgeSplit, n: usize) -> std::io::Result<()> {
    writeln!(w, "# nodes {n}")?;
    for (pairs, label, side) in [
        (&s.train_pos, 1, "train"),
        (&s.train_neg, 0, "train"),
        (&s.test_pos, 1, "test"),
        (&s.test_neg, 0, "test"),
    ] {
        for (u, v) in pairs {
            writeln!(w, "{u} {v} {label} {side}")?;
        }
    }
    Ok(())
}

pub fn read_split(path: &Path) -> Result<EdgeSplit, CliError> {
    let file = File::open(path).map_err(|e| CliError::input(path.display(), e))?;
    let mut s = EdgeSplit::default();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let bad = || CliError::Input(format!("{}:{}: expected `u v label train|test`", path.display(), i + 1));
        let f: Vec<&str> = line.split_whitespace().collect();
        if f.len() != 4 {
            return Err(bad());
        }
        let u: u32 = f[0].parse().map_err(|_| bad())?;
        let v: u32 = f[1].parse().map_err(|_| bad())?;
        let bucket = match (f[2], f[3]) {
            ("1", "train") => &mut s.train_pos,
            ("0", "train") => &mut s.train_neg,
            ("1", "test") => &mut s.test_pos,
            ("0", "test") => &mut s.test_neg,
            _ => return Err(bad()),
        };
        bucket.push((u, v));
    }
    Ok(s)
}
