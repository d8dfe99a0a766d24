use std::path::PathBuf;

use clap::Args;
use verse_core::similarity::{exact_row, exact_rows};
use verse_core::trainer::format_significant;
use verse_core::SimilarityKind;

use crate::common::{default_path, node_token, GraphOpts};
use crate::error::CliError;
use crate::output::{write_atomic, Run};

#[derive(Args, Debug)]
pub struct OracleArgs {
    #[arg(long, visible_alias = "input")]
    pub graph: PathBuf,
    #[arg(long, default_value = "ppr:0.85")]
    pub similarity: SimilarityKind,
    /// Comma-separated node tokens [default: every node].
    #[arg(long, value_delimiter = ',')]
    pub nodes: Vec<String>,
    /// Output file [default: <graph>.oracle.txt].
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[command(flatten)]
    pub graph_opts: GraphOpts,
}

pub fn run(args: OracleArgs) -> Result<(), CliError> {
    let mut run = Run::start("oracle", 0);
    run.input(&args.graph)?;
    let g = args.graph_opts.load(&args.graph)?;
    let gr = g.reverse();
    let resolve = args.graph_opts.resolver(&g);
    let nodes: Vec<usize> = if args.nodes.is_empty() {
        (0..g.node_count()).collect()
    } else {
        args.nodes
            .iter()
            .map(|t| resolve(t).ok_or_else(|| CliError::Input(format!("unknown node `{t}`"))))
            .collect::<Result<_, _>>()?
    };
    let rows = match args.similarity {
        SimilarityKind::SimRank { .. } => {
            let all = exact_rows(&g, &gr, args.similarity)?;
            nodes.iter().map(|&u| all[u].clone()).collect()
        }
        kind => nodes.iter().map(|&u| exact_row(&g, &gr, kind, u)).collect::<Result<Vec<_>, _>>()?,
    };

    let output = args.output.clone().unwrap_or_else(|| default_path(&args.graph, ".oracle.txt"));
    write_atomic(&output, |w| {
        for (&u, row) in nodes.iter().zip(&rows) {
            let source = node_token(&g, u);
            for (v, &p) in row.values().iter().enumerate() {
                if p > 0.0 {
                    writeln!(w, "{source} {} {}", node_token(&g, v), format_significant(p, 6))?;
                }
            }
        }
        Ok(())
    })?;
    args.graph_opts.record(&mut run, &g);
    run.set("similarity", args.similarity.to_string());
    run.set("rows", nodes.len());
    run.output(&output);
    run.finish(&output)?;
    println!("wrote {} ({} rows, {})", output.display(), nodes.len(), args.similarity);
    Ok(())
}
