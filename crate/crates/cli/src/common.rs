use std::fs::File;
use std::io::Read;
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use verse_core::trainer::{load_model, load_raw, load_text, EmbeddingModel};
use verse_core::{load_edge_list, Graph, LoadOptions};

use crate::error::CliError;
use crate::output::Run;

/// How edge-list lines become arcs.
#[derive(Args, Debug, Clone)]
pub struct GraphOpts {
    /// Keep each line as a single directed arc.
    #[arg(long, conflicts_with = "symmetrize")]
    pub directed: bool,
    /// Add both directions for every line (the default).
    #[arg(long)]
    pub symmetrize: bool,
    /// Map arbitrary node tokens to dense indices by first appearance.
    #[arg(long)]
    pub remap: bool,
    /// Pad the graph with isolated nodes up to this count.
    #[arg(long, value_name = "N")]
    pub num_nodes: Option<usize>,
}

impl GraphOpts {
    pub fn symmetric(&self) -> bool {
        !self.directed
    }

    pub fn load(&self, path: &Path) -> Result<Graph, CliError> {
        let g = load_edge_list(
            path,
            LoadOptions {
                remap: self.remap,
                symmetrize: self.symmetric(),
            },
        )?;
        let Some(n) = self.num_nodes else {
            return Ok(g);
        };
        if n < g.node_count() {
            return Err(CliError::Usage(format!(
                "--num-nodes {n} is smaller than the {} nodes in {}",
                g.node_count(),
                path.display()
            )));
        }
        if self.remap {
            return Err(CliError::Usage("--num-nodes cannot be combined with --remap".into()));
        }
        let edges: Vec<(u32, u32)> = g.edges().collect();
        Ok(Graph::from_edges(n, &edges)?)
    }

    pub fn record(&self, run: &mut Run, g: &Graph) {
        run.set("symmetrize", self.symmetric());
        run.set("remap", self.remap);
        run.set("nodes", g.node_count());
        run.set("arcs", g.edge_count());
    }

    /// Resolve a node token: vocabulary lookup with `--remap`, an integer
    /// index otherwise.
    pub fn resolver<'a>(&self, g: &'a Graph) -> impl Fn(&str) -> Option<usize> + 'a {
        let remap = self.remap;
        move |token: &str| {
            if remap {
                g.index_of(token)
            } else {
                token.parse().ok().filter(|&v: &usize| v < g.node_count())
            }
        }
    }
}

pub fn node_token(g: &Graph, v: usize) -> String {
    match g.names() {
        Some(names) => names[v].clone(),
        None => v.to_string(),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum EmbeddingFormat {
    /// Binary with header, or text, detected from the first bytes.
    Auto,
    Verse,
    /// Headerless floats; rows taken from the graph.
    Raw,
    Text,
}

/// Load an embedding; `n` is required for raw files.
pub fn load_embedding(path: &Path, format: EmbeddingFormat, n: Option<usize>) -> Result<EmbeddingModel, CliError> {
    let context = |e: verse_core::trainer::ModelIoError| CliError::input(path.display(), e);
    match format {
        EmbeddingFormat::Verse => load_model(path).map_err(context),
        EmbeddingFormat::Text => load_text(path).map_err(context),
        EmbeddingFormat::Raw => {
            let n = n.ok_or_else(|| CliError::Usage("raw embeddings need --graph for the row count".into()))?;
            let bytes = std::fs::metadata(path).map_err(|e| CliError::input(path.display(), e))?.len() as usize;
            if n == 0 || bytes % (4 * n) != 0 {
                return Err(CliError::Input(format!(
                    "{}: {bytes} bytes do not split into {n} rows of f32",
                    path.display()
                )));
            }
            load_raw(path, n, bytes / (4 * n)).map_err(context)
        }
        EmbeddingFormat::Auto => {
            let mut magic = [0u8; 4];
            let mut file = File::open(path).map_err(|e| CliError::input(path.display(), e))?;
            let k = file.read(&mut magic).map_err(|e| CliError::input(path.display(), e))?;
            if k == 4 && &magic == b"VRSE" {
                load_model(path).map_err(context)
            } else {
                load_text(path).map_err(context)
            }
        }
    }
}

pub fn check_rows(model: &EmbeddingModel, g: &Graph) -> Result<(), CliError> {
    if model.node_count() != g.node_count() {
        return Err(CliError::Input(format!(
            "embedding has {} rows but the graph has {} nodes",
            model.node_count(),
            g.node_count()
        )));
    }
    Ok(())
}

pub fn default_path(base: &Path, suffix: &str) -> PathBuf {
    crate::output::sibling(base, suffix)
}
