//! Embedding file formats.
//!
//! * `verse` (default): magic `VRSE`, `u32` version 1, `u64` n, `u32` dim,
//!   then `n * dim` little-endian `f32` values, row-major.
//! * `raw`: the payload alone; readers supply `n` and `dim`.
//! * `text`: one row per line, `index v1 .. vd`, six significant digits.

use std::fmt;
use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;
use std::str::FromStr;

use thiserror::Error;

use super::EmbeddingModel;

const MAGIC: &[u8; 4] = b"VRSE";
const VERSION: u32 = 1;
const HEADER_LEN: usize = 4 + 4 + 8 + 4;

#[derive(Debug, Error)]
pub enum ModelIoError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("not an embedding file (bad magic bytes)")]
    BadMagic,
    #[error("unsupported embedding file version {0}")]
    BadVersion(u32),
    #[error("payload holds {found} bytes, header promises {expected}")]
    SizeMismatch { expected: u64, found: u64 },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("empty embedding (n={n}, dim={dim})")]
    Empty { n: usize, dim: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum ModelFormat {
    #[default]
    Verse,
    Raw,
    Text,
}

impl FromStr for ModelFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "verse" | "bin" => Ok(ModelFormat::Verse),
            "raw" => Ok(ModelFormat::Raw),
            "text" | "txt" => Ok(ModelFormat::Text),
            other => Err(format!("unknown embedding format `{other}` (expected verse, raw or text)")),
        }
    }
}

impl fmt::Display for ModelFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ModelFormat::Verse => "verse",
            ModelFormat::Raw => "raw",
            ModelFormat::Text => "text",
        })
    }
}

/// Round to `digits` significant digits and print the shortest decimal that
/// reads back as the rounded value.
pub fn format_significant(x: f64, digits: usize) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x:?}");
    }
    let rounded: f64 = format!("{:.*e}", digits.saturating_sub(1), x)
        .parse()
        .expect("scientific notation parses");
    format!("{rounded:?}")
}

/// Write the model's `w` matrix. Context matrices are not stored; call
/// [`EmbeddingModel::into_output`] first to concatenate them.
pub fn save_model<P: AsRef<Path>>(model: &EmbeddingModel, path: P, format: ModelFormat) -> Result<(), ModelIoError> {
    let mut out = BufWriter::new(File::create(path)?);
    write_model(model, &mut out, format)?;
    out.flush()?;
    Ok(())
}

pub fn write_model<W: Write>(model: &EmbeddingModel, out: &mut W, format: ModelFormat) -> io::Result<()> {
    match format {
        ModelFormat::Verse => {
            out.write_all(MAGIC)?;
            out.write_all(&VERSION.to_le_bytes())?;
            out.write_all(&(model.node_count() as u64).to_le_bytes())?;
            out.write_all(&(model.dim() as u32).to_le_bytes())?;
            write_payload(model, out)
        }
        ModelFormat::Raw => write_payload(model, out),
        ModelFormat::Text => {
            for v in 0..model.node_count() {
                write!(out, "{v}")?;
                for &x in model.row(v) {
                    write!(out, " {}", format_significant(x as f64, 6))?;
                }
                writeln!(out)?;
            }
            Ok(())
        }
    }
}

fn write_payload<W: Write>(model: &EmbeddingModel, out: &mut W) -> io::Result<()> {
    for &x in model.matrix() {
        out.write_all(&x.to_le_bytes())?;
    }
    Ok(())
}

fn decode_payload(bytes: &[u8]) -> Vec<f32> {
    bytes
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
        .collect()
}

fn build(n: usize, dim: usize, values: Vec<f32>) -> Result<EmbeddingModel, ModelIoError> {
    EmbeddingModel::from_matrix(n, dim, values).map_err(|_| ModelIoError::Empty { n, dim })
}

/// Read a file in the default header format.
pub fn load_model<P: AsRef<Path>>(path: P) -> Result<EmbeddingModel, ModelIoError> {
    let mut bytes = Vec::new();
    File::open(path)?.read_to_end(&mut bytes)?;
    if bytes.len() < HEADER_LEN {
        if bytes.len() >= 4 && &bytes[..4] != MAGIC {
            return Err(ModelIoError::BadMagic);
        }
        return Err(ModelIoError::SizeMismatch {
            expected: HEADER_LEN as u64,
            found: bytes.len() as u64,
        });
    }
    if &bytes[..4] != MAGIC {
        return Err(ModelIoError::BadMagic);
    }
    let version = u32::from_le_bytes(bytes[4..8].try_into().unwrap());
    if version != VERSION {
        return Err(ModelIoError::BadVersion(version));
    }
    let n = u64::from_le_bytes(bytes[8..16].try_into().unwrap());
    let dim = u32::from_le_bytes(bytes[16..20].try_into().unwrap()) as u64;
    let payload = &bytes[HEADER_LEN..];
    let expected = n.checked_mul(dim).and_then(|x| x.checked_mul(4)).unwrap_or(u64::MAX);
    if payload.len() as u64 != expected {
        return Err(ModelIoError::SizeMismatch {
            expected,
            found: payload.len() as u64,
        });
    }
    build(n as usize, dim as usize, decode_payload(payload))
}

/// Read a headerless file of `n * dim` floats.
pub fn load_raw<P: AsRef<Path>>(path: P, n: usize, dim: usize) -> Result<EmbeddingModel, ModelIoError> {
    let mut bytes = Vec::new();
    File::open(path)?.read_to_end(&mut bytes)?;
    let expected = (n * dim * 4) as u64;
    if bytes.len() as u64 != expected {
        return Err(ModelIoError::SizeMismatch {
            expected,
            found: bytes.len() as u64,
        });
    }
    build(n, dim, decode_payload(&bytes))
}

/// Read the text format. Rows must appear in index order.
pub fn load_text<P: AsRef<Path>>(path: P) -> Result<EmbeddingModel, ModelIoError> {
    let reader = BufReader::new(File::open(path)?);
    let mut values = Vec::new();
    let mut dim = None;
    let mut n = 0;
    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let parse_err = |message: String| ModelIoError::Parse {
            line: lineno + 1,
            message,
        };
        let mut fields = line.split_whitespace();
        let index: usize = fields
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| parse_err("missing row index".into()))?;
        if index != n {
            return Err(parse_err(format!("expected row {n}, found {index}")));
        }
        let row: Vec<f32> = fields
            .map(|t| t.parse::<f32>().map_err(|e| parse_err(format!("bad value `{t}`: {e}"))))
            .collect::<Result<_, _>>()?;
        match dim {
            None => dim = Some(row.len()),
            Some(d) if d != row.len() => {
                return Err(parse_err(format!("row has {} values, expected {d}", row.len())));
            }
            Some(_) => {}
        }
        values.extend(row);
        n += 1;
    }
    build(n, dim.unwrap_or(0), values)
}
