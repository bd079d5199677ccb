//! Dataset, query and result files.
//!
//! Binary vector files start with the magic `MEB1`, then `u32` row count and
//! `u32` dimension, then `rows * dim` `f32` values in row-major order. All
//! numbers are little-endian. A query file is a vector file with one row.
//! Files ending in `.csv` hold one vector per line, comma separated, without
//! a header.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::vectors::{Query, VectorSet};

pub const MAGIC: [u8; 4] = *b"MEB1";
const HEADER_LEN: u64 = 12;

fn is_csv(path: &Path) -> bool {
    path.extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("csv"))
}

pub fn encode_binary(vectors: &VectorSet) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_LEN as usize + 4 * vectors.as_slice().len());
    out.extend_from_slice(&MAGIC);
    out.extend_from_slice(&(vectors.rows() as u32).to_le_bytes());
    out.extend_from_slice(&(vectors.dim() as u32).to_le_bytes());
    for v in vectors.as_slice() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn decode_binary(path: &Path, bytes: &[u8]) -> Result<VectorSet> {
    if bytes.len() < HEADER_LEN as usize {
        if bytes.len() >= 4 && bytes[..4] != MAGIC {
            return Err(Error::BadMagic {
                path: path.into(),
                found: bytes[..4].try_into().unwrap(),
                expected: MAGIC,
            });
        }
        return Err(Error::Truncated {
            path: path.into(),
            expected: HEADER_LEN,
            found: bytes.len() as u64,
        });
    }
    let magic: [u8; 4] = bytes[..4].try_into().unwrap();
    if magic != MAGIC {
        return Err(Error::BadMagic {
            path: path.into(),
            found: magic,
            expected: MAGIC,
        });
    }
    let rows = u32::from_le_bytes(bytes[4..8].try_into().unwrap()) as u64;
    let dim = u32::from_le_bytes(bytes[8..12].try_into().unwrap()) as u64;
    let expected = HEADER_LEN + 4 * rows * dim;
    let found = bytes.len() as u64;
    if found < expected {
        return Err(Error::Truncated {
            path: path.into(),
            expected,
            found,
        });
    }
    if found > expected {
        return Err(Error::Format {
            path: path.into(),
            message: format!(
                "{} trailing bytes after {rows}x{dim} payload",
                found - expected
            ),
        });
    }
    let data = bytes[HEADER_LEN as usize..]
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
        .collect();
    VectorSet::new(rows as usize, dim as usize, data).map_err(|e| Error::Format {
        path: path.into(),
        message: e.to_string(),
    })
}

fn read_csv(path: &Path) -> Result<VectorSet> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(BufReader::new(file));
    let mut rows = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record?;
        let row = record
            .iter()
            .map(|field| {
                field.parse::<f32>().map_err(|e| Error::Format {
                    path: path.into(),
                    message: format!("row {}: {field:?}: {e}", line + 1),
                })
            })
            .collect::<Result<Vec<f32>>>()?;
        rows.push(row);
    }
    VectorSet::from_rows(&rows).map_err(|e| Error::Format {
        path: path.into(),
        message: e.to_string(),
    })
}

fn write_csv(path: &Path, vectors: &VectorSet) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut writer = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(BufWriter::new(file));
    for row in vectors.iter() {
        writer.write_record(row.iter().map(|v| v.to_string()))?;
    }
    writer.flush().map_err(|e| Error::io(path, e))
}

/// Reads a vector file, CSV when the extension is `.csv`, binary otherwise.
pub fn read_dataset(path: impl AsRef<Path>) -> Result<VectorSet> {
    let path = path.as_ref();
    if is_csv(path) {
        return read_csv(path);
    }
    let mut bytes = Vec::new();
    File::open(path)
        .and_then(|mut f| f.read_to_end(&mut bytes))
        .map_err(|e| Error::io(path, e))?;
    decode_binary(path, &bytes)
}

pub fn write_dataset(path: impl AsRef<Path>, vectors: &VectorSet) -> Result<()> {
    let path = path.as_ref();
    if is_csv(path) {
        return write_csv(path, vectors);
    }
    std::fs::write(path, encode_binary(vectors)).map_err(|e| Error::io(path, e))
}

/// Reads a one-row vector file and checks it against the dataset dimension.
pub fn read_query(path: impl AsRef<Path>, dim: usize) -> Result<Query> {
    let path = path.as_ref();
    let vs = read_dataset(path)?;
    if vs.rows() != 1 {
        return Err(Error::Format {
            path: path.into(),
            message: format!("query file must hold one vector, found {}", vs.rows()),
        });
    }
    if vs.dim() != dim {
        return Err(Error::Format {
            path: path.into(),
            message: format!(
                "query has dimension {}, dataset has dimension {dim}",
                vs.dim()
            ),
        });
    }
    Ok(vs.query(0))
}

pub fn write_query(path: impl AsRef<Path>, query: &Query) -> Result<()> {
    let vs = VectorSet::new(1, query.dim(), query.values().to_vec())?;
    write_dataset(path, &vs)
}

/// One line of a results file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub method: String,
    pub params: serde_json::Value,
    pub k: usize,
    pub epsilon: Option<f64>,
    pub delta: Option<f64>,
    pub seed: u64,
    pub precision: Option<f64>,
    pub suboptimality: Option<f64>,
    pub pulls_total: Option<u64>,
    pub ops_naive: u64,
    pub wall_ms: Option<f64>,
}

/// One point of a precision/speedup curve.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub method: String,
    pub knob: String,
    pub precision: f64,
    pub speedup_ops: f64,
    pub speedup_wall: f64,
}

pub fn write_results_to<W: Write>(mut out: W, records: &[RunRecord]) -> Result<()> {
    for r in records {
        serde_json::to_writer(&mut out, r)?;
        out.write_all(b"\n")
            .map_err(|e| Error::io("<results>", e))?;
    }
    out.flush().map_err(|e| Error::io("<results>", e))
}

/// Writes records as JSON lines.
pub fn write_results(path: impl AsRef<Path>, records: &[RunRecord]) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_results_to(BufWriter::new(file), records).map_err(|e| match e {
        Error::Io { source, .. } => Error::io(path, source),
        other => other,
    })
}

pub fn read_results(path: impl AsRef<Path>) -> Result<Vec<RunRecord>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| Ok(serde_json::from_str(l)?))
        .collect()
}

pub fn write_curve_to<W: Write>(out: W, points: &[CurvePoint]) -> Result<()> {
    let mut writer = csv::Writer::from_writer(out);
    for p in points {
        writer.serialize(p)?;
    }
    writer.flush().map_err(|e| Error::io("<curve>", e))
}

/// Writes a curve CSV with header `method,knob,precision,speedup_ops,speedup_wall`.
pub fn write_curve(path: impl AsRef<Path>, points: &[CurvePoint]) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_curve_to(BufWriter::new(file), points)
}

pub fn read_curve(path: impl AsRef<Path>) -> Result<Vec<CurvePoint>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    csv::Reader::from_reader(BufReader::new(file))
        .deserialize()
        .map(|r| r.map_err(Error::from))
        .collect()
}
