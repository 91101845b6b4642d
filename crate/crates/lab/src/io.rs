//! File formats: edge-list graph dumps, sample CSVs and the run sidecar.

use std::io::{BufRead, Read, Write};
use std::path::Path;

use ergm_core::sampler::SampleRecord;
use ergm_core::DenseGraph;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
}

/// Writes `# n = <n>` followed by one `u v` line per edge, `u < v`.
pub fn write_edge_list<W: Write>(g: &DenseGraph, mut out: W) -> std::io::Result<()> {
    writeln!(out, "# n = {}", g.n())?;
    for (u, v) in g.edges() {
        writeln!(out, "{u} {v}")?;
    }
    Ok(())
}

/// Reads an edge list. Without an `# n = ...` header the vertex count is one
/// more than the largest label.
pub fn read_edge_list<R: BufRead>(input: R) -> Result<DenseGraph, FormatError> {
    let mut n = None;
    let mut edges = Vec::new();
    for (idx, line) in input.lines().enumerate() {
        let line = line?;
        let line = line.trim();
        let syntax = |message: String| FormatError::Syntax { line: idx + 1, message };
        if let Some(comment) = line.strip_prefix('#') {
            if let Some(value) = comment.trim().strip_prefix("n =") {
                n = Some(value.trim().parse::<usize>().map_err(|e| syntax(e.to_string()))?);
            }
            continue;
        }
        if line.is_empty() {
            continue;
        }
        let mut parts = line.split_whitespace().map(str::parse::<usize>);
        match (parts.next(), parts.next(), parts.next()) {
            (Some(Ok(u)), Some(Ok(v)), None) => edges.push((u, v)),
            _ => return Err(syntax(format!("expected two vertex labels, got {line:?}"))),
        }
    }
    let n = n.unwrap_or_else(|| edges.iter().map(|&(u, v)| u.max(v) + 1).max().unwrap_or(0));
    DenseGraph::from_edges(n, edges).map_err(|e| FormatError::Syntax { line: 0, message: e.to_string() })
}

/// One sample record tagged with the chain that produced it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StreamRecord {
    pub n: usize,
    pub chain: u64,
    pub sweep: u64,
    #[serde(rename = "E")]
    pub edges: u64,
    #[serde(rename = "V")]
    pub two_stars: u64,
    #[serde(rename = "T")]
    pub triangles: u64,
}

impl StreamRecord {
    pub fn new(n: usize, chain: u64, r: &SampleRecord) -> Self {
        StreamRecord {
            n,
            chain,
            sweep: r.sweep,
            edges: r.edges,
            two_stars: r.two_stars,
            triangles: r.triangles,
        }
    }

    pub fn record(&self) -> SampleRecord {
        SampleRecord {
            sweep: self.sweep,
            edges: self.edges,
            two_stars: self.two_stars,
            triangles: self.triangles,
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct PlainRecord {
    sweep: u64,
    #[serde(rename = "E")]
    edges: u64,
    #[serde(rename = "V")]
    two_stars: u64,
    #[serde(rename = "T")]
    triangles: u64,
}

/// A single stream with header `sweep,E,V,T`.
pub fn write_samples<W: Write>(records: &[SampleRecord], out: W) -> Result<(), FormatError> {
    let mut w = csv::Writer::from_writer(out);
    for r in records {
        w.serialize(PlainRecord {
            sweep: r.sweep,
            edges: r.edges,
            two_stars: r.two_stars,
            triangles: r.triangles,
        })?;
    }
    w.flush()?;
    Ok(())
}

/// Several streams with header `n,chain,sweep,E,V,T`.
pub fn write_streams<W: Write>(records: &[StreamRecord], out: W) -> Result<(), FormatError> {
    let mut w = csv::Writer::from_writer(out);
    for r in records {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads either CSV layout. Plain `sweep,E,V,T` rows get `n = 0, chain = 0`.
pub fn read_samples<R: Read>(input: R) -> Result<Vec<StreamRecord>, FormatError> {
    let mut reader = csv::Reader::from_reader(input);
    let tagged = reader.headers()?.iter().any(|h| h == "chain");
    if tagged {
        Ok(reader.deserialize().collect::<Result<_, _>>()?)
    } else {
        reader
            .deserialize::<PlainRecord>()
            .map(|r| {
                let r = r?;
                Ok(StreamRecord {
                    n: 0,
                    chain: 0,
                    sweep: r.sweep,
                    edges: r.edges,
                    two_stars: r.two_stars,
                    triangles: r.triangles,
                })
            })
            .collect()
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Everything needed to repeat a run bit for bit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSidecar {
    pub tool_version: String,
    pub command: String,
    pub seed: u64,
    pub n_list: Vec<usize>,
    pub samples: Option<usize>,
    pub p_tilde: Option<f64>,
    /// Edge list of a `--pattern` override.
    pub pattern: Option<Vec<[usize; 2]>>,
    pub config_sha256: String,
    pub config: String,
}

impl RunSidecar {
    pub fn write(&self, path: &Path) -> std::io::Result<()> {
        let text = toml::to_string(self).map_err(std::io::Error::other)?;
        std::fs::write(path, text)
    }

    pub fn read(path: &Path) -> std::io::Result<Self> {
        let text = std::fs::read_to_string(path)?;
        toml::from_str(&text).map_err(std::io::Error::other)
    }
}
