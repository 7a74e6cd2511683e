//! Dataset ingestion: numeric feature tables and directed edge lists.

use std::collections::hash_map::Entry;
use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, Read};
use std::path::Path;

use distort_core::cover::Digraph;
use nalgebra::DMatrix;

use crate::error::{BenchError, Result};

/// Normalized design matrix, one column per sample.
#[derive(Debug, Clone)]
pub struct Features {
    /// `d × n`; each row has zero mean and, unless constant, unit sample
    /// standard deviation.
    pub x: DMatrix<f64>,
    pub had_header: bool,
    pub warnings: Vec<String>,
}

fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|source| BenchError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Reads a CSV of numeric rows (one sample per row) and normalizes every
/// attribute. A first line with any non-numeric cell is taken as a header.
pub fn load_feature_matrix(path: impl AsRef<Path>) -> Result<Features> {
    let path = path.as_ref();
    read_feature_matrix(open(path)?, path)
}

pub fn read_feature_matrix<R: Read>(reader: R, path: &Path) -> Result<Features> {
    let mut csv = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let parse_err = |line: usize, message: String| BenchError::Parse {
        path: path.to_path_buf(),
        line,
        message,
    };

    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut had_header = false;
    let mut width = None;
    for (index, record) in csv.records().enumerate() {
        let record = record?;
        let line = record.position().map_or(index + 1, |p| p.line() as usize);
        if record.iter().all(str::is_empty) {
            continue;
        }
        let parsed: Vec<Option<f64>> = record.iter().map(|cell| cell.parse::<f64>().ok()).collect();
        if rows.is_empty() && !had_header && parsed.iter().any(Option::is_none) {
            had_header = true;
            width = Some(record.len());
            continue;
        }
        let expected = *width.get_or_insert(record.len());
        if record.len() != expected {
            return Err(parse_err(line, format!("expected {expected} columns, found {}", record.len())));
        }
        let mut row = Vec::with_capacity(expected);
        for (col, (cell, value)) in record.iter().zip(parsed).enumerate() {
            match value {
                Some(v) if v.is_finite() => row.push(v),
                _ => return Err(parse_err(line, format!("column {}: non-numeric value {cell:?}", col + 1))),
            }
        }
        rows.push(row);
    }

    let data_err = |message: &str| BenchError::Data {
        path: path.to_path_buf(),
        message: message.to_string(),
    };
    if rows.is_empty() {
        return Err(data_err("no data rows"));
    }
    if rows.len() < 2 {
        return Err(data_err("a single sample leaves the standard deviation undefined"));
    }
    let (x, warnings) = normalize(&rows);
    Ok(Features { x, had_header, warnings })
}

/// Centers each attribute and scales it to unit sample standard deviation;
/// constant attributes are centered only.
pub fn normalize(rows: &[Vec<f64>]) -> (DMatrix<f64>, Vec<String>) {
    let n = rows.len();
    let d = rows.first().map_or(0, Vec::len);
    let mut x = DMatrix::from_fn(d, n, |i, j| rows[j][i]);
    let mut warnings = Vec::new();
    for i in 0..d {
        let mut row = x.row_mut(i);
        let mean = row.mean();
        row.add_scalar_mut(-mean);
        let var = row.norm_squared() / (n as f64 - 1.0);
        let std = var.sqrt();
        if std > 1e-12 * mean.abs().max(1.0) {
            row /= std;
        } else {
            row.fill(0.0);
            warnings.push(format!("attribute {} is constant; centered and left unscaled", i + 1));
        }
    }
    (x, warnings)
}

/// Directed graph with the original node labels.
#[derive(Debug, Clone)]
pub struct LoadedGraph {
    pub graph: Digraph,
    /// `labels[v]` is the id used in the file for vertex `v`.
    pub labels: Vec<u64>,
    pub edge_lines: usize,
    pub duplicate_edges: usize,
    pub warnings: Vec<String>,
}

/// Reads whitespace-separated `u v` pairs; `#` lines are comments. Node ids
/// are remapped densely in order of first appearance, duplicate edges are
/// dropped, and all weights are 1.
pub fn load_edge_list(path: impl AsRef<Path>) -> Result<LoadedGraph> {
    let path = path.as_ref();
    read_edge_list(BufReader::new(open(path)?), path)
}

pub fn read_edge_list<R: BufRead>(reader: R, path: &Path) -> Result<LoadedGraph> {
    let mut ids: HashMap<u64, usize> = HashMap::new();
    let mut labels = Vec::new();
    let mut edges = Vec::new();
    let mut intern = |label: u64| match ids.entry(label) {
        Entry::Occupied(e) => *e.get(),
        Entry::Vacant(e) => {
            labels.push(label);
            *e.insert(labels.len() - 1)
        }
    };
    for (index, line) in reader.lines().enumerate() {
        let line_no = index + 1;
        let line = line.map_err(|source| BenchError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = trimmed.split_whitespace().collect();
        let parsed = match fields.as_slice() {
            [u, v] => u.parse::<u64>().ok().zip(v.parse::<u64>().ok()),
            _ => None,
        };
        let Some((u, v)) = parsed else {
            return Err(BenchError::Parse {
                path: path.to_path_buf(),
                line: line_no,
                message: format!("expected two non-negative integer node ids, found {trimmed:?}"),
            });
        };
        edges.push((intern(u), intern(v)));
    }
    if edges.is_empty() {
        return Err(BenchError::Data {
            path: path.to_path_buf(),
            message: "no edges".into(),
        });
    }
    let graph = Digraph::from_edges(labels.len(), &edges)?;
    let duplicate_edges = edges.len() - graph.n_edges();
    let mut warnings = Vec::new();
    if graph.self_loop_count() > 0 {
        warnings.push(format!(
            "{} self-loops; degree costs no longer give every high-degree vertex the same initial gain",
            graph.self_loop_count()
        ));
    }
    Ok(LoadedGraph {
        graph,
        labels,
        edge_lines: edges.len(),
        duplicate_edges,
        warnings,
    })
}
