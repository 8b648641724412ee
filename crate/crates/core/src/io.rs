//! Reading instance files and writing tabular results.
//!
//! * edges: see [`Graph::parse_edge_list`]
//! * counts: CSV with columns `node,y`, one row per node, header optional
//! * features: CSV with `M` rows of `K` numbers, header optional
//!
//! A first line containing any non-numeric field is treated as a header.

use std::fs;
use std::io::Write;
use std::path::Path;

use nalgebra::DMatrix;

use crate::analysis::CvScore;
use crate::error::{Error, Result};
use crate::graph::Graph;

/// Formats a float with 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

fn parse_error(source: &str, line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        source_name: source.to_string(),
        line,
        message: message.into(),
    }
}

/// Numeric CSV rows with their 1-based line numbers, header skipped.
fn numeric_rows(text: &str, source: &str) -> Result<Vec<(usize, Vec<f64>)>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let mut rows = Vec::new();
    for (idx, record) in reader.records().enumerate() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            parse_error(source, line, e.to_string())
        })?;
        let line = record.position().map_or(idx + 1, |p| p.line() as usize);
        if record.iter().all(|f| f.is_empty()) {
            continue;
        }
        let parsed: Vec<Option<f64>> = record.iter().map(|f| f.parse::<f64>().ok()).collect();
        if rows.is_empty() && idx == 0 && parsed.iter().any(Option::is_none) {
            continue;
        }
        let mut values = Vec::with_capacity(parsed.len());
        for (col, (field, value)) in record.iter().zip(parsed).enumerate() {
            match value {
                Some(v) if v.is_finite() => values.push(v),
                _ => {
                    return Err(parse_error(
                        source,
                        line,
                        format!("column {}: '{field}' is not a finite number", col + 1),
                    ))
                }
            }
        }
        rows.push((line, values));
    }
    Ok(rows)
}

/// Parses a `node,y` counts table covering nodes `0..node_count` exactly once.
pub fn parse_counts(text: &str, node_count: usize, source: &str) -> Result<Vec<f64>> {
    let mut counts: Vec<Option<f64>> = vec![None; node_count];
    for (line, row) in numeric_rows(text, source)? {
        if row.len() != 2 {
            return Err(parse_error(source, line, format!("expected 2 columns (node,y), found {}", row.len())));
        }
        let (node, y) = (row[0], row[1]);
        if node < 0.0 || node.fract() != 0.0 {
            return Err(parse_error(source, line, format!("column 1: invalid node index {node}")));
        }
        let node = node as usize;
        if node >= node_count {
            return Err(Error::IndexOutOfRange { index: node, node_count });
        }
        if y < 0.0 {
            return Err(parse_error(source, line, format!("column 2: negative count {y}")));
        }
        if counts[node].replace(y).is_some() {
            return Err(Error::DuplicateNode(node));
        }
    }
    counts
        .into_iter()
        .enumerate()
        .map(|(i, c)| c.ok_or(Error::MissingNode(i)))
        .collect()
}

/// Parses a numeric feature table into an `M x K` matrix.
pub fn parse_features(text: &str, source: &str) -> Result<DMatrix<f64>> {
    let rows = numeric_rows(text, source)?;
    let Some((_, first)) = rows.first() else {
        return Err(parse_error(source, 0, "no feature rows"));
    };
    let k = first.len();
    for (line, r) in &rows {
        if r.len() != k {
            return Err(parse_error(source, *line, format!("expected {k} columns, found {}", r.len())));
        }
    }
    Ok(DMatrix::from_fn(rows.len(), k, |i, j| rows[i].1[j]))
}

/// Centres every column to mean 0 and scales it to unit variance.
/// Columns with (numerically) zero variance are left untouched.
pub fn standardize_columns(x: &mut DMatrix<f64>) {
    let m = x.nrows() as f64;
    for mut col in x.column_iter_mut() {
        let mean = col.sum() / m;
        let var = col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / m;
        let sd = var.sqrt();
        if sd <= 1e-12 * mean.abs().max(1.0) {
            continue;
        }
        for v in col.iter_mut() {
            *v = (*v - mean) / sd;
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct LoadOptions {
    /// Overrides/supplies the node count of the edge list.
    pub node_count: Option<usize>,
    pub standardize: bool,
}

#[derive(Debug, Clone)]
pub struct LoadedInstance {
    pub graph: Graph,
    pub counts: Vec<f64>,
    pub features: DMatrix<f64>,
}

/// Reads and cross-validates the three input files.
///
/// If the edge list has no `nodes` header and no node count is given, the
/// number of rows in the counts file is used.
pub fn load_instance(edges: &Path, counts: &Path, features: &Path, opts: &LoadOptions) -> Result<LoadedInstance> {
    let edge_text = read(edges)?;
    let count_text = read(counts)?;
    let feature_text = read(features)?;
    let edge_name = edges.display().to_string();
    let count_name = counts.display().to_string();

    let has_header = edge_text
        .lines()
        .any(|l| l.split_whitespace().next() == Some("nodes"));
    let node_count = match (opts.node_count, has_header) {
        (Some(n), _) => Some(n),
        (None, true) => None,
        (None, false) => Some(numeric_rows(&count_text, &count_name)?.len()),
    };
    let graph = Graph::parse_edge_list(&edge_text, node_count, &edge_name)?;
    let m = graph.node_count();
    let counts = parse_counts(&count_text, m, &count_name)?;
    let mut x = parse_features(&feature_text, &features.display().to_string())?;
    if x.nrows() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            actual: x.nrows(),
            context: "feature rows",
        });
    }
    if opts.standardize {
        standardize_columns(&mut x);
    }
    Ok(LoadedInstance { graph, counts, features: x })
}

/// Writes `lambda1,lambda2,fold,score` rows.
pub fn write_score_table<W: Write>(out: W, scores: &[CvScore]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| Error::Io {
        path: "score table".into(),
        message: e.to_string(),
    };
    w.write_record(["lambda1", "lambda2", "fold", "score"]).map_err(io)?;
    for s in scores {
        w.write_record([fmt_f64(s.lambda1), fmt_f64(s.lambda2), s.fold.to_string(), fmt_f64(s.score)])
            .map_err(io)?;
    }
    w.flush().map_err(|e| Error::Io {
        path: "score table".into(),
        message: e.to_string(),
    })
}
