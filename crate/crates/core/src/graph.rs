//! Undirected, unweighted graphs and their Laplacians.
//!
//! The Laplacian `L = D - A` drives the smoothness penalty on the log
//! discovery probabilities: `xᵀ L x` sums `(x_i - x_j)²` over every
//! undirected edge, so it vanishes exactly on vectors that are constant
//! within each connected component.

use std::collections::{BTreeSet, VecDeque};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::linalg::SymmetricMatrix;

/// A validated simple graph on nodes `0..node_count`.
///
/// Edges are stored once each as `(i, j)` with `i < j`, sorted.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawGraph", into = "RawGraph")]
pub struct Graph {
    node_count: usize,
    edges: Vec<(usize, usize)>,
}

#[derive(Serialize, Deserialize)]
struct RawGraph {
    node_count: usize,
    edges: Vec<(usize, usize)>,
}

impl TryFrom<RawGraph> for Graph {
    type Error = Error;
    fn try_from(raw: RawGraph) -> Result<Self> {
        Graph::new(raw.node_count, raw.edges)
    }
}

impl From<Graph> for RawGraph {
    fn from(g: Graph) -> Self {
        RawGraph {
            node_count: g.node_count,
            edges: g.edges,
        }
    }
}

impl Graph {
    /// Builds a graph, identifying `(i, j)` with `(j, i)` and dropping duplicates.
    pub fn new(node_count: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        if node_count == 0 {
            return Err(Error::EmptyGraph);
        }
        let mut set = BTreeSet::new();
        for (i, j) in edges {
            for index in [i, j] {
                if index >= node_count {
                    return Err(Error::IndexOutOfRange { index, node_count });
                }
            }
            if i == j {
                return Err(Error::SelfLoop(i));
            }
            set.insert((i.min(j), i.max(j)));
        }
        Ok(Graph {
            node_count,
            edges: set.into_iter().collect(),
        })
    }

    pub fn edgeless(node_count: usize) -> Result<Self> {
        Graph::new(node_count, [])
    }

    /// Chain `0 - 1 - ... - (n-1)`.
    pub fn path(node_count: usize) -> Result<Self> {
        Graph::new(node_count, (1..node_count).map(|i| (i - 1, i)))
    }

    pub fn ring(node_count: usize) -> Result<Self> {
        let mut edges: Vec<_> = (1..node_count).map(|i| (i - 1, i)).collect();
        if node_count > 2 {
            edges.push((node_count - 1, 0));
        }
        Graph::new(node_count, edges)
    }

    /// `rows x cols` 4-neighbour lattice, nodes numbered row-major.
    pub fn grid(rows: usize, cols: usize) -> Result<Self> {
        let mut edges = Vec::new();
        for r in 0..rows {
            for c in 0..cols {
                let id = r * cols + c;
                if c + 1 < cols {
                    edges.push((id, id + 1));
                }
                if r + 1 < rows {
                    edges.push((id, id + cols));
                }
            }
        }
        Graph::new(rows * cols, edges)
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.node_count];
        for &(i, j) in &self.edges {
            deg[i] += 1;
            deg[j] += 1;
        }
        deg
    }

    /// 0/1 adjacency matrix, symmetric with zero diagonal.
    pub fn adjacency(&self) -> DMatrix<f64> {
        let mut a = DMatrix::zeros(self.node_count, self.node_count);
        for &(i, j) in &self.edges {
            a[(i, j)] = 1.0;
            a[(j, i)] = 1.0;
        }
        a
    }

    /// `L = D - A`.
    pub fn laplacian(&self) -> SymmetricMatrix {
        let mut l = self.adjacency() * -1.0;
        for (i, d) in self.degrees().into_iter().enumerate() {
            l[(i, i)] = d as f64;
        }
        SymmetricMatrix::new(l).expect("graph laplacian is symmetric by construction")
    }

    /// Sum of `(x_i - x_j)²` over undirected edges; equal to `xᵀ L x`.
    pub fn laplacian_quadratic(&self, x: &DVector<f64>) -> Result<f64> {
        check_len(self.node_count, x.len(), "laplacian quadratic vector")?;
        Ok(self
            .edges
            .iter()
            .map(|&(i, j)| (x[i] - x[j]).powi(2))
            .sum())
    }

    /// Connected-component label for every node, labels numbered from 0 in
    /// order of each component's lowest node.
    pub fn component_labels(&self) -> Vec<usize> {
        let mut neighbours = vec![Vec::new(); self.node_count];
        for &(i, j) in &self.edges {
            neighbours[i].push(j);
            neighbours[j].push(i);
        }
        let mut label = vec![usize::MAX; self.node_count];
        let mut next = 0;
        let mut queue = VecDeque::new();
        for start in 0..self.node_count {
            if label[start] != usize::MAX {
                continue;
            }
            label[start] = next;
            queue.push_back(start);
            while let Some(node) = queue.pop_front() {
                for &nb in &neighbours[node] {
                    if label[nb] == usize::MAX {
                        label[nb] = next;
                        queue.push_back(nb);
                    }
                }
            }
            next += 1;
        }
        label
    }

    pub fn component_count(&self) -> usize {
        self.component_labels().into_iter().max().map_or(0, |m| m + 1)
    }

    /// True iff a traversal from node 0 reaches every node.
    pub fn is_connected(&self) -> bool {
        self.component_count() == 1
    }

    /// Parses the edge-list text format.
    ///
    /// One edge per line as two whitespace-separated 0-based indices; lines
    /// starting with `#` and blank lines are skipped. The node count comes
    /// from a `nodes <M>` header line or from `node_count`; if both are
    /// given they must agree.
    pub fn parse_edge_list(text: &str, node_count: Option<usize>, source_name: &str) -> Result<Self> {
        let parse_err = |line: usize, message: String| Error::Parse {
            source_name: source_name.to_string(),
            line,
            message,
        };
        let mut header: Option<usize> = None;
        let mut edges = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields[0] == "nodes" {
                if fields.len() != 2 {
                    return Err(parse_err(line_no, "expected 'nodes <M>'".into()));
                }
                let m = fields[1]
                    .parse::<usize>()
                    .map_err(|e| parse_err(line_no, format!("bad node count '{}': {e}", fields[1])))?;
                header = Some(m);
                continue;
            }
            if fields.len() != 2 {
                return Err(parse_err(
                    line_no,
                    format!("expected two node indices, found {} fields", fields.len()),
                ));
            }
            let mut pair = [0usize; 2];
            for (slot, f) in pair.iter_mut().zip(&fields) {
                *slot = f
                    .parse()
                    .map_err(|e| parse_err(line_no, format!("bad node index '{f}': {e}")))?;
            }
            edges.push((pair[0], pair[1]));
        }
        let m = match (header, node_count) {
            (Some(h), Some(n)) if h != n => {
                return Err(parse_err(
                    0,
                    format!("header declares {h} nodes but {n} were requested"),
                ))
            }
            (Some(h), _) => h,
            (None, Some(n)) => n,
            (None, None) => {
                return Err(parse_err(
                    0,
                    "node count missing: add a 'nodes <M>' header or pass it explicitly".into(),
                ))
            }
        };
        Graph::new(m, edges)
    }

    /// Inverse of [`Graph::parse_edge_list`], header included.
    pub fn to_edge_list(&self) -> String {
        let mut out = format!("nodes {}\n", self.node_count);
        for &(i, j) in &self.edges {
            out.push_str(&format!("{i} {j}\n"));
        }
        out
    }
}
