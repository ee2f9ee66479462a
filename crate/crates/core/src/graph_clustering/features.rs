use std::collections::BTreeSet;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::embedding::PatternGraph;

/// How a series' path is read when counting features.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeatureMode {
    /// Count over the path with consecutive repeats merged: a node counts once
    /// per visit and only transitions between two different nodes are edges.
    #[default]
    Transitions,
    /// Count every path entry and every consecutive pair, self-loops included.
    Occupancy,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum FeatureColumn {
    /// Occurrences of a node in the series' path.
    Node(usize),
    /// Occurrences of a transition among consecutive path entries.
    Edge(usize, usize),
    /// Degree of a node in the subgraph the series' path induces.
    Degree(usize),
}

impl std::fmt::Display for FeatureColumn {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            FeatureColumn::Node(n) => write!(f, "node_{n}"),
            FeatureColumn::Edge(a, b) => write!(f, "edge_{a}_{b}"),
            FeatureColumn::Degree(n) => write!(f, "degree_{n}"),
        }
    }
}

/// Raw per-series counts over nodes, edges and subgraph degrees.
///
/// Columns are laid out as all node counts, then all edge counts (in the
/// graph's edge order, self-loops dropped under [`FeatureMode::Transitions`]),
/// then all degrees. Rows are stored sparse.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    length: usize,
    mode: FeatureMode,
    columns: Vec<FeatureColumn>,
    rows: Vec<Vec<(usize, u64)>>,
}

impl FeatureMatrix {
    pub fn length(&self) -> usize {
        self.length
    }

    pub fn mode(&self) -> FeatureMode {
        self.mode
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_cols(&self) -> usize {
        self.columns.len()
    }

    pub fn columns(&self) -> &[FeatureColumn] {
        &self.columns
    }

    /// Nonzero `(column, count)` entries of a row, by column.
    pub fn row(&self, i: usize) -> &[(usize, u64)] {
        &self.rows[i]
    }

    pub fn get(&self, i: usize, col: usize) -> u64 {
        let row = &self.rows[i];
        row.binary_search_by_key(&col, |&(c, _)| c)
            .map_or(0, |pos| row[pos].1)
    }

    pub fn dense_row(&self, i: usize) -> Vec<f64> {
        let mut dense = vec![0.0; self.n_cols()];
        for &(c, v) in &self.rows[i] {
            dense[c] = v as f64;
        }
        dense
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        let header: Vec<String> = self.columns.iter().map(ToString::to_string).collect();
        writeln!(out, "{}", header.join(","))?;
        for i in 0..self.n_rows() {
            let row: Vec<String> = self
                .dense_row(i)
                .iter()
                .map(|v| (*v as u64).to_string())
                .collect();
            writeln!(out, "{}", row.join(","))?;
        }
        Ok(())
    }
}

pub fn extract_features(graph: &PatternGraph) -> FeatureMatrix {
    extract_features_with(graph, FeatureMode::default())
}

/// Consecutive repeats merged into one entry.
pub fn collapse_path(path: &[usize]) -> Vec<usize> {
    let mut out: Vec<usize> = Vec::with_capacity(path.len());
    for &n in path {
        if out.last() != Some(&n) {
            out.push(n);
        }
    }
    out
}

pub fn extract_features_with(graph: &PatternGraph, mode: FeatureMode) -> FeatureMatrix {
    let n_nodes = graph.n_nodes();
    let keep_loops = mode == FeatureMode::Occupancy;
    // Edge column per graph edge position, if that edge gets a column.
    let mut edge_column = vec![None; graph.n_edges()];
    let mut columns: Vec<FeatureColumn> = (0..n_nodes).map(FeatureColumn::Node).collect();
    for (pos, e) in graph.edges().iter().enumerate() {
        if keep_loops || e.src != e.dst {
            edge_column[pos] = Some(columns.len() - n_nodes);
            columns.push(FeatureColumn::Edge(e.src, e.dst));
        }
    }
    let n_edge_cols = columns.len() - n_nodes;
    columns.extend((0..n_nodes).map(FeatureColumn::Degree));

    let rows = graph
        .paths()
        .iter()
        .map(|path| {
            let collapsed;
            let path: &[usize] = match mode {
                FeatureMode::Transitions => {
                    collapsed = collapse_path(path);
                    &collapsed
                }
                FeatureMode::Occupancy => path,
            };
            let mut node_counts = vec![0u64; n_nodes];
            let mut edge_counts = vec![0u64; n_edge_cols];
            let mut distinct_edges = BTreeSet::new();
            for &n in path {
                node_counts[n] += 1;
            }
            for pair in path.windows(2) {
                let e = graph
                    .edge_position(pair[0], pair[1])
                    .expect("every path transition is an edge");
                if let Some(c) = edge_column[e] {
                    edge_counts[c] += 1;
                }
                distinct_edges.insert((pair[0], pair[1]));
            }
            let mut degree = vec![0u64; n_nodes];
            for (src, dst) in distinct_edges {
                degree[src] += 1;
                degree[dst] += 1;
            }

            let mut row = Vec::new();
            let blocks = [
                (0, &node_counts),
                (n_nodes, &edge_counts),
                (n_nodes + n_edge_cols, &degree),
            ];
            for (offset, counts) in blocks {
                row.extend(
                    counts
                        .iter()
                        .enumerate()
                        .filter(|(_, &v)| v > 0)
                        .map(|(c, &v)| (offset + c, v)),
                );
            }
            row
        })
        .collect();

    FeatureMatrix {
        length: graph.length(),
        mode,
        columns,
        rows,
    }
}

/// Z-scores each row. Rows without spread become all zeros.
pub fn normalize_rows(features: &FeatureMatrix) -> Vec<Vec<f64>> {
    (0..features.n_rows())
        .map(|i| zscore(&features.dense_row(i)))
        .collect()
}

pub fn zscore(row: &[f64]) -> Vec<f64> {
    let n = row.len() as f64;
    if row.is_empty() {
        return Vec::new();
    }
    let mean = row.iter().sum::<f64>() / n;
    let std = (row.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt();
    if std <= 1e-12 * (1.0 + mean.abs()) {
        return vec![0.0; row.len()];
    }
    row.iter().map(|v| (v - mean) / std).collect()
}
