//! Graph embedding of a dataset for one subsequence length.
//!
//! Subsequences are projected to a 2-D shape space, dense regions of that
//! space become nodes, and transitions between consecutive subsequences of a
//! series become weighted edges. Each series is summarized by its node path.

pub mod kde;
mod lengths;
pub mod nodes;
pub mod projection;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

pub use kde::Bandwidth;
pub use lengths::{derive_seed, sample_lengths};
pub use nodes::{create_edges, create_nodes, NodeParams};
pub use projection::{fit_projection, fit_projection_with, ShapeProjection};

use crate::dataset::Dataset;
use crate::error::Result;
use crate::linalg::PcaSolver;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatternNode {
    pub id: usize,
    pub angular_bin: usize,
    pub radius: f64,
    /// Mean of the subsequences assigned to this node.
    pub prototype: Vec<f64>,
    pub member_count: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Edge {
    pub src: usize,
    pub dst: usize,
    pub weight: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EmbeddingParams {
    pub nodes: NodeParams,
    pub pca_solver: PcaSolver,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PatternGraph {
    length: usize,
    angular_bins: usize,
    nodes: Vec<PatternNode>,
    edges: Vec<Edge>,
    edge_index: BTreeMap<(usize, usize), usize>,
    paths: Vec<Vec<usize>>,
    projection: ShapeProjection,
}

impl PatternGraph {
    /// Assembles a graph from node positions and per-series paths, filling
    /// node prototypes from the dataset and dropping nodes no subsequence
    /// was assigned to. Node ids are renumbered densely in their original
    /// order.
    pub fn assemble(
        dataset: &Dataset,
        projection: ShapeProjection,
        mut nodes: Vec<PatternNode>,
        mut paths: Vec<Vec<usize>>,
        angular_bins: usize,
    ) -> Self {
        let length = projection.length();
        let mut sums = vec![vec![0.0; length]; nodes.len()];
        let mut counts = vec![0usize; nodes.len()];
        for (series, path) in dataset.series().iter().zip(&paths) {
            for (start, &node) in path.iter().enumerate() {
                counts[node] += 1;
                let window = &series.values()[start..start + length];
                sums[node].iter_mut().zip(window).for_each(|(s, v)| *s += v);
            }
        }

        let mut remap = vec![usize::MAX; nodes.len()];
        let mut kept = Vec::with_capacity(nodes.len());
        for (old, mut node) in nodes.drain(..).enumerate() {
            if counts[old] == 0 {
                continue;
            }
            remap[old] = kept.len();
            node.id = kept.len();
            node.member_count = counts[old];
            node.prototype = sums[old]
                .iter()
                .map(|s| s / counts[old] as f64)
                .collect();
            kept.push(node);
        }
        for path in &mut paths {
            path.iter_mut().for_each(|n| *n = remap[*n]);
        }

        let mut weights: BTreeMap<(usize, usize), u64> = BTreeMap::new();
        for path in &paths {
            for pair in path.windows(2) {
                *weights.entry((pair[0], pair[1])).or_insert(0) += 1;
            }
        }
        let edges: Vec<Edge> = weights
            .into_iter()
            .map(|((src, dst), weight)| Edge { src, dst, weight })
            .collect();
        let edge_index = edges
            .iter()
            .enumerate()
            .map(|(i, e)| ((e.src, e.dst), i))
            .collect();

        Self {
            length,
            angular_bins,
            nodes: kept,
            edges,
            edge_index,
            paths,
            projection,
        }
    }

    pub fn length(&self) -> usize {
        self.length
    }

    pub fn angular_bins(&self) -> usize {
        self.angular_bins
    }

    pub fn nodes(&self) -> &[PatternNode] {
        &self.nodes
    }

    pub fn node(&self, id: usize) -> &PatternNode {
        &self.nodes[id]
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    /// Edges sorted by `(src, dst)`.
    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    /// Position of edge `(src, dst)` in [`Self::edges`].
    pub fn edge_position(&self, src: usize, dst: usize) -> Option<usize> {
        self.edge_index.get(&(src, dst)).copied()
    }

    pub fn edge_weight(&self, src: usize, dst: usize) -> u64 {
        self.edge_position(src, dst)
            .map_or(0, |i| self.edges[i].weight)
    }

    /// Node path of every series, in dataset order.
    pub fn paths(&self) -> &[Vec<usize>] {
        &self.paths
    }

    pub fn projection(&self) -> &ShapeProjection {
        &self.projection
    }

    pub fn export(&self, include_paths: bool) -> GraphExport<'_> {
        GraphExport {
            length: self.length,
            nodes: &self.nodes,
            edges: &self.edges,
            paths: include_paths.then_some(self.paths.as_slice()),
        }
    }

    pub fn to_json(&self, include_paths: bool) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.export(include_paths))?)
    }

    /// Graphviz rendering, edge pen width scaled by weight.
    pub fn to_dot(&self) -> String {
        let mut out = format!("digraph length_{} {{\n", self.length);
        for node in &self.nodes {
            out.push_str(&format!(
                "  n{} [label=\"{} ({})\"];\n",
                node.id, node.id, node.member_count
            ));
        }
        let max = self.edges.iter().map(|e| e.weight).max().unwrap_or(1) as f64;
        for e in &self.edges {
            out.push_str(&format!(
                "  n{} -> n{} [label=\"{}\", penwidth={:.2}];\n",
                e.src,
                e.dst,
                e.weight,
                0.5 + 4.5 * e.weight as f64 / max
            ));
        }
        out.push_str("}\n");
        out
    }
}

/// JSON view of a graph: nodes, edges and optionally the series paths.
#[derive(Debug, Serialize)]
pub struct GraphExport<'a> {
    pub length: usize,
    pub nodes: &'a [PatternNode],
    pub edges: &'a [Edge],
    #[serde(skip_serializing_if = "Option::is_none")]
    pub paths: Option<&'a [Vec<usize>]>,
}

pub fn build_graph(dataset: &Dataset, length: usize, smpl: usize, rng_seed: u64) -> Result<PatternGraph> {
    build_graph_with(dataset, length, smpl, rng_seed, &EmbeddingParams::default())
}

pub fn build_graph_with(
    dataset: &Dataset,
    length: usize,
    smpl: usize,
    rng_seed: u64,
    params: &EmbeddingParams,
) -> Result<PatternGraph> {
    let projection = fit_projection_with(dataset, length, smpl, rng_seed, params.pca_solver)?;
    let nodes = create_nodes(&projection, &params.nodes)?;
    let (_, paths) = create_edges(&projection, &nodes, params.nodes.angular_bins);
    Ok(PatternGraph::assemble(
        dataset,
        projection,
        nodes,
        paths,
        params.nodes.angular_bins,
    ))
}
