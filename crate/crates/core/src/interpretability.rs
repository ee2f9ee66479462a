//! Cluster explanations over a pattern graph: how representative and how
//! exclusive each node and edge is for each cluster, the graphoids those
//! measures induce, and the choice of the length whose graph best explains
//! the final partition.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::embedding::PatternGraph;
use crate::error::{KGraphError, Result};
use crate::graph_clustering::Partition;
use crate::metrics::{adjusted_rand_index, Scores};

/// Representativity and exclusivity of one kind of graph element (nodes or
/// edges) for every cluster.
#[derive(Debug, Clone, PartialEq)]
pub struct ElementStats {
    /// `visits[e][c]`: members of cluster `c` whose path contains element `e`.
    visits: Vec<Vec<usize>>,
    cluster_sizes: Vec<usize>,
}

impl ElementStats {
    fn new(visits: Vec<Vec<usize>>, cluster_sizes: Vec<usize>) -> Self {
        Self {
            visits,
            cluster_sizes,
        }
    }

    pub fn len(&self) -> usize {
        self.visits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.visits.is_empty()
    }

    /// Number of series, in any cluster, whose path contains the element.
    pub fn visitors(&self, element: usize) -> usize {
        self.visits[element].iter().sum()
    }

    pub fn cluster_visitors(&self, element: usize, cluster: usize) -> usize {
        self.visits[element][cluster]
    }

    /// Fraction of the cluster's members whose path contains the element.
    pub fn representativity(&self, element: usize, cluster: usize) -> f64 {
        self.visits[element][cluster] as f64 / self.cluster_sizes[cluster] as f64
    }

    /// Fraction of the element's visitors that belong to the cluster; 0 for
    /// elements nobody visits.
    pub fn exclusivity(&self, element: usize, cluster: usize) -> f64 {
        match self.visitors(element) {
            0 => 0.0,
            total => self.visits[element][cluster] as f64 / total as f64,
        }
    }

    fn select(&self, keep: impl Fn(usize) -> bool) -> Vec<usize> {
        (0..self.len()).filter(|&e| keep(e)).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NodeClusterStats {
    k: usize,
    cluster_sizes: Vec<usize>,
    nodes: ElementStats,
    edges: ElementStats,
    edge_keys: Vec<(usize, usize)>,
}

/// Nodes and edges (as `(src, dst)`) of a subgraph, both sorted.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct Graphoid {
    pub nodes: Vec<usize>,
    pub edges: Vec<(usize, usize)>,
}

impl Graphoid {
    pub fn is_subset(&self, other: &Graphoid) -> bool {
        let nodes: BTreeSet<_> = other.nodes.iter().collect();
        let edges: BTreeSet<_> = other.edges.iter().collect();
        self.nodes.iter().all(|n| nodes.contains(n)) && self.edges.iter().all(|e| edges.contains(e))
    }

    pub fn is_disjoint(&self, other: &Graphoid) -> bool {
        let nodes: BTreeSet<_> = other.nodes.iter().collect();
        let edges: BTreeSet<_> = other.edges.iter().collect();
        !self.nodes.iter().any(|n| nodes.contains(n)) && !self.edges.iter().any(|e| edges.contains(e))
    }
}

impl NodeClusterStats {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn cluster_sizes(&self) -> &[usize] {
        &self.cluster_sizes
    }

    pub fn nodes(&self) -> &ElementStats {
        &self.nodes
    }

    /// Edge statistics, indexed like [`PatternGraph::edges`].
    pub fn edges(&self) -> &ElementStats {
        &self.edges
    }

    fn build(&self, nodes: Vec<usize>, edges: Vec<usize>) -> Graphoid {
        Graphoid {
            nodes,
            edges: edges.into_iter().map(|e| self.edge_keys[e]).collect(),
        }
    }

    fn check_cluster(&self, cluster: usize) -> Result<()> {
        if cluster >= self.k {
            return Err(KGraphError::InvalidConfig(format!(
                "cluster {cluster} outside [0, {})",
                self.k
            )));
        }
        Ok(())
    }

    /// Every node and edge crossed by at least one member of the cluster.
    pub fn graphoid(&self, cluster: usize) -> Result<Graphoid> {
        self.check_cluster(cluster)?;
        Ok(self.build(
            self.nodes.select(|n| self.nodes.cluster_visitors(n, cluster) > 0),
            self.edges.select(|e| self.edges.cluster_visitors(e, cluster) > 0),
        ))
    }

    /// Visited elements whose exclusivity for the cluster is at least `lambda`.
    pub fn lambda_graphoid(&self, cluster: usize, lambda: f64) -> Result<Graphoid> {
        self.check_cluster(cluster)?;
        check_threshold(lambda)?;
        Ok(self.build(
            self.nodes
                .select(|n| self.nodes.visitors(n) > 0 && self.nodes.exclusivity(n, cluster) >= lambda),
            self.edges
                .select(|e| self.edges.visitors(e) > 0 && self.edges.exclusivity(e, cluster) >= lambda),
        ))
    }

    /// Visited elements whose representativity for the cluster is at least `gamma`.
    pub fn gamma_graphoid(&self, cluster: usize, gamma: f64) -> Result<Graphoid> {
        self.check_cluster(cluster)?;
        check_threshold(gamma)?;
        Ok(self.build(
            self.nodes.select(|n| {
                self.nodes.visitors(n) > 0 && self.nodes.representativity(n, cluster) >= gamma
            }),
            self.edges.select(|e| {
                self.edges.visitors(e) > 0 && self.edges.representativity(e, cluster) >= gamma
            }),
        ))
    }
}

fn check_threshold(t: f64) -> Result<()> {
    if (0.0..=1.0).contains(&t) {
        Ok(())
    } else {
        Err(KGraphError::InvalidThreshold(t))
    }
}

/// Representativity and exclusivity of every node and edge of `graph` for
/// every cluster of `partition`. A series counts once per element however
/// often its path crosses it.
pub fn node_stats(graph: &PatternGraph, partition: &Partition) -> Result<NodeClusterStats> {
    let paths = graph.paths();
    if paths.len() != partition.len() {
        return Err(KGraphError::SizeMismatch {
            expected: paths.len(),
            actual: partition.len(),
        });
    }
    let k = partition.k();
    let cluster_sizes = partition.cluster_sizes();
    if let Some(empty) = cluster_sizes.iter().position(|&s| s == 0) {
        return Err(KGraphError::EmptyCluster(empty));
    }

    let mut node_visits = vec![vec![0usize; k]; graph.n_nodes()];
    let mut edge_visits = vec![vec![0usize; k]; graph.n_edges()];
    for (path, &cluster) in paths.iter().zip(partition.labels()) {
        let nodes: BTreeSet<usize> = path.iter().copied().collect();
        for n in nodes {
            node_visits[n][cluster] += 1;
        }
        let edges: BTreeSet<usize> = path
            .windows(2)
            .filter_map(|w| graph.edge_position(w[0], w[1]))
            .collect();
        for e in edges {
            edge_visits[e][cluster] += 1;
        }
    }
    Ok(NodeClusterStats {
        k,
        nodes: ElementStats::new(node_visits, cluster_sizes.clone()),
        edges: ElementStats::new(edge_visits, cluster_sizes.clone()),
        cluster_sizes,
        edge_keys: graph.edges().iter().map(|e| (e.src, e.dst)).collect(),
    })
}

/// Agreement of a per-length partition with the final one.
pub fn consistency(final_partition: &Partition, per_length: &Partition) -> Result<f64> {
    adjusted_rand_index(final_partition.labels(), per_length.labels())
}

/// Mean over clusters of the highest node exclusivity in that cluster.
pub fn interpretability_factor(stats: &NodeClusterStats) -> Result<f64> {
    let nodes = stats.nodes();
    if (0..nodes.len()).all(|n| nodes.visitors(n) == 0) {
        return Err(KGraphError::NoVisitedNodes);
    }
    let total: f64 = (0..stats.k())
        .map(|c| {
            (0..nodes.len())
                .map(|n| nodes.exclusivity(n, c))
                .fold(0.0, f64::max)
        })
        .sum();
    Ok(total / stats.k() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LengthScore {
    pub length: usize,
    /// Position among repeated draws of the same length.
    pub replicate: usize,
    pub w_c: f64,
    pub w_e: f64,
}

impl LengthScore {
    /// Selection objective; negative consistency counts as zero.
    pub fn objective(&self) -> f64 {
        self.w_e * self.w_c.max(0.0)
    }
}

/// Index of the score maximizing [`LengthScore::objective`]; ties go to the
/// smaller length, then the earlier replicate.
pub fn select_length(scores: &[LengthScore]) -> Option<usize> {
    (0..scores.len()).reduce(|best, i| {
        let (a, b) = (&scores[i], &scores[best]);
        let better = a.objective() > b.objective()
            || (a.objective() == b.objective()
                && (a.length, a.replicate) < (b.length, b.replicate));
        if better {
            i
        } else {
            best
        }
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Exemplar {
    pub cluster: usize,
    pub node: usize,
    pub representativity: f64,
    pub exclusivity: f64,
    /// Pointwise mean of every subsequence assigned to the node.
    pub centroid: Vec<f64>,
}

/// Per cluster, the node maximizing representativity times exclusivity
/// (lowest id on ties).
pub fn exemplar_nodes(graph: &PatternGraph, stats: &NodeClusterStats) -> Result<Vec<Exemplar>> {
    let nodes = stats.nodes();
    (0..stats.k())
        .map(|c| {
            let mut best: Option<(usize, f64)> = None;
            for n in 0..nodes.len() {
                if nodes.cluster_visitors(n, c) == 0 {
                    continue;
                }
                let score = nodes.representativity(n, c) * nodes.exclusivity(n, c);
                if best.is_none_or(|(_, s)| score > s) {
                    best = Some((n, score));
                }
            }
            let (node, _) = best.ok_or(KGraphError::EmptyCluster(c))?;
            Ok(Exemplar {
                cluster: c,
                node,
                representativity: nodes.representativity(node, c),
                exclusivity: nodes.exclusivity(node, c),
                centroid: graph.node(node).prototype.clone(),
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClusterGraphoids {
    pub cluster: usize,
    pub graphoid: Graphoid,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<Graphoid>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma: Option<Graphoid>,
}

/// Everything a run reports about interpretability, serialized as the run's
/// JSON report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GraphoidReport {
    pub dataset: String,
    pub k: usize,
    pub selected_length: usize,
    pub selected_replicate: usize,
    pub lengths: Vec<LengthScore>,
    pub failed_lengths: Vec<usize>,
    pub clusters: Vec<Exemplar>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub graphoids: Option<Vec<ClusterGraphoids>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub metrics: Option<Scores>,
}

impl GraphoidReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Graphoids of every cluster at the optional thresholds.
pub fn cluster_graphoids(
    stats: &NodeClusterStats,
    lambda: Option<f64>,
    gamma: Option<f64>,
) -> Result<Vec<ClusterGraphoids>> {
    (0..stats.k())
        .map(|c| {
            Ok(ClusterGraphoids {
                cluster: c,
                graphoid: stats.graphoid(c)?,
                lambda: lambda.map(|l| stats.lambda_graphoid(c, l)).transpose()?,
                gamma: gamma.map(|g| stats.gamma_graphoid(c, g)).transpose()?,
            })
        })
        .collect()
}
