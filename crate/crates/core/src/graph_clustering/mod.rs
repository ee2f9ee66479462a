//! Per-length clustering: graph features, row normalization, k-means.

pub mod features;
pub mod kmeans;

use serde::Serialize;

pub use features::{
    collapse_path, extract_features, extract_features_with, normalize_rows, FeatureColumn, FeatureMatrix,
    FeatureMode,
};
pub use kmeans::{kmeans, kmeans_with, KMeansFit, KMeansParams};

use crate::embedding::PatternGraph;
use crate::error::{KGraphError, Result};

/// Cluster label per series.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Partition {
    labels: Vec<usize>,
    k: usize,
    /// Subsequence length the partition came from; `None` for the consensus.
    length: Option<usize>,
}

impl Partition {
    pub fn new(labels: Vec<usize>, k: usize, length: Option<usize>) -> Result<Self> {
        if k == 0 {
            return Err(KGraphError::InvalidConfig("k must be at least 1".into()));
        }
        if let Some(&bad) = labels.iter().find(|&&l| l >= k) {
            return Err(KGraphError::InvalidConfig(format!(
                "label {bad} outside [0, {k})"
            )));
        }
        Ok(Self { labels, k, length })
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn length(&self) -> Option<usize> {
        self.length
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn cluster_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &l in &self.labels {
            sizes[l] += 1;
        }
        sizes
    }

    pub fn members(&self, cluster: usize) -> Vec<usize> {
        self.labels
            .iter()
            .enumerate()
            .filter(|(_, &l)| l == cluster)
            .map(|(i, _)| i)
            .collect()
    }
}

/// Features of `graph`, z-scored per row, clustered with k-means.
pub fn cluster_graph(graph: &PatternGraph, k: usize, rng_seed: u64) -> Result<Partition> {
    cluster_graph_with(graph, k, rng_seed, FeatureMode::default())
}

pub fn cluster_graph_with(graph: &PatternGraph, k: usize, rng_seed: u64, mode: FeatureMode) -> Result<Partition> {
    cluster_features(&extract_features_with(graph, mode), k, rng_seed)
}

pub fn cluster_features(features: &FeatureMatrix, k: usize, rng_seed: u64) -> Result<Partition> {
    let rows = normalize_rows(features);
    let fit = kmeans(&rows, k, rng_seed)?;
    Partition::new(fit.labels, k, Some(features.length()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::Dataset;
    use crate::embedding::build_graph;
    use crate::metrics::adjusted_rand_index;

    /// Two families with disjoint shapes: slow sines and fast square waves.
    fn two_families() -> (Dataset, Vec<usize>) {
        let mut series = Vec::new();
        let mut truth = Vec::new();
        for i in 0..8 {
            let phase = i as f64 * 0.7;
            series.push(
                (0..150)
                    .map(|t| (t as f64 / 9.0 + phase).sin())
                    .collect::<Vec<f64>>(),
            );
            truth.push(0);
            series.push(
                (0..150)
                    .map(|t| if (t + i * 3) % 8 < 4 { 1.0 } else { -1.0 })
                    .collect(),
            );
            truth.push(1);
        }
        (Dataset::new("families", series, None).unwrap(), truth)
    }

    #[test]
    fn disjoint_families_are_separated() {
        let (ds, truth) = two_families();
        let g = build_graph(&ds, 12, 2, 5).unwrap();
        let p = cluster_graph(&g, 2, 5).unwrap();
        assert_eq!(p.length(), Some(12));
        assert_eq!(adjusted_rand_index(p.labels(), &truth).unwrap(), 1.0);
    }

    #[test]
    fn k_equal_n_isolates_every_series() {
        let (ds, _) = two_families();
        let g = build_graph(&ds, 12, 2, 5).unwrap();
        let rows = normalize_rows(&extract_features(&g));
        let fit = kmeans(&rows, ds.len(), 1).unwrap();
        assert!(fit.inertia < 1e-12);
        for i in 0..rows.len() {
            for j in 0..i {
                if rows[i] != rows[j] {
                    assert_ne!(fit.labels[i], fit.labels[j]);
                }
            }
        }
    }

    #[test]
    fn deterministic_given_seed() {
        let (ds, _) = two_families();
        let g = build_graph(&ds, 20, 2, 5).unwrap();
        assert_eq!(cluster_graph(&g, 3, 8).unwrap(), cluster_graph(&g, 3, 8).unwrap());
    }

    #[test]
    fn partition_validates_labels() {
        assert!(Partition::new(vec![0, 2], 2, None).is_err());
        let p = Partition::new(vec![0, 1, 1], 3, None).unwrap();
        assert_eq!(p.cluster_sizes(), vec![1, 2, 0]);
        assert_eq!(p.members(1), vec![1, 2]);
    }
}
