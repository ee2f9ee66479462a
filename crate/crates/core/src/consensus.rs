//! Co-clustering frequency across per-length partitions and the final
//! spectral clustering over it.

use std::io::Write;

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{KGraphError, Result};
use crate::graph_clustering::{kmeans, Partition};
use crate::linalg::{top_eigenvectors, EigenSolver};

/// Floor applied to affinity degrees so isolated rows stay finite.
pub const DEGREE_FLOOR: f64 = 1e-12;

/// Fraction of partitions in which each pair of series shares a label.
///
/// Stored as integer agreement counts over `m` partitions so every entry
/// sits exactly on the `{0, 1/m, ..., 1}` lattice.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConsensusMatrix {
    n: usize,
    m: usize,
    counts: Vec<u32>,
}

impl ConsensusMatrix {
    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of contributing partitions.
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn count(&self, i: usize, j: usize) -> u32 {
        self.counts[i * self.n + j]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.count(i, j) as f64 / self.m as f64
    }

    pub fn to_dmatrix(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.n, self.n, |i, j| self.get(i, j))
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for i in 0..self.n {
            let row: Vec<String> = (0..self.n).map(|j| self.get(i, j).to_string()).collect();
            writeln!(out, "{}", row.join(","))?;
        }
        Ok(())
    }
}

pub fn consensus_matrix(partitions: &[Partition]) -> Result<ConsensusMatrix> {
    let first = partitions.first().ok_or_else(|| {
        KGraphError::InvalidConfig("consensus needs at least one partition".into())
    })?;
    let n = first.len();
    if let Some(bad) = partitions.iter().find(|p| p.len() != n) {
        return Err(KGraphError::SizeMismatch {
            expected: n,
            actual: bad.len(),
        });
    }
    let mut counts = vec![0u32; n * n];
    counts.par_chunks_mut(n.max(1)).enumerate().for_each(|(i, row)| {
        for p in partitions {
            let labels = p.labels();
            let li = labels[i];
            for (c, &lj) in row.iter_mut().zip(labels) {
                *c += u32::from(li == lj);
            }
        }
    });
    Ok(ConsensusMatrix {
        n,
        m: partitions.len(),
        counts,
    })
}

pub fn spectral_clustering(mc: &ConsensusMatrix, k: usize, rng_seed: u64) -> Result<Partition> {
    spectral_clustering_with(mc, k, rng_seed, EigenSolver::Auto)
}

/// Normalized spectral clustering with the consensus matrix as affinity.
///
/// The eigenvectors for the `k` smallest eigenvalues of
/// `I - D^-1/2 A D^-1/2` are the leading eigenvectors of `D^-1/2 A D^-1/2`;
/// their rows are scaled to unit length and grouped with k-means.
pub fn spectral_clustering_with(
    mc: &ConsensusMatrix,
    k: usize,
    rng_seed: u64,
    solver: EigenSolver,
) -> Result<Partition> {
    let n = mc.n();
    if k == 0 {
        return Err(KGraphError::InvalidConfig("k must be at least 1".into()));
    }
    if k > n {
        return Err(KGraphError::TooManyClusters { k, n });
    }
    let affinity = normalized_affinity(&mc.to_dmatrix());
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let (_, vectors) = top_eigenvectors(&affinity, k, solver, &mut rng);
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let row: Vec<f64> = vectors.row(i).iter().copied().collect();
            let norm = row.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm > 0.0 {
                row.into_iter().map(|v| v / norm).collect()
            } else {
                row
            }
        })
        .collect();
    let fit = kmeans(&rows, k, rng_seed)?;
    Partition::new(fit.labels, k, None)
}

/// `D^-1/2 A D^-1/2` with row-sum degrees floored at [`DEGREE_FLOOR`].
pub fn normalized_affinity(a: &DMatrix<f64>) -> DMatrix<f64> {
    let scale: Vec<f64> = a
        .row_iter()
        .map(|r| 1.0 / r.sum().max(DEGREE_FLOOR).sqrt())
        .collect();
    DMatrix::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)] * scale[i] * scale[j])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::adjusted_rand_index;
    use proptest::prelude::*;
    use rand::seq::SliceRandom;
    use rand::Rng;

    fn partition(labels: Vec<usize>) -> Partition {
        let k = labels.iter().max().unwrap() + 1;
        Partition::new(labels, k, Some(5)).unwrap()
    }

    #[test]
    fn two_partition_example() {
        let mc = consensus_matrix(&[partition(vec![0, 0, 1]), partition(vec![0, 1, 1])]).unwrap();
        let expected = [[1.0, 0.5, 0.0], [0.5, 1.0, 0.5], [0.0, 0.5, 1.0]];
        for (i, row) in expected.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                assert_eq!(mc.get(i, j), v);
            }
        }
        assert_eq!(mc.m(), 2);
    }

    #[test]
    fn single_partition_is_comembership() {
        let labels = vec![2, 0, 2, 1];
        let mc = consensus_matrix(&[partition(labels.clone())]).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                assert_eq!(mc.get(i, j), f64::from(u8::from(labels[i] == labels[j])));
            }
        }
    }

    #[test]
    fn mismatched_sizes() {
        let err = consensus_matrix(&[partition(vec![0, 1]), partition(vec![0, 1, 1])]).unwrap_err();
        assert!(matches!(err, KGraphError::SizeMismatch { expected: 2, actual: 3 }));
    }

    fn block_instance(rng: &mut ChaCha8Rng) -> (ConsensusMatrix, Vec<usize>) {
        let k = rng.random_range(2..6);
        let n = rng.random_range(k * 2..60);
        let mut truth: Vec<usize> = (0..n).map(|i| i % k).collect();
        truth.shuffle(rng);
        let mc = consensus_matrix(&[partition(truth.clone())]).unwrap();
        (mc, truth)
    }

    /// Connected components of the positive-affinity graph, by DFS.
    fn components(mc: &ConsensusMatrix) -> Vec<usize> {
        let n = mc.n();
        let mut comp = vec![usize::MAX; n];
        let mut next = 0;
        for start in 0..n {
            if comp[start] != usize::MAX {
                continue;
            }
            let mut stack = vec![start];
            comp[start] = next;
            while let Some(i) = stack.pop() {
                for j in 0..n {
                    if mc.count(i, j) > 0 && comp[j] == usize::MAX {
                        comp[j] = next;
                        stack.push(j);
                    }
                }
            }
            next += 1;
        }
        comp
    }

    #[test]
    fn block_diagonal_is_recovered() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for trial in 0..20 {
            let (mc, truth) = block_instance(&mut rng);
            let comps = components(&mc);
            assert_eq!(adjusted_rand_index(&comps, &truth).unwrap(), 1.0);
            let k = truth.iter().max().unwrap() + 1;
            let p = spectral_clustering(&mc, k, trial).unwrap();
            assert_eq!(adjusted_rand_index(p.labels(), &comps).unwrap(), 1.0, "trial {trial}");
        }
    }

    #[test]
    fn subspace_solver_recovers_blocks() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for trial in 0..5 {
            let (mc, truth) = block_instance(&mut rng);
            let k = truth.iter().max().unwrap() + 1;
            let p = spectral_clustering_with(&mc, k, trial, EigenSolver::SubspaceIteration).unwrap();
            assert_eq!(adjusted_rand_index(p.labels(), &truth).unwrap(), 1.0);
        }
    }

    #[test]
    fn single_cluster_and_too_many() {
        let mc = consensus_matrix(&[partition(vec![0, 1, 0, 1])]).unwrap();
        let p = spectral_clustering(&mc, 1, 0).unwrap();
        assert!(p.labels().iter().all(|&l| l == 0));
        assert!(matches!(
            spectral_clustering(&mc, 5, 0),
            Err(KGraphError::TooManyClusters { k: 5, n: 4 })
        ));
    }

    #[test]
    fn isolated_rows_stay_finite() {
        let a = DMatrix::from_row_slice(3, 3, &[1.0, 1.0, 0.0, 1.0, 1.0, 0.0, 0.0, 0.0, 0.0]);
        let norm = normalized_affinity(&a);
        assert!(norm.iter().all(|v| v.is_finite()));
    }

    #[test]
    fn permuting_series_permutes_labels() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for trial in 0..10 {
            let n = 30;
            let truth: Vec<usize> = (0..n).map(|i| i % 3).collect();
            // Noisy copies of the truth so blocks are not perfectly clean.
            let partitions: Vec<Partition> = (0..8)
                .map(|_| {
                    let labels = truth
                        .iter()
                        .map(|&t| if rng.random_bool(0.1) { rng.random_range(0..3) } else { t })
                        .collect();
                    Partition::new(labels, 3, None).unwrap()
                })
                .collect();
            let mut perm: Vec<usize> = (0..n).collect();
            perm.shuffle(&mut rng);
            let permuted: Vec<Partition> = partitions
                .iter()
                .map(|p| Partition::new(perm.iter().map(|&i| p.labels()[i]).collect(), 3, None).unwrap())
                .collect();
            let base = spectral_clustering(&consensus_matrix(&partitions).unwrap(), 3, trial).unwrap();
            let moved = spectral_clustering(&consensus_matrix(&permuted).unwrap(), 3, trial).unwrap();
            let expected: Vec<usize> = perm.iter().map(|&i| base.labels()[i]).collect();
            assert_eq!(adjusted_rand_index(moved.labels(), &expected).unwrap(), 1.0);
        }
    }

    fn partitions_strategy() -> impl Strategy<Value = Vec<Vec<usize>>> {
        (2usize..25, 1usize..8).prop_flat_map(|(n, m)| {
            prop::collection::vec(prop::collection::vec(0usize..4, n), m)
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn lattice_symmetry_and_diagonal(raw in partitions_strategy()) {
            let parts: Vec<Partition> = raw.into_iter().map(|l| Partition::new(l, 4, None).unwrap()).collect();
            let mc = consensus_matrix(&parts).unwrap();
            let m = parts.len() as f64;
            for i in 0..mc.n() {
                prop_assert_eq!(mc.get(i, i), 1.0);
                for j in 0..mc.n() {
                    prop_assert_eq!(mc.get(i, j), mc.get(j, i));
                    let scaled = mc.get(i, j) * m;
                    prop_assert!((scaled - scaled.round()).abs() < 1e-9);
                    prop_assert!((0.0..=1.0).contains(&mc.get(i, j)));
                }
            }
        }

        #[test]
        fn invariant_under_label_renaming(raw in partitions_strategy(), shift in 1usize..4) {
            let parts: Vec<Partition> = raw.iter().map(|l| Partition::new(l.clone(), 4, None).unwrap()).collect();
            let renamed: Vec<Partition> = raw
                .iter()
                .map(|l| Partition::new(l.iter().map(|x| (x + shift) % 4).collect(), 4, None).unwrap())
                .collect();
            prop_assert_eq!(consensus_matrix(&parts).unwrap(), consensus_matrix(&renamed).unwrap());
        }
    }
}
