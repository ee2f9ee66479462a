//! Lloyd's k-means with k-means++ seeding and restarts.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{KGraphError, Result};
use crate::linalg::squared_distance;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KMeansParams {
    pub n_init: usize,
    pub max_iter: usize,
}

impl Default for KMeansParams {
    fn default() -> Self {
        Self {
            n_init: 10,
            max_iter: 300,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KMeansFit {
    pub labels: Vec<usize>,
    pub centroids: Vec<Vec<f64>>,
    /// Sum of squared distances to the assigned centroids.
    pub inertia: f64,
    pub iterations: usize,
}

pub fn kmeans(rows: &[Vec<f64>], k: usize, rng_seed: u64) -> Result<KMeansFit> {
    kmeans_with(rows, k, rng_seed, &KMeansParams::default())
}

/// Best of `n_init` seeded runs by inertia; earlier runs win ties.
pub fn kmeans_with(
    rows: &[Vec<f64>],
    k: usize,
    rng_seed: u64,
    params: &KMeansParams,
) -> Result<KMeansFit> {
    let n = rows.len();
    if k == 0 {
        return Err(KGraphError::InvalidConfig("k must be at least 1".into()));
    }
    if k > n {
        return Err(KGraphError::TooManyClusters { k, n });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let mut best: Option<KMeansFit> = None;
    for _ in 0..params.n_init.max(1) {
        let centroids = kmeans_plus_plus(rows, k, &mut rng);
        let fit = lloyd(rows, centroids, params.max_iter);
        if best.as_ref().is_none_or(|b| fit.inertia < b.inertia) {
            best = Some(fit);
        }
    }
    Ok(best.expect("at least one restart"))
}

fn kmeans_plus_plus<R: Rng>(rows: &[Vec<f64>], k: usize, rng: &mut R) -> Vec<Vec<f64>> {
    let n = rows.len();
    let mut centroids = vec![rows[rng.random_range(0..n)].clone()];
    let mut closest: Vec<f64> = rows
        .iter()
        .map(|r| squared_distance(r, &centroids[0]))
        .collect();
    while centroids.len() < k {
        let total: f64 = closest.iter().sum();
        let pick = if total > 0.0 {
            let target = rng.random::<f64>() * total;
            let mut acc = 0.0;
            let mut chosen = n - 1;
            for (i, d) in closest.iter().enumerate() {
                acc += d;
                if acc > target && *d > 0.0 {
                    chosen = i;
                    break;
                }
            }
            chosen
        } else {
            rng.random_range(0..n)
        };
        let c = rows[pick].clone();
        for (d, r) in closest.iter_mut().zip(rows) {
            *d = d.min(squared_distance(r, &c));
        }
        centroids.push(c);
    }
    centroids
}

/// Index of the nearest centroid (lowest index on ties) and its squared distance.
pub fn nearest(row: &[f64], centroids: &[Vec<f64>]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (c, centroid) in centroids.iter().enumerate() {
        let d = squared_distance(row, centroid);
        if d < best.1 {
            best = (c, d);
        }
    }
    best
}

fn lloyd(rows: &[Vec<f64>], mut centroids: Vec<Vec<f64>>, max_iter: usize) -> KMeansFit {
    let n = rows.len();
    let k = centroids.len();
    let dim = rows[0].len();
    let mut labels = vec![usize::MAX; n];
    let mut iterations = 0;
    for _ in 0..max_iter.max(1) {
        iterations += 1;
        let mut assigned: Vec<(usize, f64)> = rows.iter().map(|r| nearest(r, &centroids)).collect();
        refill_empty_clusters(&mut assigned, k);
        let changed = assigned.iter().zip(&labels).any(|((a, _), b)| a != b);
        for (label, (a, _)) in labels.iter_mut().zip(&assigned) {
            *label = *a;
        }

        let mut sums = vec![vec![0.0; dim]; k];
        let mut counts = vec![0usize; k];
        for (row, &l) in rows.iter().zip(&labels) {
            counts[l] += 1;
            sums[l].iter_mut().zip(row).for_each(|(s, v)| *s += v);
        }
        for ((centroid, sum), &count) in centroids.iter_mut().zip(sums).zip(&counts) {
            if count > 0 {
                *centroid = sum.into_iter().map(|s| s / count as f64).collect();
            }
        }
        if !changed {
            break;
        }
    }
    let inertia = rows
        .iter()
        .zip(&labels)
        .map(|(r, &l)| squared_distance(r, &centroids[l]))
        .sum();
    KMeansFit {
        labels,
        centroids,
        inertia,
        iterations,
    }
}

/// Gives every empty cluster the point farthest from its centroid, taken
/// from a cluster that keeps at least one member.
fn refill_empty_clusters(assigned: &mut [(usize, f64)], k: usize) {
    let mut counts = vec![0usize; k];
    for (l, _) in assigned.iter() {
        counts[*l] += 1;
    }
    for empty in 0..k {
        if counts[empty] > 0 {
            continue;
        }
        let donor = assigned
            .iter()
            .enumerate()
            .filter(|(_, (l, _))| counts[*l] > 1)
            .fold(None, |best: Option<(usize, f64)>, (i, (_, d))| match best {
                Some((_, bd)) if bd >= *d => best,
                _ => Some((i, *d)),
            });
        if let Some((i, _)) = donor {
            counts[assigned[i].0] -= 1;
            assigned[i] = (empty, 0.0);
            counts[empty] = 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand_distr::{Distribution, Normal};

    fn blobs(seed: u64) -> (Vec<Vec<f64>>, Vec<usize>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let noise = Normal::new(0.0, 0.5).unwrap();
        let centers = [[0.0, 0.0, 0.0], [40.0, -40.0, 10.0]];
        let mut rows = Vec::new();
        let mut truth = Vec::new();
        for (c, center) in centers.iter().enumerate() {
            for _ in 0..20 {
                rows.push(center.iter().map(|x| x + noise.sample(&mut rng)).collect());
                truth.push(c);
            }
        }
        (rows, truth)
    }

    #[test]
    fn separated_blobs_are_recovered() {
        for seed in 0..5 {
            let (rows, truth) = blobs(seed);
            let fit = kmeans(&rows, 2, seed).unwrap();
            // Oracle: each point's nearest blob center by brute force.
            for (i, row) in rows.iter().enumerate() {
                for j in 0..rows.len() {
                    let same_truth = truth[i] == truth[j];
                    let same_label = fit.labels[i] == fit.labels[j];
                    assert_eq!(same_truth, same_label, "points {i} and {j}");
                }
                let (c, _) = nearest(row, &fit.centroids);
                assert_eq!(c, fit.labels[i]);
            }
        }
    }

    #[test]
    fn single_cluster() {
        let (rows, _) = blobs(1);
        let fit = kmeans(&rows, 1, 0).unwrap();
        assert!(fit.labels.iter().all(|&l| l == 0));
    }

    #[test]
    fn k_equal_n_has_zero_inertia() {
        let (rows, _) = blobs(2);
        let fit = kmeans(&rows[..8], 8, 3).unwrap();
        assert!(fit.inertia < 1e-12);
        let mut labels = fit.labels.clone();
        labels.sort_unstable();
        labels.dedup();
        assert_eq!(labels.len(), 8);
    }

    #[test]
    fn too_many_clusters() {
        let rows = vec![vec![0.0], vec![1.0]];
        assert!(matches!(
            kmeans(&rows, 3, 0),
            Err(KGraphError::TooManyClusters { k: 3, n: 2 })
        ));
    }

    #[test]
    fn deterministic_given_seed() {
        let (rows, _) = blobs(4);
        assert_eq!(kmeans(&rows, 3, 11).unwrap(), kmeans(&rows, 3, 11).unwrap());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn labels_are_a_fixed_point(
            rows in prop::collection::vec(prop::collection::vec(-10.0f64..10.0, 3), 4..40),
            k in 1usize..4,
            seed in 0u64..1000,
        ) {
            let fit = kmeans(&rows, k, seed).unwrap();
            prop_assert!(fit.iterations < 300);
            for (row, &l) in rows.iter().zip(&fit.labels) {
                let own = squared_distance(row, &fit.centroids[l]);
                let (_, best) = nearest(row, &fit.centroids);
                prop_assert!(own <= best + 1e-9);
            }
        }

        #[test]
        fn duplicates_share_a_label(
            mut rows in prop::collection::vec(prop::collection::vec(-10.0f64..10.0, 2), 4..30),
            seed in 0u64..1000,
        ) {
            let dup = rows[0].clone();
            rows.push(dup);
            let fit = kmeans(&rows, 3, seed).unwrap();
            prop_assert_eq!(fit.labels[0], *fit.labels.last().unwrap());
        }
    }
}
