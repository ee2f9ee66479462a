//! Small dense linear-algebra kernels: PCA and leading eigenvectors of a
//! symmetric matrix.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng;
use rand_distr::StandardNormal;

/// Subsequence length up to which PCA uses an exact covariance eigendecomposition.
pub const EXACT_PCA_MAX_DIM: usize = 256;

/// Matrix order up to which symmetric eigenproblems are solved densely.
pub const DENSE_EIGEN_MAX_DIM: usize = 4000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PcaSolver {
    /// Exact below [`EXACT_PCA_MAX_DIM`], randomized above.
    #[default]
    Auto,
    Covariance,
    Randomized,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EigenSolver {
    /// Dense below [`DENSE_EIGEN_MAX_DIM`], subspace iteration above.
    #[default]
    Auto,
    Dense,
    SubspaceIteration,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Pca {
    pub mean: Vec<f64>,
    /// Orthonormal components, strongest first.
    pub components: Vec<Vec<f64>>,
    pub explained_variance: Vec<f64>,
    /// Sum of the per-dimension variances of the training sample.
    pub total_variance: f64,
}

/// Fits a PCA with `n_components` components on the rows of `rows`.
///
/// Components are sign-normalized so their largest-magnitude coordinate is
/// positive, which makes the result independent of solver sign conventions.
pub fn fit_pca<R: Rng>(
    rows: &[&[f64]],
    n_components: usize,
    solver: PcaSolver,
    rng: &mut R,
) -> Pca {
    let n = rows.len();
    let dim = rows[0].len();
    let n_components = n_components.min(dim);

    let mut mean = vec![0.0; dim];
    for row in rows {
        for (m, v) in mean.iter_mut().zip(row.iter()) {
            *m += v;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n as f64);

    let centered = DMatrix::from_fn(n, dim, |i, j| rows[i][j] - mean[j]);
    let denom = (n.max(2) - 1) as f64;
    let total_variance = centered.iter().map(|v| v * v).sum::<f64>() / denom;

    let use_exact = match solver {
        PcaSolver::Auto => dim <= EXACT_PCA_MAX_DIM,
        PcaSolver::Covariance => true,
        PcaSolver::Randomized => false,
    };

    let (mut components, explained_variance) = if use_exact {
        let cov = centered.tr_mul(&centered) / denom;
        let eig = SymmetricEigen::new(cov);
        let order = descending_order(eig.eigenvalues.as_slice());
        let comps = order[..n_components]
            .iter()
            .map(|&c| eig.eigenvectors.column(c).iter().copied().collect())
            .collect();
        let vars = order[..n_components]
            .iter()
            .map(|&c| eig.eigenvalues[c].max(0.0))
            .collect();
        (comps, vars)
    } else {
        randomized_components(&centered, n_components, denom, rng)
    };

    for c in &mut components {
        normalize_sign(c);
    }

    Pca {
        mean,
        components,
        explained_variance,
        total_variance,
    }
}

/// Halko-Martinsson-Tropp range finder with power iterations.
fn randomized_components<R: Rng>(
    centered: &DMatrix<f64>,
    n_components: usize,
    denom: f64,
    rng: &mut R,
) -> (Vec<Vec<f64>>, Vec<f64>) {
    const OVERSAMPLING: usize = 10;
    const POWER_ITERATIONS: usize = 4;

    let (n, dim) = centered.shape();
    let width = (n_components + OVERSAMPLING).min(dim).min(n);
    let omega = DMatrix::from_fn(dim, width, |_, _| rng.sample::<f64, _>(StandardNormal));
    let mut q = (centered * omega).qr().q();
    for _ in 0..POWER_ITERATIONS {
        let z = centered.tr_mul(&q).qr().q();
        q = (centered * z).qr().q();
    }
    let b = q.tr_mul(centered);
    let svd = b.svd(false, true);
    let v_t = svd.v_t.expect("requested right singular vectors");
    let order = descending_order(svd.singular_values.as_slice());
    let take = n_components.min(order.len());
    let mut comps: Vec<Vec<f64>> = order[..take]
        .iter()
        .map(|&r| v_t.row(r).iter().copied().collect())
        .collect();
    let mut vars: Vec<f64> = order[..take]
        .iter()
        .map(|&r| svd.singular_values[r].powi(2) / denom)
        .collect();
    // Rank-deficient samples leave fewer singular vectors than requested.
    while comps.len() < n_components {
        let mut extra = vec![0.0; dim];
        extra[comps.len()] = 1.0;
        orthonormalize_against(&mut extra, &comps);
        comps.push(extra);
        vars.push(0.0);
    }
    (comps, vars)
}

fn orthonormalize_against(v: &mut [f64], basis: &[Vec<f64>]) {
    for b in basis {
        let d = dot(v, b);
        v.iter_mut().zip(b).for_each(|(x, y)| *x -= d * y);
    }
    let norm = dot(v, v).sqrt();
    if norm > 0.0 {
        v.iter_mut().for_each(|x| *x /= norm);
    }
}

fn normalize_sign(v: &mut [f64]) {
    let pivot = v
        .iter()
        .copied()
        .fold(0.0f64, |best, x| if x.abs() > best.abs() { x } else { best });
    if pivot < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn descending_order(values: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]).then(a.cmp(&b)));
    order
}

/// Eigenvectors of the `k` largest eigenvalues of a symmetric matrix whose
/// spectrum lies in `[-1, 1]`. Returns the eigenvalues (descending) and an
/// `n x k` matrix of eigenvectors.
pub fn top_eigenvectors<R: Rng>(
    a: &DMatrix<f64>,
    k: usize,
    solver: EigenSolver,
    rng: &mut R,
) -> (Vec<f64>, DMatrix<f64>) {
    let n = a.nrows();
    let dense = match solver {
        EigenSolver::Auto => n <= DENSE_EIGEN_MAX_DIM,
        EigenSolver::Dense => true,
        EigenSolver::SubspaceIteration => false,
    };
    if dense {
        let eig = SymmetricEigen::new(a.clone());
        let order = descending_order(eig.eigenvalues.as_slice());
        let values = order[..k].iter().map(|&c| eig.eigenvalues[c]).collect();
        let vectors = DMatrix::from_fn(n, k, |i, j| eig.eigenvectors[(i, order[j])]);
        (values, vectors)
    } else {
        subspace_iteration(a, k, rng)
    }
}

/// Block power iteration with Rayleigh-Ritz extraction on `A + I`, which is
/// positive semi-definite for spectra in `[-1, 1]`.
fn subspace_iteration<R: Rng>(a: &DMatrix<f64>, k: usize, rng: &mut R) -> (Vec<f64>, DMatrix<f64>) {
    const MAX_ITERATIONS: usize = 3000;
    const TOLERANCE: f64 = 1e-12;

    let n = a.nrows();
    let width = (k + 8).min(n);
    let mut shifted = a.clone();
    for i in 0..n {
        shifted[(i, i)] += 1.0;
    }

    let start = DMatrix::from_fn(n, width, |_, _| rng.sample::<f64, _>(StandardNormal));
    let mut q = start.qr().q();
    let mut previous = vec![f64::INFINITY; k];
    let mut ritz_values = Vec::new();
    let mut ritz_vectors = q.clone();
    for iteration in 0..MAX_ITERATIONS {
        let z = &shifted * &q;
        q = z.qr().q();
        if iteration % 5 != 4 {
            continue;
        }
        let projected = q.tr_mul(&(&shifted * &q));
        let projected = (&projected + projected.transpose()) * 0.5;
        let eig = SymmetricEigen::new(projected);
        let order = descending_order(eig.eigenvalues.as_slice());
        ritz_values = order.iter().map(|&c| eig.eigenvalues[c] - 1.0).collect();
        let rotation = DMatrix::from_fn(width, width, |i, j| eig.eigenvectors[(i, order[j])]);
        ritz_vectors = &q * rotation;
        q = ritz_vectors.clone();
        let converged = ritz_values[..k]
            .iter()
            .zip(&previous)
            .all(|(now, before)| (now - before).abs() < TOLERANCE);
        previous = ritz_values[..k].to_vec();
        if converged {
            break;
        }
    }
    if ritz_values.is_empty() {
        ritz_values = vec![0.0; width];
    }
    let vectors = ritz_vectors.columns(0, k).into_owned();
    (ritz_values[..k].to_vec(), vectors)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn sample_rows(n: usize, dim: usize, seed: u64) -> Vec<Vec<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        // Anisotropic cloud: variance decays with the coordinate index.
        (0..n)
            .map(|_| {
                (0..dim)
                    .map(|j| rng.sample::<f64, _>(StandardNormal) * 10.0 / (1.0 + j as f64))
                    .collect()
            })
            .collect()
    }

    fn assert_orthonormal(components: &[Vec<f64>]) {
        for (i, a) in components.iter().enumerate() {
            for (j, b) in components.iter().enumerate() {
                let expected = if i == j { 1.0 } else { 0.0 };
                assert!((dot(a, b) - expected).abs() < 1e-8, "<c{i}, c{j}> = {}", dot(a, b));
            }
        }
    }

    #[test]
    fn covariance_pca_is_orthonormal_and_ordered() {
        let rows = sample_rows(300, 12, 1);
        let refs: Vec<&[f64]> = rows.iter().map(Vec::as_slice).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let pca = fit_pca(&refs, 3, PcaSolver::Covariance, &mut rng);
        assert_orthonormal(&pca.components);
        assert!(pca.explained_variance[0] >= pca.explained_variance[1]);
        assert!(pca.explained_variance[1] >= pca.explained_variance[2]);
    }

    #[test]
    fn randomized_pca_matches_exact_subspace() {
        let rows = sample_rows(400, 40, 2);
        let refs: Vec<&[f64]> = rows.iter().map(Vec::as_slice).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let exact = fit_pca(&refs, 3, PcaSolver::Covariance, &mut rng);
        let approx = fit_pca(&refs, 3, PcaSolver::Randomized, &mut rng);
        assert_orthonormal(&approx.components);
        for (e, a) in exact.components.iter().zip(&approx.components) {
            assert!(dot(e, a).abs() > 0.999, "component alignment {}", dot(e, a));
        }
        for (e, a) in exact
            .explained_variance
            .iter()
            .zip(&approx.explained_variance)
        {
            assert!((e - a).abs() / e < 1e-6);
        }
    }

    #[test]
    fn subspace_iteration_matches_dense() {
        // Normalized affinity of three noisy blocks.
        let n = 60;
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut m = DMatrix::from_fn(n, n, |i, j| {
            if i / 20 == j / 20 {
                1.0
            } else {
                0.0
            }
        });
        for i in 0..n {
            for j in 0..i {
                let noise = rng.random::<f64>() * 0.05;
                m[(i, j)] += noise;
                m[(j, i)] += noise;
            }
        }
        let deg: Vec<f64> = (0..n).map(|i| m.row(i).sum()).collect();
        let a = DMatrix::from_fn(n, n, |i, j| m[(i, j)] / (deg[i] * deg[j]).sqrt());
        let (dense_vals, dense_vecs) = top_eigenvectors(&a, 3, EigenSolver::Dense, &mut rng);
        let (iter_vals, iter_vecs) =
            top_eigenvectors(&a, 3, EigenSolver::SubspaceIteration, &mut rng);
        for (d, i) in dense_vals.iter().zip(&iter_vals) {
            assert!((d - i).abs() < 1e-8, "{d} vs {i}");
        }
        // Same invariant subspace: projector difference vanishes.
        let pd = &dense_vecs * dense_vecs.transpose();
        let pi = &iter_vecs * iter_vecs.transpose();
        assert!((pd - pi).norm() < 1e-6);
    }
}
