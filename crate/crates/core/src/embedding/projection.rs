use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::dataset::{Dataset, MIN_SERIES_LEN};
use crate::error::{KGraphError, Result};
use crate::linalg::{self, PcaSolver};

/// Number of principal components kept before the rotation step.
pub const PCA_COMPONENTS: usize = 3;

/// Every subsequence of a dataset mapped to a 2-D shape space.
///
/// Points are stored flat, series after series, each series' points in
/// start-offset order. The map is `x -> first two rows of R * P^T (x - mean)`
/// where `P` holds three principal components and `R` rotates the image of
/// the constant direction onto the discarded third axis, so adding a constant
/// to a subsequence does not move its point.
#[derive(Debug, Clone, PartialEq)]
pub struct ShapeProjection {
    length: usize,
    points: Vec<[f64; 2]>,
    series_offsets: Vec<usize>,
    sampled: Vec<usize>,
    mean: Vec<f64>,
    components: Vec<Vec<f64>>,
    rotation: [[f64; 3]; 3],
}

impl ShapeProjection {
    pub fn length(&self) -> usize {
        self.length
    }

    /// All projected subsequences, grouped by series.
    pub fn points(&self) -> &[[f64; 2]] {
        &self.points
    }

    pub fn n_series(&self) -> usize {
        self.series_offsets.len() - 1
    }

    pub fn series_points(&self, series: usize) -> &[[f64; 2]] {
        &self.points[self.series_offsets[series]..self.series_offsets[series + 1]]
    }

    /// Flat index of the first point of `series`.
    pub fn series_offset(&self, series: usize) -> usize {
        self.series_offsets[series]
    }

    /// Sorted flat indices of the subsequences used to fit the PCA and
    /// create nodes.
    pub fn sampled_indices(&self) -> &[usize] {
        &self.sampled
    }

    pub fn sampled_points(&self) -> impl Iterator<Item = [f64; 2]> + '_ {
        self.sampled.iter().map(|&i| self.points[i])
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn components(&self) -> &[Vec<f64>] {
        &self.components
    }

    pub fn rotation(&self) -> &[[f64; 3]; 3] {
        &self.rotation
    }

    /// Projects an arbitrary vector of the right length.
    pub fn project(&self, values: &[f64]) -> [f64; 2] {
        project_with(&self.mean, &self.components, &self.rotation, values)
    }
}

fn project_with(
    mean: &[f64],
    components: &[Vec<f64>],
    rotation: &[[f64; 3]; 3],
    values: &[f64],
) -> [f64; 2] {
    let mut pc = [0.0; 3];
    for (c, comp) in components.iter().enumerate() {
        pc[c] = values
            .iter()
            .zip(mean)
            .zip(comp)
            .map(|((v, m), w)| (v - m) * w)
            .sum();
    }
    [
        rotation[0][0] * pc[0] + rotation[0][1] * pc[1] + rotation[0][2] * pc[2],
        rotation[1][0] * pc[0] + rotation[1][1] * pc[1] + rotation[1][2] * pc[2],
    ]
}

/// Rotation taking `v` to the third axis. Identity when `v` vanishes, which
/// happens when the PCA space carries no offset information.
pub(crate) fn rotation_to_third_axis(v: [f64; 3]) -> [[f64; 3]; 3] {
    let identity = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
    let norm = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    if norm < 1e-10 {
        return identity;
    }
    let u = [v[0] / norm, v[1] / norm, v[2] / norm];
    let cos = u[2];
    // axis = u x e3 = (u1, -u0, 0)
    let (ax, ay) = (u[1], -u[0]);
    if ax * ax + ay * ay < 1e-24 {
        return if cos > 0.0 {
            identity
        } else {
            [[1.0, 0.0, 0.0], [0.0, -1.0, 0.0], [0.0, 0.0, -1.0]]
        };
    }
    // Rodrigues: R = I + K + K^2 / (1 + cos), K = skew(axis)
    let k = [[0.0, 0.0, ay], [0.0, 0.0, -ax], [-ay, ax, 0.0]];
    let mut r = identity;
    let scale = 1.0 / (1.0 + cos);
    for i in 0..3 {
        for j in 0..3 {
            let k2: f64 = (0..3).map(|m| k[i][m] * k[m][j]).sum();
            r[i][j] += k[i][j] + k2 * scale;
        }
    }
    r
}

/// Samples `floor(total / smpl)` subsequences (at least 3), fits a
/// 3-component PCA on them, and maps every subsequence to shape space.
pub fn fit_projection(
    dataset: &Dataset,
    length: usize,
    smpl: usize,
    rng_seed: u64,
) -> Result<ShapeProjection> {
    fit_projection_with(dataset, length, smpl, rng_seed, PcaSolver::Auto)
}

pub fn fit_projection_with(
    dataset: &Dataset,
    length: usize,
    smpl: usize,
    rng_seed: u64,
    solver: PcaSolver,
) -> Result<ShapeProjection> {
    if smpl == 0 {
        return Err(KGraphError::InvalidConfig("smpl must be at least 1".into()));
    }
    let max = dataset.min_len();
    if length < MIN_SERIES_LEN || length > max {
        return Err(KGraphError::LengthOutOfRange { length, max });
    }

    let mut series_offsets = Vec::with_capacity(dataset.len() + 1);
    let mut windows: Vec<&[f64]> = Vec::new();
    for s in dataset.series() {
        series_offsets.push(windows.len());
        windows.extend(s.values().windows(length));
    }
    series_offsets.push(windows.len());

    let total = windows.len();
    if total < 3 {
        return Err(KGraphError::TooFewSubsequences(total));
    }
    let sample_size = (total / smpl).max(3).min(total);
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let mut sampled = if sample_size == total {
        (0..total).collect()
    } else {
        index::sample(&mut rng, total, sample_size).into_vec()
    };
    sampled.sort_unstable();

    let sample: Vec<&[f64]> = sampled.iter().map(|&i| windows[i]).collect();
    let pca = linalg::fit_pca(&sample, PCA_COMPONENTS, solver, &mut rng);

    let mean_square = sample
        .iter()
        .flat_map(|w| w.iter())
        .map(|v| v * v)
        .sum::<f64>()
        / (sample.len() * length) as f64;
    if pca.total_variance <= 1e-20 * (1.0 + mean_square) {
        return Err(KGraphError::DegenerateProjection { length });
    }

    let unit = 1.0 / (length as f64).sqrt();
    let mut offset_image = [0.0; 3];
    for (c, comp) in pca.components.iter().enumerate() {
        offset_image[c] = comp.iter().sum::<f64>() * unit;
    }
    let rotation = rotation_to_third_axis(offset_image);

    let points = windows
        .iter()
        .map(|w| project_with(&pca.mean, &pca.components, &rotation, w))
        .collect();

    Ok(ShapeProjection {
        length,
        points,
        series_offsets,
        sampled,
        mean: pca.mean,
        components: pca.components,
        rotation,
    })
}
