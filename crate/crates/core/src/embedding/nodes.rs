//! Node creation by radial scan of the shape space, and assignment of every
//! subsequence to a node.

use std::collections::BTreeMap;
use std::f64::consts::TAU;

use super::kde::{self, Bandwidth};
use super::projection::ShapeProjection;
use super::PatternNode;
use crate::error::{KGraphError, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NodeParams {
    /// Number of rays (angular sectors) around the origin.
    pub angular_bins: usize,
    pub bandwidth: Bandwidth,
    /// Radii at which each sector's density is evaluated.
    pub grid_points: usize,
    /// Sectors with fewer sampled points than this get no node.
    pub min_bin_points: usize,
}

impl Default for NodeParams {
    fn default() -> Self {
        Self {
            angular_bins: 60,
            bandwidth: Bandwidth::Scott,
            grid_points: 200,
            min_bin_points: 3,
        }
    }
}

pub fn angular_bin(point: [f64; 2], bins: usize) -> usize {
    let mut theta = point[1].atan2(point[0]);
    if theta < 0.0 {
        theta += TAU;
    }
    ((theta / TAU * bins as f64) as usize).min(bins - 1)
}

fn radius(point: [f64; 2]) -> f64 {
    point[0].hypot(point[1])
}

/// Creates one node per local maximum of the radial density in each sector,
/// using only the sampled points. Nodes are ordered by sector then radius;
/// their prototypes are filled in once members are known.
pub fn create_nodes(projection: &ShapeProjection, params: &NodeParams) -> Result<Vec<PatternNode>> {
    if params.angular_bins == 0 || params.grid_points < 2 {
        return Err(KGraphError::InvalidConfig(
            "radial scan needs at least one sector and two grid points".into(),
        ));
    }
    let mut radii_by_bin: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
    for p in projection.sampled_points() {
        radii_by_bin
            .entry(angular_bin(p, params.angular_bins))
            .or_default()
            .push(radius(p));
    }
    if radii_by_bin.values().flatten().all(|&r| r <= 0.0) {
        return Err(KGraphError::EmptyBins);
    }

    let mut nodes = scan(&radii_by_bin, params, params.min_bin_points);
    if nodes.is_empty() {
        // Too few points per sector for any density estimate.
        nodes = scan(&radii_by_bin, params, 1);
    }
    for (id, node) in nodes.iter_mut().enumerate() {
        node.id = id;
    }
    Ok(nodes)
}

fn scan(
    radii_by_bin: &BTreeMap<usize, Vec<f64>>,
    params: &NodeParams,
    min_points: usize,
) -> Vec<PatternNode> {
    let mut nodes = Vec::new();
    for (&bin, radii) in radii_by_bin {
        if radii.len() < min_points {
            continue;
        }
        for r in density_peaks(radii, params) {
            nodes.push(PatternNode {
                id: 0,
                angular_bin: bin,
                radius: r,
                prototype: Vec::new(),
                member_count: 0,
            });
        }
    }
    nodes
}

/// Radii of the density maxima of one sector, ascending.
pub fn density_peaks(radii: &[f64], params: &NodeParams) -> Vec<f64> {
    let max_r = radii.iter().copied().fold(0.0, f64::max);
    let h = params.bandwidth.resolve(radii);
    if !(h.is_finite() && h > 0.0) || max_r <= 0.0 {
        let mean = radii.iter().sum::<f64>() / radii.len() as f64;
        return vec![mean];
    }
    let grid = kde::linspace(0.0, max_r, params.grid_points);
    let density = kde::gaussian_kde(radii, h, &grid);
    let mut peaks: Vec<f64> = kde::local_maxima(&density)
        .into_iter()
        .map(|i| grid[i])
        .collect();
    if peaks.is_empty() {
        let best = density
            .iter()
            .enumerate()
            .fold(0, |best, (i, d)| if *d > density[best] { i } else { best });
        peaks.push(grid[best]);
    }
    peaks
}

/// Where a node sits in the plane: its radius along its sector's bisector.
pub fn node_position(node: &PatternNode, bins: usize) -> [f64; 2] {
    let theta = (node.angular_bin as f64 + 0.5) * TAU / bins as f64;
    [node.radius * theta.cos(), node.radius * theta.sin()]
}

/// Node of each projected point: radially nearest node of its sector, or the
/// nearest node overall when the sector has none. Ties go to the lowest id.
pub fn assign_points(
    projection: &ShapeProjection,
    nodes: &[PatternNode],
    angular_bins: usize,
) -> Vec<usize> {
    let mut by_bin: Vec<Vec<usize>> = vec![Vec::new(); angular_bins];
    for node in nodes {
        by_bin[node.angular_bin].push(node.id);
    }
    let positions: Vec<[f64; 2]> = nodes
        .iter()
        .map(|n| node_position(n, angular_bins))
        .collect();

    projection
        .points()
        .iter()
        .map(|&p| {
            let candidates = &by_bin[angular_bin(p, angular_bins)];
            if candidates.is_empty() {
                argmin(0..nodes.len(), |id| {
                    let q = positions[id];
                    (p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)
                })
            } else {
                let r = radius(p);
                argmin(candidates.iter().copied(), |id| (r - nodes[id].radius).abs())
            }
        })
        .collect()
}

fn argmin(ids: impl Iterator<Item = usize>, cost: impl Fn(usize) -> f64) -> usize {
    let mut best = (usize::MAX, f64::INFINITY);
    for id in ids {
        let c = cost(id);
        if c < best.1 || (c == best.1 && id < best.0) {
            best = (id, c);
        }
    }
    best.0
}

pub type EdgeCounts = BTreeMap<(usize, usize), u64>;

/// Assigns every subsequence to a node and counts transitions between
/// consecutive subsequences of the same series.
pub fn create_edges(
    projection: &ShapeProjection,
    nodes: &[PatternNode],
    angular_bins: usize,
) -> (EdgeCounts, Vec<Vec<usize>>) {
    let assignment = assign_points(projection, nodes, angular_bins);
    let paths: Vec<Vec<usize>> = (0..projection.n_series())
        .map(|s| {
            let start = projection.series_offset(s);
            assignment[start..start + projection.series_points(s).len()].to_vec()
        })
        .collect();
    let mut edges = EdgeCounts::new();
    for path in &paths {
        for pair in path.windows(2) {
            *edges.entry((pair[0], pair[1])).or_insert(0) += 1;
        }
    }
    (edges, paths)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params() -> NodeParams {
        NodeParams::default()
    }

    /// Independent oracle: count strict interior or edge maxima of a KDE
    /// evaluated by direct summation on a fine grid.
    fn oracle_modes(radii: &[f64], h: f64) -> usize {
        let max = radii.iter().copied().fold(0.0, f64::max);
        let n = 2000;
        let d: Vec<f64> = (0..n)
            .map(|i| {
                let x = max * i as f64 / (n - 1) as f64;
                radii
                    .iter()
                    .map(|r| (-(x - r).powi(2) / (2.0 * h * h)).exp())
                    .sum()
            })
            .collect();
        (0..n)
            .filter(|&i| (i == 0 || d[i] > d[i - 1]) && (i == n - 1 || d[i] > d[i + 1]))
            .count()
    }

    #[test]
    fn one_tight_cluster_gives_one_peak() {
        let radii: Vec<f64> = (0..30).map(|i| 2.0 + 0.001 * (i as f64 - 15.0)).collect();
        assert_eq!(density_peaks(&radii, &params()).len(), 1);
    }

    #[test]
    fn two_separated_clusters_give_two_peaks() {
        let mut radii: Vec<f64> = (0..20).map(|i| 1.0 + 0.01 * (i as f64 - 10.0)).collect();
        radii.extend((0..20).map(|i| 5.0 + 0.01 * (i as f64 - 10.0)));
        let peaks = density_peaks(&radii, &params());
        let h = Bandwidth::Scott.resolve(&radii);
        assert_eq!(peaks.len(), oracle_modes(&radii, h));
        assert_eq!(peaks.len(), 2);
        assert!((peaks[0] - 1.0).abs() < 0.1 && (peaks[1] - 5.0).abs() < 0.1);
    }

    #[test]
    fn far_cluster_does_not_reduce_peak_count() {
        let mut radii: Vec<f64> = (0..20).map(|i| 1.0 + 0.01 * (i as f64 - 10.0)).collect();
        radii.extend((0..20).map(|i| 4.0 + 0.01 * (i as f64 - 10.0)));
        let before = density_peaks(&radii, &params()).len();
        radii.extend((0..20).map(|i| 40.0 + 0.01 * (i as f64 - 10.0)));
        let after = density_peaks(&radii, &params()).len();
        let h = Bandwidth::Scott.resolve(&radii);
        assert_eq!(after, oracle_modes(&radii, h));
        assert!(after >= before, "{after} < {before}");
    }

    #[test]
    fn identical_radii_give_one_peak() {
        assert_eq!(density_peaks(&[3.0, 3.0, 3.0], &params()), vec![3.0]);
    }

    #[test]
    fn sectors_cover_the_circle() {
        assert_eq!(angular_bin([1.0, 0.0], 60), 0);
        assert_eq!(angular_bin([0.0, 1.0], 60), 15);
        assert_eq!(angular_bin([-1.0, 0.0], 60), 30);
        assert_eq!(angular_bin([1.0, -1e-12], 60), 59);
    }
}
