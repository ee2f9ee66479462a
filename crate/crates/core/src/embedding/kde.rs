//! One-dimensional Gaussian kernel density estimation.

use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum Bandwidth {
    /// `sigma * n^(-1/5)`, sigma being the sample standard deviation.
    #[default]
    Scott,
    Fixed(f64),
}

impl Bandwidth {
    /// Bandwidth for `samples`. Not finite or zero when the samples carry no
    /// spread (fewer than two points, or all equal).
    pub fn resolve(self, samples: &[f64]) -> f64 {
        match self {
            Bandwidth::Fixed(h) => h,
            Bandwidth::Scott => {
                let n = samples.len() as f64;
                if samples.len() < 2 {
                    return f64::NAN;
                }
                let mean = samples.iter().sum::<f64>() / n;
                let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
                var.sqrt() * n.powf(-0.2)
            }
        }
    }
}

/// Density of the samples at each grid point.
pub fn gaussian_kde(samples: &[f64], bandwidth: f64, grid: &[f64]) -> Vec<f64> {
    let norm = 1.0 / (samples.len() as f64 * bandwidth * (2.0 * PI).sqrt());
    grid.iter()
        .map(|&x| {
            samples
                .iter()
                .map(|&s| {
                    let z = (x - s) / bandwidth;
                    (-0.5 * z * z).exp()
                })
                .sum::<f64>()
                * norm
        })
        .collect()
}

/// `points` evenly spaced values covering `[lo, hi]`.
pub fn linspace(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let step = (hi - lo) / (points - 1) as f64;
            (0..points).map(|i| lo + step * i as f64).collect()
        }
    }
}

/// Indices strictly above their neighbours. The two ends of the curve only
/// have one neighbour to beat.
pub fn local_maxima(curve: &[f64]) -> Vec<usize> {
    let n = curve.len();
    (0..n)
        .filter(|&i| {
            let left = i == 0 || curve[i] > curve[i - 1];
            let right = i + 1 == n || curve[i] > curve[i + 1];
            left && right && n > 1
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scott_rule() {
        let samples = [1.0, 2.0, 3.0, 4.0, 5.0];
        let std = (2.5f64).sqrt();
        let h = Bandwidth::Scott.resolve(&samples);
        assert!((h - std * 5f64.powf(-0.2)).abs() < 1e-12);
        assert!(Bandwidth::Scott.resolve(&[1.0]).is_nan());
        assert_eq!(Bandwidth::Scott.resolve(&[2.0, 2.0, 2.0]), 0.0);
    }

    #[test]
    fn density_integrates_to_one() {
        let samples = [0.3, 1.2, 1.9, 4.0];
        let grid = linspace(-10.0, 15.0, 5001);
        let d = gaussian_kde(&samples, 0.5, &grid);
        let step = grid[1] - grid[0];
        let integral: f64 = d.iter().sum::<f64>() * step;
        assert!((integral - 1.0).abs() < 1e-6);
    }

    #[test]
    fn maxima_include_edges() {
        assert_eq!(local_maxima(&[3.0, 2.0, 1.0, 2.0, 1.5]), vec![0, 3]);
        assert_eq!(local_maxima(&[1.0, 2.0, 2.0, 1.0]), Vec::<usize>::new());
        assert_eq!(local_maxima(&[1.0, 2.0, 3.0]), vec![2]);
    }
}
