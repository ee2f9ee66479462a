//! Labelled synthetic datasets with known class structure, for tests,
//! demos and benchmarks when archive data is not at hand.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::dataset::Dataset;
use crate::error::Result;

/// Cylinder / bell / funnel series: a plateau, a rising ramp or a falling
/// ramp on a random interval, plus unit Gaussian noise. Labels are 1, 2, 3.
/// Each series is z-normalized.
pub fn cbf(n_per_class: usize, length: usize, seed: u64) -> Result<Dataset> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut series = Vec::with_capacity(3 * n_per_class);
    let mut labels = Vec::with_capacity(3 * n_per_class);
    let scale = length as f64 / 128.0;
    for i in 0..3 * n_per_class {
        let class = i % 3;
        let a = rng.random_range(16.0..32.0) * scale;
        let b = a + rng.random_range(32.0..96.0) * scale;
        let height = 6.0 + normal(&mut rng);
        let values: Vec<f64> = (0..length)
            .map(|t| {
                let t = t as f64;
                let inside = t >= a && t <= b;
                let shape = match (inside, class) {
                    (false, _) => 0.0,
                    (true, 0) => 1.0,
                    (true, 1) => (t - a) / (b - a),
                    (true, _) => (b - t) / (b - a),
                };
                height * shape + normal(&mut rng)
            })
            .collect();
        series.push(values);
        labels.push(class as i64 + 1);
    }
    Ok(Dataset::new(format!("CBF-synthetic-{seed}"), series, Some(labels))?.z_normalized())
}

/// Six control-chart patterns (normal, cyclic, increasing, decreasing,
/// upward shift, downward shift) around a mean of 30. Labels are 1..=6.
pub fn synthetic_control(n_per_class: usize, length: usize, seed: u64) -> Result<Dataset> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut series = Vec::with_capacity(6 * n_per_class);
    let mut labels = Vec::with_capacity(6 * n_per_class);
    let n = length as f64;
    for i in 0..6 * n_per_class {
        let class = i % 6;
        let amplitude = rng.random_range(10.0..15.0);
        let period = rng.random_range(10.0..15.0);
        let gradient = rng.random_range(0.2..0.5);
        let shift_at = rng.random_range(n / 3.0..2.0 * n / 3.0);
        let shift = rng.random_range(7.5..20.0);
        let values: Vec<f64> = (0..length)
            .map(|t| {
                let t = t as f64;
                let base = 30.0 + 2.0 * rng.random_range(-3.0..3.0);
                base + match class {
                    0 => 0.0,
                    1 => amplitude * (std::f64::consts::TAU * t / period).sin(),
                    2 => gradient * t,
                    3 => -gradient * t,
                    4 => f64::from(u8::from(t >= shift_at)) * shift,
                    _ => -f64::from(u8::from(t >= shift_at)) * shift,
                }
            })
            .collect();
        series.push(values);
        labels.push(class as i64 + 1);
    }
    Dataset::new(format!("SyntheticControl-synthetic-{seed}"), series, Some(labels))
}

fn normal<R: Rng>(rng: &mut R) -> f64 {
    StandardNormal.sample(rng)
}
