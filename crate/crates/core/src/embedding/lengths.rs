use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dataset::{Dataset, MIN_SERIES_LEN};
use crate::error::{KGraphError, Result};

/// Draws `m` subsequence lengths uniformly from `[5, floor(min|T| * rml)]`,
/// without replacement when the interval is large enough. Returned sorted.
pub fn sample_lengths(dataset: &Dataset, m: usize, rml: f64, rng_seed: u64) -> Result<Vec<usize>> {
    if m == 0 {
        return Err(KGraphError::InvalidConfig("M must be at least 1".into()));
    }
    if !(rml > 0.0 && rml <= 1.0) {
        return Err(KGraphError::InvalidConfig(format!("rml {rml} outside (0, 1]")));
    }
    let upper = max_length(dataset.min_len(), rml);
    if upper < MIN_SERIES_LEN {
        return Err(KGraphError::SeriesTooShortForRml { upper });
    }
    let span = upper - MIN_SERIES_LEN + 1;
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let mut lengths: Vec<usize> = if span >= m {
        index::sample(&mut rng, span, m)
            .into_iter()
            .map(|i| MIN_SERIES_LEN + i)
            .collect()
    } else {
        (0..m)
            .map(|_| rng.random_range(MIN_SERIES_LEN..=upper))
            .collect()
    };
    lengths.sort_unstable();
    Ok(lengths)
}

/// `floor(min_len * rml)`, tolerant of products like `0.29 * 100` landing
/// just below an integer.
pub(crate) fn max_length(min_len: usize, rml: f64) -> usize {
    (min_len as f64 * rml + 1e-9).floor() as usize
}

/// Stable 64-bit seed for one `(length, replicate, stream)` of a run.
pub fn derive_seed(master: u64, length: usize, replicate: usize, stream: u64) -> u64 {
    let mut h = splitmix(master ^ 0x6b47_7261_7068_0000);
    h = splitmix(h ^ length as u64);
    h = splitmix(h ^ replicate as u64);
    splitmix(h ^ stream)
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
