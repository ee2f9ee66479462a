//! External agreement between two labelings: Rand index, adjusted Rand
//! index, and normalized / adjusted mutual information.
//!
//! Labels may be of any ordered type; only co-membership matters, so every
//! score is invariant under renaming the labels of either argument. Mutual
//! information scores normalize by the arithmetic mean of the two entropies.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{KGraphError, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContingencyTable {
    /// `counts[i][j]`: items in class `i` of the first labeling and cluster
    /// `j` of the second, classes and clusters indexed in sorted label order.
    pub counts: Vec<Vec<u64>>,
    pub row_sums: Vec<u64>,
    pub col_sums: Vec<u64>,
    pub n: u64,
}

impl ContingencyTable {
    pub fn new<A: Ord, B: Ord>(a: &[A], b: &[B]) -> Result<Self> {
        if a.len() != b.len() {
            return Err(KGraphError::SizeMismatch {
                expected: a.len(),
                actual: b.len(),
            });
        }
        if a.len() < 2 {
            return Err(KGraphError::InvalidConfig(
                "agreement metrics need at least 2 items".into(),
            ));
        }
        let rows = dense_codes(a);
        let cols = dense_codes(b);
        let n_rows = rows.iter().max().map_or(0, |m| m + 1);
        let n_cols = cols.iter().max().map_or(0, |m| m + 1);
        let mut counts = vec![vec![0u64; n_cols]; n_rows];
        for (&r, &c) in rows.iter().zip(&cols) {
            counts[r][c] += 1;
        }
        let row_sums = counts.iter().map(|r| r.iter().sum()).collect();
        let col_sums = (0..n_cols)
            .map(|c| counts.iter().map(|r| r[c]).sum())
            .collect();
        Ok(Self {
            counts,
            row_sums,
            col_sums,
            n: a.len() as u64,
        })
    }

    fn cells(&self) -> impl Iterator<Item = u64> + '_ {
        self.counts.iter().flatten().copied()
    }
}

fn dense_codes<T: Ord>(labels: &[T]) -> Vec<usize> {
    let mut codes: BTreeMap<&T, usize> = BTreeMap::new();
    for l in labels {
        codes.entry(l).or_insert(0);
    }
    for (i, v) in codes.values_mut().enumerate() {
        *v = i;
    }
    labels.iter().map(|l| codes[l]).collect()
}

fn pairs(x: u64) -> f64 {
    (x as f64) * (x.saturating_sub(1) as f64) / 2.0
}

/// Fraction of item pairs on which the two labelings agree.
pub fn rand_index<A: Ord, B: Ord>(a: &[A], b: &[B]) -> Result<f64> {
    let t = ContingencyTable::new(a, b)?;
    let total = pairs(t.n);
    let same_both: f64 = t.cells().map(pairs).sum();
    let same_a: f64 = t.row_sums.iter().copied().map(pairs).sum();
    let same_b: f64 = t.col_sums.iter().copied().map(pairs).sum();
    let agreements = total + 2.0 * same_both - same_a - same_b;
    Ok(agreements / total)
}

/// Rand index corrected for chance under the hypergeometric model.
/// Returns 1.0 when both labelings are trivially identical (for instance
/// everything in one cluster on both sides).
pub fn adjusted_rand_index<A: Ord, B: Ord>(a: &[A], b: &[B]) -> Result<f64> {
    let t = ContingencyTable::new(a, b)?;
    let index: f64 = t.cells().map(pairs).sum();
    let sum_a: f64 = t.row_sums.iter().copied().map(pairs).sum();
    let sum_b: f64 = t.col_sums.iter().copied().map(pairs).sum();
    let expected = sum_a * sum_b / pairs(t.n);
    let max = (sum_a + sum_b) / 2.0;
    if max == expected {
        return Ok(1.0);
    }
    Ok((index - expected) / (max - expected))
}

fn entropy(sums: &[u64], n: u64) -> f64 {
    let n = n as f64;
    sums.iter()
        .filter(|&&s| s > 0)
        .map(|&s| {
            let p = s as f64 / n;
            -p * p.ln()
        })
        .sum()
}

pub fn mutual_information<A: Ord, B: Ord>(a: &[A], b: &[B]) -> Result<f64> {
    Ok(mi_of(&ContingencyTable::new(a, b)?))
}

fn mi_of(t: &ContingencyTable) -> f64 {
    let n = t.n as f64;
    let mut mi = 0.0;
    for (i, row) in t.counts.iter().enumerate() {
        for (j, &nij) in row.iter().enumerate() {
            if nij == 0 {
                continue;
            }
            let nij = nij as f64;
            let outer = t.row_sums[i] as f64 * t.col_sums[j] as f64;
            mi += nij / n * (n * nij / outer).ln();
        }
    }
    mi.max(0.0)
}

pub fn nmi<A: Ord, B: Ord>(a: &[A], b: &[B]) -> Result<f64> {
    let t = ContingencyTable::new(a, b)?;
    if t.row_sums.len() == 1 && t.col_sums.len() == 1 {
        return Ok(1.0);
    }
    let mi = mi_of(&t);
    let normalizer = (entropy(&t.row_sums, t.n) + entropy(&t.col_sums, t.n)) / 2.0;
    if mi <= 0.0 || normalizer <= 0.0 {
        return Ok(0.0);
    }
    Ok((mi / normalizer).min(1.0))
}

/// Expected mutual information of two labelings with the table's marginals
/// under random permutation. Hypergeometric weights are accumulated in log
/// space.
pub fn expected_mutual_information(t: &ContingencyTable) -> f64 {
    let n = t.n as usize;
    let mut ln_fact = vec![0.0f64; n + 1];
    for i in 1..=n {
        ln_fact[i] = ln_fact[i - 1] + (i as f64).ln();
    }
    let nf = n as f64;
    let mut emi = 0.0;
    for &a in &t.row_sums {
        let a = a as usize;
        for &b in &t.col_sums {
            let b = b as usize;
            let start = 1.max((a + b).saturating_sub(n));
            let end = a.min(b);
            let fixed = ln_fact[a] + ln_fact[b] + ln_fact[n - a] + ln_fact[n - b] - ln_fact[n];
            for nij in start..=end {
                let x = nij as f64;
                let log_weight = fixed
                    - ln_fact[nij]
                    - ln_fact[a - nij]
                    - ln_fact[b - nij]
                    - ln_fact[n + nij - a - b];
                let log_ratio = (nf * x).ln() - (a as f64 * b as f64).ln();
                emi += x / nf * log_ratio * log_weight.exp();
            }
        }
    }
    emi
}

pub fn ami<A: Ord, B: Ord>(a: &[A], b: &[B]) -> Result<f64> {
    let t = ContingencyTable::new(a, b)?;
    if t.row_sums.len() == 1 && t.col_sums.len() == 1 {
        return Ok(1.0);
    }
    let mi = mi_of(&t);
    let emi = expected_mutual_information(&t);
    let normalizer = (entropy(&t.row_sums, t.n) + entropy(&t.col_sums, t.n)) / 2.0;
    let mut denominator = normalizer - emi;
    denominator = if denominator < 0.0 {
        denominator.min(-f64::EPSILON)
    } else {
        denominator.max(f64::EPSILON)
    };
    Ok((mi - emi) / denominator)
}

/// The four scores reported for a run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Scores {
    pub ri: f64,
    pub ari: f64,
    pub ami: f64,
    pub nmi: f64,
}

impl Scores {
    pub fn compute<A: Ord, B: Ord>(truth: &[A], predicted: &[B]) -> Result<Self> {
        Ok(Self {
            ri: rand_index(truth, predicted)?,
            ari: adjusted_rand_index(truth, predicted)?,
            ami: ami(truth, predicted)?,
            nmi: nmi(truth, predicted)?,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Pair-enumeration oracle for ARI using exact rational arithmetic on
    /// integer pair counts.
    pub(crate) fn ari_by_pairs(a: &[usize], b: &[usize]) -> f64 {
        let n = a.len();
        let (mut both, mut only_a, mut only_b, mut neither) = (0i128, 0i128, 0i128, 0i128);
        for i in 0..n {
            for j in i + 1..n {
                match (a[i] == a[j], b[i] == b[j]) {
                    (true, true) => both += 1,
                    (true, false) => only_a += 1,
                    (false, true) => only_b += 1,
                    (false, false) => neither += 1,
                }
            }
        }
        // ARI = 2(ad - bc) / ((a+b)(b+d) + (a+c)(c+d)) in pair-count form.
        let num = 2 * (both * neither - only_a * only_b);
        let den = (both + only_a) * (only_a + neither) + (both + only_b) * (only_b + neither);
        if den == 0 {
            1.0
        } else {
            num as f64 / den as f64
        }
    }

    #[test]
    fn rand_index_examples() {
        assert_eq!(rand_index(&[0, 0, 1, 1], &[0, 0, 1, 1]).unwrap(), 1.0);
        let ri = rand_index(&[0, 0, 1, 1], &[0, 1, 0, 1]).unwrap();
        assert!((ri - 2.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn ari_examples() {
        assert_eq!(adjusted_rand_index(&[0, 0, 1, 1], &[0, 0, 1, 1]).unwrap(), 1.0);
        assert_eq!(adjusted_rand_index(&[0, 0, 1, 1], &[1, 1, 0, 0]).unwrap(), 1.0);
        assert_eq!(adjusted_rand_index(&[3, 3, 3], &[1, 1, 1]).unwrap(), 1.0);
        assert!(adjusted_rand_index(&[0, 1], &[0]).is_err());
    }

    #[test]
    fn ari_is_near_zero_for_independent_labelings() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let mut total = 0.0;
        for _ in 0..200 {
            let a: Vec<usize> = (0..500).map(|_| rng.random_range(0..4)).collect();
            let b: Vec<usize> = (0..500).map(|_| rng.random_range(0..4)).collect();
            total += adjusted_rand_index(&a, &b).unwrap();
        }
        assert!((total / 200.0).abs() < 0.02);
    }

    #[test]
    fn mutual_information_examples() {
        let a = [0, 0, 1, 1, 2, 2];
        let b = [5, 5, 7, 7, 9, 9];
        assert!((nmi(&a, &b).unwrap() - 1.0).abs() < 1e-12);
        assert!((ami(&a, &b).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(nmi(&a, &[1; 6]).unwrap(), 0.0);
    }

    #[test]
    fn ami_reference_value() {
        // Hand-evaluated: a = [0,0,0,1,1,1], b = [0,0,1,1,2,2].
        // MI = (2/6)ln2 + 2*(1/6)ln1 + (2/6)ln2 = (2/3)ln2.
        let a = [0, 0, 0, 1, 1, 1];
        let b = [0, 0, 1, 1, 2, 2];
        let mi = mutual_information(&a, &b).unwrap();
        assert!((mi - 2.0 / 3.0 * 2f64.ln()).abs() < 1e-12);
        let h_a = 2f64.ln();
        let h_b = 3f64.ln();
        let n = nmi(&a, &b).unwrap();
        assert!((n - mi / ((h_a + h_b) / 2.0)).abs() < 1e-12);
    }

    #[test]
    fn emi_matches_permutation_enumeration() {
        // Exact expectation by enumerating all 6! orderings of b.
        let a = [0usize, 0, 0, 1, 1, 2];
        let b = [0usize, 0, 1, 1, 1, 1];
        let mut perm: Vec<usize> = (0..6).collect();
        let mut sum = 0.0;
        let mut count = 0.0;
        permute(&mut perm, 0, &mut |p| {
            let pb: Vec<usize> = p.iter().map(|&i| b[i]).collect();
            sum += mutual_information(&a, &pb).unwrap();
            count += 1.0;
        });
        let t = ContingencyTable::new(&a, &b).unwrap();
        assert!((expected_mutual_information(&t) - sum / count).abs() < 1e-12);
    }

    fn permute(p: &mut Vec<usize>, k: usize, f: &mut impl FnMut(&[usize])) {
        if k == p.len() {
            f(p);
            return;
        }
        for i in k..p.len() {
            p.swap(k, i);
            permute(p, k + 1, f);
            p.swap(k, i);
        }
    }

    #[test]
    fn nmi_is_symmetric() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let a: Vec<usize> = (0..50).map(|_| rng.random_range(0..5)).collect();
            let b: Vec<usize> = (0..50).map(|_| rng.random_range(0..3)).collect();
            assert!((nmi(&a, &b).unwrap() - nmi(&b, &a).unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn large_inputs_stay_finite() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let a: Vec<usize> = (0..5000).map(|_| rng.random_range(0..10)).collect();
        let b: Vec<usize> = (0..5000).map(|_| rng.random_range(0..7)).collect();
        let v = ami(&a, &b).unwrap();
        assert!(v.is_finite() && v.abs() < 0.01);
    }

    fn labelings(max_n: usize) -> impl Strategy<Value = (Vec<usize>, Vec<usize>)> {
        (2..=max_n).prop_flat_map(|n| {
            (
                prop::collection::vec(0usize..4, n),
                prop::collection::vec(0usize..4, n),
            )
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn ari_matches_pair_enumeration((a, b) in labelings(12)) {
            let fast = adjusted_rand_index(&a, &b).unwrap();
            prop_assert!((fast - ari_by_pairs(&a, &b)).abs() < 1e-12);
        }

        #[test]
        fn scores_ignore_renaming((a, b) in labelings(30), shift in 1usize..10) {
            let renamed: Vec<usize> = b.iter().map(|l| (l + shift) * 7).collect();
            let before = Scores::compute(&a, &b).unwrap();
            let after = Scores::compute(&a, &renamed).unwrap();
            prop_assert!((before.ri - after.ri).abs() < 1e-12);
            prop_assert!((before.ari - after.ari).abs() < 1e-12);
            prop_assert!((before.ami - after.ami).abs() < 1e-12);
            prop_assert!((before.nmi - after.nmi).abs() < 1e-12);
        }

        #[test]
        fn ami_never_exceeds_nmi((a, b) in labelings(40)) {
            let t = ContingencyTable::new(&a, &b).unwrap();
            prop_assume!(expected_mutual_information(&t) >= 0.0);
            prop_assert!(ami(&a, &b).unwrap() <= nmi(&a, &b).unwrap() + 1e-12);
        }

        #[test]
        fn ari_is_one_only_for_equivalent_partitions((a, b) in labelings(20)) {
            let ari = adjusted_rand_index(&a, &b).unwrap();
            let equivalent = (0..a.len()).all(|i| (0..a.len()).all(|j| (a[i] == a[j]) == (b[i] == b[j])));
            prop_assert_eq!((ari - 1.0).abs() < 1e-12, equivalent);
        }
    }
}
