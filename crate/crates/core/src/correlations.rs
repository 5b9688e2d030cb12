//! Four-correlations of a frequency set.
//!
//! `C_n(4)` is the set of ordered tuples `(λ_1, λ_2, λ_3, λ_4)` with zero sum,
//! `X_n(4)` the subset where no proper subset sums to zero. Every enumeration
//! here is a hash join on the pair sum `λ_1 + λ_2`.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{FrequencySet, LatticePoint};

/// Default largest `N_n` for which tuples are enumerated.
pub const DEFAULT_CAP: usize = 5000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationCensus {
    pub n: u64,
    pub d: usize,
    pub multiplicity: usize,
    pub total_c4: u64,
    /// Ordered tuples with `λ1=-λ2, λ3=-λ4`; `λ1=-λ3, λ2=-λ4`; `λ1=-λ4, λ2=-λ3`.
    pub pairing_counts: [u64; 3],
    /// Tuples lying in two pairing families at once.
    pub diagonal_counts: [u64; 3],
    pub nondegenerate_x4: u64,
    /// `log|X_n(4)| / log N_n`, when `|X_n(4)| > 0`.
    pub exponent_estimate: Option<f64>,
}

impl CorrelationCensus {
    /// `3N² - 3N + |X_n(4)|`.
    pub fn decomposition_total(&self) -> u64 {
        let n = self.multiplicity as u64;
        3 * n * n - 3 * n + self.nondegenerate_x4
    }
}

/// Ordered index pairs grouped by their vector sum.
#[derive(Debug, Clone)]
pub struct PairBuckets {
    sums: Vec<LatticePoint>,
    offsets: Vec<usize>,
    pairs: Vec<(u32, u32)>,
}

impl PairBuckets {
    /// Groups unordered pairs `i <= j` by `λ_i + λ_j`. Bucket sums are sorted,
    /// so the bucket holding `-v` is the mirror image of the one holding `v`.
    pub fn build(set: &FrequencySet) -> Self {
        let pts = set.points();
        let mut keyed: Vec<(LatticePoint, u32, u32)> = (0..pts.len())
            .into_par_iter()
            .flat_map_iter(|i| (i..pts.len()).map(move |j| (pts[i].add(&pts[j]), i as u32, j as u32)))
            .collect();
        keyed.par_sort_unstable();
        let mut sums = Vec::new();
        let mut offsets = vec![0];
        let mut pairs = Vec::with_capacity(keyed.len());
        for (s, i, j) in keyed {
            if sums.last() != Some(&s) {
                if !sums.is_empty() {
                    offsets.push(pairs.len());
                }
                sums.push(s);
            }
            pairs.push((i, j));
        }
        offsets.push(pairs.len());
        PairBuckets {
            sums,
            offsets,
            pairs,
        }
    }

    pub fn len(&self) -> usize {
        self.sums.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sums.is_empty()
    }

    pub fn sum(&self, b: usize) -> LatticePoint {
        self.sums[b]
    }

    #[inline]
    pub fn mirror(&self, b: usize) -> usize {
        self.sums.len() - 1 - b
    }

    /// Unordered pairs `(i, j)`, `i <= j`, in bucket `b`.
    #[inline]
    pub fn bucket(&self, b: usize) -> &[(u32, u32)] {
        &self.pairs[self.offsets[b]..self.offsets[b + 1]]
    }

    /// Number of ordered pairs in bucket `b`.
    pub fn ordered_count(&self, b: usize) -> u64 {
        self.bucket(b)
            .iter()
            .map(|&(i, j)| if i == j { 1 } else { 2 })
            .sum()
    }
}

fn check_cap(set: &FrequencySet, cap: usize) -> Result<()> {
    if set.is_empty() {
        return Err(Error::Domain(format!("Λ_{} is empty", set.n())));
    }
    if set.len() > cap {
        return Err(Error::Size {
            size: set.len(),
            cap,
        });
    }
    Ok(())
}

/// True if some proper nonempty subset of the zero-sum tuple sums to zero.
pub fn is_degenerate(t: &[LatticePoint; 4]) -> bool {
    (1u8..15).any(|mask| {
        let mut s = LatticePoint([0, 0, 0]);
        for (i, p) in t.iter().enumerate() {
            if mask & (1 << i) != 0 {
                s = s.add(p);
            }
        }
        s.is_zero()
    })
}

fn ordered(bucket: &[(u32, u32)]) -> impl Iterator<Item = (u32, u32)> + '_ {
    bucket.iter().flat_map(|&(i, j)| {
        let swapped = (i != j).then_some((j, i));
        std::iter::once((i, j)).chain(swapped)
    })
}

/// Visits every non-degenerate ordered tuple, bucket by bucket.
fn collect_x4(set: &FrequencySet, buckets: &PairBuckets) -> Vec<Vec<[u32; 4]>> {
    let pts = set.points();
    (0..buckets.len())
        .into_par_iter()
        .map(|b| {
            let mut out = Vec::new();
            let mirror = buckets.bucket(buckets.mirror(b));
            for (i, j) in ordered(buckets.bucket(b)) {
                for (k, l) in ordered(mirror) {
                    let t = [pts[i as usize], pts[j as usize], pts[k as usize], pts[l as usize]];
                    if !is_degenerate(&t) {
                        out.push([i, j, k, l]);
                    }
                }
            }
            out
        })
        .collect()
}

/// Exact census of `C_n(4)` and `X_n(4)`. Refuses sets with `N_n > cap`.
pub fn census_4(set: &FrequencySet, cap: usize) -> Result<CorrelationCensus> {
    check_cap(set, cap)?;
    let buckets = PairBuckets::build(set);
    let pts = set.points();
    let (total_c4, nondegenerate_x4) = (0..buckets.len())
        .into_par_iter()
        .map(|b| {
            let mirror = buckets.bucket(buckets.mirror(b));
            let total = buckets.ordered_count(b) * buckets.ordered_count(buckets.mirror(b));
            let mut x4 = 0u64;
            for (i, j) in ordered(buckets.bucket(b)) {
                for (k, l) in ordered(mirror) {
                    let t = [pts[i as usize], pts[j as usize], pts[k as usize], pts[l as usize]];
                    if !is_degenerate(&t) {
                        x4 += 1;
                    }
                }
            }
            (total, x4)
        })
        .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1));
    let n = set.len() as u64;
    let exponent_estimate =
        (nondegenerate_x4 > 0 && n > 1).then(|| (nondegenerate_x4 as f64).ln() / (n as f64).ln());
    Ok(CorrelationCensus {
        n: set.n(),
        d: set.dim().value(),
        multiplicity: set.len(),
        total_c4,
        pairing_counts: [n * n; 3],
        diagonal_counts: [n; 3],
        nondegenerate_x4,
        exponent_estimate,
    })
}

/// Non-degenerate ordered 4-correlations as point indices. Fails with a size
/// error if `N_n > cap` or if more than `max_tuples` tuples exist.
pub fn enumerate_x4(set: &FrequencySet, cap: usize, max_tuples: usize) -> Result<Vec<[u32; 4]>> {
    check_cap(set, cap)?;
    let buckets = PairBuckets::build(set);
    let chunks = collect_x4(set, &buckets);
    let total: usize = chunks.iter().map(Vec::len).sum();
    if total > max_tuples {
        return Err(Error::Size {
            size: total,
            cap: max_tuples,
        });
    }
    Ok(chunks.into_iter().flatten().collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct X4ScalingRow {
    pub n: u64,
    pub multiplicity: usize,
    pub x4: u64,
    pub exponent_estimate: Option<f64>,
}

/// `|X_n(4)|` and `log|X_n(4)|/log N_n` over a list of admissible `n` (`d = 3`).
pub fn x4_scaling(ns: &[u64], cap: usize) -> Result<Vec<X4ScalingRow>> {
    let mut cache: HashMap<u64, X4ScalingRow> = HashMap::new();
    ns.iter()
        .map(|&n| {
            if let Some(row) = cache.get(&n) {
                return Ok(row.clone());
            }
            if !crate::lattice::is_admissible(n) {
                return Err(Error::Domain(format!("n = {n} is not admissible")));
            }
            let set = crate::lattice::enumerate_frequencies(n, crate::lattice::Dim::Three)?;
            if set.len() < 2 {
                return Err(Error::Domain(format!("N_{n} < 2")));
            }
            let c = census_4(&set, cap)?;
            let row = X4ScalingRow {
                n,
                multiplicity: c.multiplicity,
                x4: c.nondegenerate_x4,
                exponent_estimate: c.exponent_estimate,
            };
            cache.insert(n, row.clone());
            Ok(row)
        })
        .collect()
}
