//! Lattice points on spheres: the frequency sets of toral Laplace eigenspaces.
//!
//! A frequency set holds every `λ ∈ Z^d` with `|λ|² = n`, sorted
//! lexicographically. Negation reverses lexicographic order, so the antipode
//! of the point at index `i` sits at index `N - 1 - i` and the upper half of
//! the list is a canonical set of representatives modulo `±`.

use std::fmt;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest eigenvalue index accepted by the enumerator.
pub const MAX_N: u64 = 1 << 62;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Dim {
    Two,
    Three,
}

impl Dim {
    pub fn value(self) -> usize {
        match self {
            Dim::Two => 2,
            Dim::Three => 3,
        }
    }

    pub fn as_f64(self) -> f64 {
        self.value() as f64
    }
}

impl TryFrom<usize> for Dim {
    type Error = Error;

    fn try_from(d: usize) -> Result<Self> {
        match d {
            2 => Ok(Dim::Two),
            3 => Ok(Dim::Three),
            other => Err(Error::Dimension(other)),
        }
    }
}

impl fmt::Display for Dim {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value())
    }
}

/// A lattice point. Coordinates beyond the set's dimension are zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct LatticePoint(pub [i64; 3]);

impl LatticePoint {
    pub fn new2(x: i64, y: i64) -> Self {
        LatticePoint([x, y, 0])
    }

    pub fn new3(x: i64, y: i64, z: i64) -> Self {
        LatticePoint([x, y, z])
    }

    #[inline]
    pub fn coord(&self, k: usize) -> i64 {
        self.0[k]
    }

    pub fn coords(&self, dim: Dim) -> &[i64] {
        &self.0[..dim.value()]
    }

    pub fn norm_sq(&self) -> i64 {
        self.0.iter().map(|c| c * c).sum()
    }

    pub fn neg(&self) -> Self {
        LatticePoint([-self.0[0], -self.0[1], -self.0[2]])
    }

    pub fn add(&self, other: &Self) -> Self {
        LatticePoint([
            self.0[0] + other.0[0],
            self.0[1] + other.0[1],
            self.0[2] + other.0[2],
        ])
    }

    pub fn is_zero(&self) -> bool {
        self.0 == [0, 0, 0]
    }
}

/// The frequency set `Λ_n` of the eigenvalue `4π²n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrequencySet {
    n: u64,
    dim: Dim,
    points: Vec<LatticePoint>,
}

impl FrequencySet {
    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn dim(&self) -> Dim {
        self.dim
    }

    pub fn points(&self) -> &[LatticePoint] {
        &self.points
    }

    /// The multiplicity `N_n`.
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn point(&self, i: usize) -> LatticePoint {
        self.points[i]
    }

    /// Index of `-λ_i`.
    #[inline]
    pub fn antipode(&self, i: usize) -> usize {
        self.points.len() - 1 - i
    }

    /// Number of antipodal pairs, `N_n / 2`.
    pub fn half_len(&self) -> usize {
        self.points.len() / 2
    }

    /// Point index of the `h`-th representative of `Λ_n/±`.
    #[inline]
    pub fn half_index(&self, h: usize) -> usize {
        self.half_len() + h
    }

    /// Representatives of `Λ_n/±`: the lexicographically larger point of
    /// each antipodal pair, in ascending order.
    pub fn half_set(&self) -> &[LatticePoint] {
        &self.points[self.half_len()..]
    }

    /// Index of a point, if it lies in the set.
    pub fn index_of(&self, p: &LatticePoint) -> Option<usize> {
        self.points.binary_search(p).ok()
    }

    /// Exact `Σ_λ Π_k λ_k^{e_k}`.
    pub fn monomial_sum(&self, exponents: &[u32]) -> i128 {
        let d = self.dim.value();
        self.points
            .iter()
            .map(|p| {
                (0..d)
                    .map(|k| (p.coord(k) as i128).pow(exponents.get(k).copied().unwrap_or(0)))
                    .product::<i128>()
            })
            .sum()
    }
}

/// Enumerates `Λ_n` in lexicographic order.
pub fn enumerate_frequencies(n: u64, dim: Dim) -> Result<FrequencySet> {
    if n == 0 {
        return Err(Error::Domain("n must be positive".into()));
    }
    if n > MAX_N {
        return Err(Error::Range(format!("n = {n} exceeds {MAX_N}")));
    }
    let r = n.isqrt() as i64;
    let n_i = n as i64;
    let mut points: Vec<LatticePoint> = match dim {
        Dim::Two => (-r..=r)
            .flat_map(|x| {
                last_coords(n_i - x * x)
                    .into_iter()
                    .map(move |y| LatticePoint::new2(x, y))
            })
            .collect(),
        Dim::Three => (-r..=r)
            .into_par_iter()
            .map(|x| {
                let rest = n_i - x * x;
                let ry = (rest as u64).isqrt() as i64;
                let mut out = Vec::new();
                for y in -ry..=ry {
                    for z in last_coords(rest - y * y) {
                        out.push(LatticePoint::new3(x, y, z));
                    }
                }
                out
            })
            .collect::<Vec<_>>()
            .into_iter()
            .flatten()
            .collect(),
    };
    points.sort_unstable();
    Ok(FrequencySet { n, dim, points })
}

/// Values `z` with `z² = rest`, ascending.
fn last_coords(rest: i64) -> Vec<i64> {
    if rest < 0 {
        return Vec::new();
    }
    let z = (rest as u64).isqrt() as i64;
    if z * z != rest {
        Vec::new()
    } else if z == 0 {
        vec![0]
    } else {
        vec![-z, z]
    }
}

/// `N_n` for `d = 2` from the prime factorisation of `n`.
pub fn multiplicity_by_factorization(n: u64) -> Result<u64> {
    if n == 0 {
        return Err(Error::Domain("n must be positive".into()));
    }
    let mut m = n;
    while m % 2 == 0 {
        m /= 2;
    }
    let mut count: u64 = 4;
    let mut p = 3u64;
    while p * p <= m {
        if m % p == 0 {
            let mut e = 0u64;
            while m % p == 0 {
                m /= p;
                e += 1;
            }
            if p % 4 == 1 {
                count *= e + 1;
            } else if e % 2 == 1 {
                return Ok(0);
            }
        }
        p += 2;
    }
    if m > 1 {
        if m % 4 == 1 {
            count *= 2;
        } else {
            return Ok(0);
        }
    }
    Ok(count)
}

/// `n ≢ 0, 4, 7 (mod 8)`: the condition for primitive points on the 2-sphere.
pub fn is_admissible(n: u64) -> bool {
    !matches!(n % 8, 0 | 4 | 7)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentReport {
    /// `Σ λ_j λ_k`, exact.
    pub quadratic: Vec<Vec<i128>>,
    /// `Σ λ_k⁴ / (n² N)` per axis.
    pub quartic_axis: Vec<f64>,
    /// `Σ λ_j² λ_k² / (n² N)` for `j < k`.
    pub quartic_cross: Vec<((usize, usize), f64)>,
    /// `μ̂_n(4) = (1/N) Σ (λ_1 + iλ_2)⁴ / n²`, only for `d = 2`.
    pub fourier4: Option<Complex64>,
}

pub fn moment_report(set: &FrequencySet) -> Result<MomentReport> {
    if set.is_empty() {
        return Err(Error::Domain(format!("Λ_{} is empty", set.n())));
    }
    let d = set.dim().value();
    let big_n = set.len() as f64;
    let n2 = (set.n() as f64).powi(2);
    let mut quadratic = vec![vec![0i128; d]; d];
    for p in set.points() {
        for j in 0..d {
            for k in 0..d {
                quadratic[j][k] += p.coord(j) as i128 * p.coord(k) as i128;
            }
        }
    }
    let quartic_axis = (0..d)
        .map(|k| {
            let mut e = [0u32; 3];
            e[k] = 4;
            set.monomial_sum(&e) as f64 / (n2 * big_n)
        })
        .collect();
    let mut quartic_cross = Vec::new();
    for j in 0..d {
        for k in j + 1..d {
            let mut e = [0u32; 3];
            e[j] = 2;
            e[k] = 2;
            quartic_cross.push(((j, k), set.monomial_sum(&e) as f64 / (n2 * big_n)));
        }
    }
    let fourier4 = (set.dim() == Dim::Two).then(|| {
        // (x + iy)⁴ = x⁴ - 6x²y² + y⁴ + i(4x³y - 4xy³); accumulate exactly
        let (mut re, mut im) = (0i128, 0i128);
        for p in set.points() {
            let (x, y) = (p.coord(0) as i128, p.coord(1) as i128);
            re += x.pow(4) - 6 * x * x * y * y + y.pow(4);
            im += 4 * x.pow(3) * y - 4 * x * y.pow(3);
        }
        Complex64::new(re as f64, im as f64) / (big_n * n2)
    });
    Ok(MomentReport {
        quadratic,
        quartic_axis,
        quartic_cross,
        fourier4,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquidistributionRow {
    pub n: u64,
    pub multiplicity: usize,
    /// `max_k |Σλ_k⁴/(n²N) - 1/5|`
    pub axis_deviation: f64,
    /// `max_{j<k} |Σλ_j²λ_k²/(n²N) - 1/15|`
    pub cross_deviation: f64,
}

/// Deviation of the quartic lattice moments on the 2-sphere from their
/// uniform-measure values `1/5` and `1/15`.
pub fn equidistribution_trend(ns: &[u64]) -> Result<Vec<EquidistributionRow>> {
    ns.iter()
        .map(|&n| {
            if !is_admissible(n) {
                return Err(Error::Domain(format!("n = {n} is not admissible")));
            }
            let set = enumerate_frequencies(n, Dim::Three)?;
            let m = moment_report(&set)?;
            let axis_deviation = m
                .quartic_axis
                .iter()
                .map(|v| (v - 0.2).abs())
                .fold(0.0, f64::max);
            let cross_deviation = m
                .quartic_cross
                .iter()
                .map(|(_, v)| (v - 1.0 / 15.0).abs())
                .fold(0.0, f64::max);
            Ok(EquidistributionRow {
                n,
                multiplicity: set.len(),
                axis_deviation,
                cross_deviation,
            })
        })
        .collect()
}
