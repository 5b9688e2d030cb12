//! The statistics `W, W_{jk}, R, R_{jk}, X, X_{kk}, X_{kkjj}` of one draw.
//!
//! The `X`-type sums run over the ordered non-degenerate 4-correlations. Two
//! routes compute them: summing an explicit tuple list, or summing over all of
//! `C_n(4)` with the pair-sum buckets and subtracting the degenerate part
//! (the pairing and diagonal families) in closed form.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chaos::draw::CoefficientDraw;
use crate::correlations::PairBuckets;
use crate::error::{Error, Result};
use crate::lattice::Dim;
use crate::numeric::par_sum;

/// Where the non-degenerate correlation sums come from.
#[derive(Debug, Clone, Copy)]
pub enum X4Source<'a> {
    /// Explicit ordered tuples of point indices.
    Tuples(&'a [[u32; 4]]),
    /// Complement of the degenerate families within `C_n(4)`.
    Buckets(&'a PairBuckets),
    /// `X_n(4)` is known to be empty. Only accepted for `d = 2`.
    Empty,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChaosStatistics {
    pub n: u64,
    pub d: usize,
    pub multiplicity: usize,
    pub w: f64,
    pub wjk: Vec<Vec<f64>>,
    pub r: f64,
    pub rjk: Vec<Vec<f64>>,
    pub x: Complex64,
    pub xkk: Vec<Complex64>,
    pub xkkjj: Vec<Vec<Complex64>>,
}

impl ChaosStatistics {
    pub fn sum_w_sq(&self) -> f64 {
        self.wjk.iter().flatten().map(|v| v * v).sum()
    }

    pub fn sum_r(&self) -> f64 {
        self.rjk.iter().flatten().sum()
    }

    pub fn sum_xkk(&self) -> f64 {
        self.xkk.iter().map(|z| z.re).sum()
    }

    pub fn sum_xkkjj(&self) -> f64 {
        self.xkkjj.iter().flatten().map(|z| z.re).sum()
    }

    /// `(W11, W12, W13, W22, W23, W33)` for `d = 3`.
    pub fn w_vector(&self) -> Vec<f64> {
        let d = self.d;
        let mut out = Vec::with_capacity(d * (d + 1) / 2);
        for j in 0..d {
            for k in j..d {
                out.push(self.wjk[j][k]);
            }
        }
        out
    }

    /// Largest imaginary part among the `X`-type values, relative to their scale.
    pub fn max_imaginary(&self) -> f64 {
        let all: Vec<Complex64> = std::iter::once(self.x)
            .chain(self.xkk.iter().copied())
            .chain(self.xkkjj.iter().flatten().copied())
            .collect();
        let scale = all.iter().map(|z| z.norm()).fold(1.0, f64::max);
        all.iter().map(|z| z.im.abs()).fold(0.0, f64::max) / scale
    }
}

/// Raw (unnormalised) sums over `X_n(4)`.
#[derive(Debug, Clone, PartialEq)]
pub struct X4Sums {
    pub plain: Complex64,
    /// `Σ λ_{1,k} λ_{2,k} a1 a2 a3 a4`
    pub kk: Vec<Complex64>,
    /// `Σ λ_{1,k} λ_{2,k} λ_{3,j} λ_{4,j} a1 a2 a3 a4`
    pub kkjj: Vec<Vec<Complex64>>,
}

impl X4Sums {
    fn zero(d: usize) -> Self {
        X4Sums {
            plain: Complex64::default(),
            kk: vec![Complex64::default(); d],
            kkjj: vec![vec![Complex64::default(); d]; d],
        }
    }
}

/// Sums over the listed tuples.
pub fn x4_sums_from_tuples(draw: &CoefficientDraw, tuples: &[[u32; 4]]) -> X4Sums {
    let set = draw.set();
    let d = set.dim().value();
    let a = draw.values();
    // coordinates as f64, padded to three axes
    let xyz: Vec<[f64; 3]> = set
        .points()
        .iter()
        .map(|p| [p.0[0] as f64, p.0[1] as f64, p.0[2] as f64])
        .collect();
    // slot 0: plain, 1..4: kk, 4..13: kkjj (row-major k, j)
    let chunk_sum = |chunk: &[[u32; 4]]| {
        let mut acc = [Complex64::default(); 13];
        for t in chunk {
            let [i0, i1, i2, i3] = t.map(|i| i as usize);
            let prod = a[i0] * a[i1] * a[i2] * a[i3];
            let (p0, p1, p2, p3) = (&xyz[i0], &xyz[i1], &xyz[i2], &xyz[i3]);
            acc[0] += prod;
            for k in 0..d {
                let wk = p0[k] * p1[k];
                acc[1 + k] += prod * wk;
                for j in 0..d {
                    acc[4 + 3 * k + j] += prod * (wk * p2[j] * p3[j]);
                }
            }
        }
        acc
    };
    let parts: Vec<[Complex64; 13]> = tuples
        .par_chunks(crate::numeric::CHUNK)
        .map(chunk_sum)
        .collect();
    let total = crate::numeric::tree_sum_by(&parts, |x, y| std::array::from_fn(|s| x[s] + y[s]))
        .unwrap_or([Complex64::default(); 13]);
    let mut out = X4Sums::zero(d);
    out.plain = total[0];
    for k in 0..d {
        out.kk[k] = total[1 + k];
        for j in 0..d {
            out.kkjj[k][j] = total[4 + 3 * k + j];
        }
    }
    out
}

/// Closed-form sums of a draw that make up the degenerate part of `C_n(4)`.
#[derive(Debug, Clone)]
pub(crate) struct DegenerateParts {
    /// `Σ |a|²`
    pub s: f64,
    /// `Σ |a|⁴`
    pub t: f64,
    /// `Σ λ_k |a|²`
    pub lin: Vec<f64>,
    /// `Σ λ_j λ_k |a|²`
    pub b: Vec<Vec<f64>>,
    /// `Σ λ_k² |a|⁴`
    pub tk: Vec<f64>,
    /// `Σ λ_j² λ_k² |a|⁴`
    pub tjk: Vec<Vec<f64>>,
}

impl DegenerateParts {
    pub fn of(draw: &CoefficientDraw) -> Self {
        let set = draw.set();
        let d = set.dim().value();
        let a2: Vec<f64> = (0..set.len()).map(|i| draw.value(i).norm_sqr()).collect();
        let pts = set.points();
        let sum = |f: &(dyn Fn(usize) -> f64 + Sync)| par_sum(pts.len(), f);
        let s = sum(&|i| a2[i]);
        let t = sum(&|i| a2[i] * a2[i]);
        let lin = (0..d).map(|k| sum(&|i| pts[i].coord(k) as f64 * a2[i])).collect();
        let mut b = vec![vec![0.0; d]; d];
        let mut tjk = vec![vec![0.0; d]; d];
        for j in 0..d {
            for k in 0..d {
                b[j][k] = sum(&|i| (pts[i].coord(j) * pts[i].coord(k)) as f64 * a2[i]);
                tjk[j][k] = sum(&|i| {
                    let (x, y) = (pts[i].coord(j), pts[i].coord(k));
                    (x * x * y * y) as f64 * a2[i] * a2[i]
                });
            }
        }
        let tk = (0..d).map(|k| sum(&|i| (pts[i].coord(k).pow(2)) as f64 * a2[i] * a2[i])).collect();
        DegenerateParts {
            s,
            t,
            lin,
            b,
            tk,
            tjk,
        }
    }

    /// Degenerate part of `Σ_C a1a2a3a4`.
    pub fn plain(&self) -> f64 {
        3.0 * self.s * self.s - 3.0 * self.t
    }

    /// Degenerate part of `Σ_C λ_{1,k} λ_{2,k} a1a2a3a4`.
    pub fn kk(&self, k: usize) -> f64 {
        -self.b[k][k] * self.s + 2.0 * self.lin[k] * self.lin[k] + self.tk[k]
    }

    /// Degenerate part of `Σ_C λ_{1,k} λ_{2,k} λ_{3,j} λ_{4,j} a1a2a3a4`.
    pub fn kkjj(&self, k: usize, j: usize) -> f64 {
        self.b[k][k] * self.b[j][j] + 2.0 * self.b[j][k] * self.b[j][k] - 3.0 * self.tjk[k][j]
    }
}

/// Sums over all of `C_n(4)`, evaluated bucket by bucket.
pub fn c4_sums_from_buckets(draw: &CoefficientDraw, buckets: &PairBuckets) -> X4Sums {
    let set = draw.set();
    let d = set.dim().value();
    let a = draw.values();
    let pts = set.points();
    // P(v) = Σ_{λ_i+λ_j=v} a_i a_j and P_k(v) = Σ λ_{i,k} λ_{j,k} a_i a_j over ordered pairs
    let per_bucket: Vec<[Complex64; 4]> = (0..buckets.len())
        .into_par_iter()
        .map(|b| {
            let mut acc = [Complex64::default(); 4];
            for &(i, j) in buckets.bucket(b) {
                let w = if i == j { 1.0 } else { 2.0 };
                let prod = a[i as usize] * a[j as usize] * w;
                acc[0] += prod;
                for k in 0..d {
                    acc[k + 1] += prod * (pts[i as usize].coord(k) * pts[j as usize].coord(k)) as f64;
                }
            }
            acc
        })
        .collect();
    let nb = buckets.len();
    let term = |f: &(dyn Fn(usize, usize) -> Complex64 + Sync)| par_sum(nb, |b| f(b, buckets.mirror(b)));
    let mut out = X4Sums::zero(d);
    out.plain = term(&|b, m| per_bucket[b][0] * per_bucket[m][0]);
    for k in 0..d {
        out.kk[k] = term(&|b, m| per_bucket[b][k + 1] * per_bucket[m][0]);
        for j in 0..d {
            out.kkjj[k][j] = term(&|b, m| per_bucket[b][k + 1] * per_bucket[m][j + 1]);
        }
    }
    out
}

/// Sums over `X_n(4)` as the complement of the degenerate families in `C_n(4)`.
pub fn x4_sums_from_buckets(draw: &CoefficientDraw, buckets: &PairBuckets) -> X4Sums {
    let mut c4 = c4_sums_from_buckets(draw, buckets);
    let deg = DegenerateParts::of(draw);
    let d = c4.kk.len();
    c4.plain -= deg.plain();
    for k in 0..d {
        c4.kk[k] -= deg.kk(k);
        for j in 0..d {
            c4.kkjj[k][j] -= deg.kkjj(k, j);
        }
    }
    c4
}

/// `W, R` and `X`-type statistics of a draw.
pub fn chaos_statistics(draw: &CoefficientDraw, source: X4Source<'_>) -> Result<ChaosStatistics> {
    let set = draw.set();
    let d = set.dim().value();
    let big_n = set.len() as f64;
    let n = set.n() as f64;
    let pts = set.points();
    let a2: Vec<f64> = (0..set.len()).map(|i| draw.value(i).norm_sqr()).collect();

    let w = par_sum(pts.len(), |i| a2[i] - 1.0) / big_n.sqrt();
    let r = par_sum(pts.len(), |i| a2[i] * a2[i]) / big_n;
    let mut wjk = vec![vec![0.0; d]; d];
    let mut rjk = vec![vec![0.0; d]; d];
    for j in 0..d {
        for k in j..d {
            let cjk = |i: usize| (pts[i].coord(j) * pts[i].coord(k)) as f64;
            let wv = par_sum(pts.len(), |i| cjk(i) * (a2[i] - 1.0)) / (n * big_n.sqrt());
            let rv = par_sum(pts.len(), |i| cjk(i) * cjk(i) * a2[i] * a2[i]) / (n * n * big_n);
            wjk[j][k] = wv;
            wjk[k][j] = wv;
            rjk[j][k] = rv;
            rjk[k][j] = rv;
        }
    }

    let sums = match source {
        X4Source::Tuples(t) => x4_sums_from_tuples(draw, t),
        X4Source::Buckets(b) => x4_sums_from_buckets(draw, b),
        X4Source::Empty if set.dim() == Dim::Two => X4Sums::zero(d),
        X4Source::Empty => {
            return Err(Error::Dependency(
                "non-degenerate correlations are required for d = 3".into(),
            ))
        }
    };
    let x = sums.plain / big_n;
    let xkk = sums.kk.iter().map(|z| z / (n * big_n)).collect();
    let xkkjj = sums
        .kkjj
        .iter()
        .map(|row| row.iter().map(|z| z / (n * n * big_n)).collect())
        .collect();

    Ok(ChaosStatistics {
        n: set.n(),
        d,
        multiplicity: set.len(),
        w,
        wjk,
        r,
        rjk,
        x,
        xkk,
        xkkjj,
    })
}

/// Exact `E[|X(n)|²] = 24 |X_n(4)| / N²`: by Wick's formula the only
/// contributing pairings match the two tuples up to a permutation.
pub fn x_second_moment(x4_count: u64, multiplicity: usize) -> f64 {
    24.0 * x4_count as f64 / (multiplicity as f64).powi(2)
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::chaos::draw::sample_draw;
    use crate::correlations::{enumerate_x4, DEFAULT_CAP};
    use crate::lattice::{enumerate_frequencies, FrequencySet};

    fn set(n: u64, dim: Dim) -> Arc<FrequencySet> {
        Arc::new(enumerate_frequencies(n, dim).unwrap())
    }

    #[test]
    fn unit_draw() {
        let s = set(5, Dim::Three);
        let d = CoefficientDraw::unit(s).unwrap();
        let st = chaos_statistics(&d, X4Source::Empty);
        assert!(matches!(st, Err(Error::Dependency(_))));
        let b = PairBuckets::build(d.set());
        let st = chaos_statistics(&d, X4Source::Buckets(&b)).unwrap();
        assert_eq!(st.w, 0.0);
        assert!(st.wjk.iter().flatten().all(|&v| v == 0.0));
        assert!((st.r - 1.0).abs() < 1e-15);
    }

    #[test]
    fn single_axis_excitation() {
        let s = set(1, Dim::Three);
        let mut half = vec![Complex64::new(1.0, 0.0); 3];
        // half set is (0,0,1), (0,1,0), (1,0,0)
        let i = s.half_set().iter().position(|p| p.0 == [1, 0, 0]).unwrap();
        half[i] = Complex64::new(2f64.sqrt(), 0.0);
        let d = CoefficientDraw::new(s.clone(), half).unwrap();
        let st = chaos_statistics(&d, X4Source::Tuples(&[])).unwrap();
        let e = 2.0 / 6f64.sqrt();
        assert!((st.w - e).abs() < 1e-15);
        assert!((st.wjk[0][0] - e).abs() < 1e-15);
        assert_eq!(st.wjk[1][1], 0.0);
        assert_eq!(st.wjk[2][2], 0.0);
    }

    #[test]
    fn routes_agree_and_values_are_real() {
        for n in [2u64, 3, 5, 6, 9, 14] {
            let s = set(n, Dim::Three);
            let tuples = enumerate_x4(&s, DEFAULT_CAP, usize::MAX).unwrap();
            let b = PairBuckets::build(&s);
            for seed in 0..3 {
                let d = sample_draw(s.clone(), seed).unwrap();
                let a = chaos_statistics(&d, X4Source::Tuples(&tuples)).unwrap();
                let c = chaos_statistics(&d, X4Source::Buckets(&b)).unwrap();
                let scale = 1.0 + a.x.norm();
                assert!((a.x - c.x).norm() < 1e-9 * scale, "n={n}");
                for k in 0..3 {
                    assert!((a.xkk[k] - c.xkk[k]).norm() < 1e-9 * scale);
                    for j in 0..3 {
                        assert!((a.xkkjj[k][j] - c.xkkjj[k][j]).norm() < 1e-9 * scale);
                    }
                }
                assert!(a.max_imaginary() < 1e-9);
                assert!(c.max_imaginary() < 1e-9);
                let trace: f64 = (0..3).map(|k| a.wjk[k][k]).sum();
                assert!((a.w - trace).abs() < 1e-12 * (1.0 + a.w.abs()));
            }
        }
    }

    #[test]
    fn n1_has_no_x_terms() {
        let s = set(1, Dim::Three);
        let b = PairBuckets::build(&s);
        let d = sample_draw(s, 11).unwrap();
        let st = chaos_statistics(&d, X4Source::Buckets(&b)).unwrap();
        assert!(st.x.norm() < 1e-13);
    }

    #[test]
    fn d2_complement_is_zero() {
        let s = set(65, Dim::Two);
        let b = PairBuckets::build(&s);
        let d = sample_draw(s, 5).unwrap();
        let x = x4_sums_from_buckets(&d, &b);
        assert!(x.plain.norm() < 1e-9 * d.set().len() as f64);
    }
}
