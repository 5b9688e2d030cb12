//! Second- and fourth-order chaotic projections of the nodal volume.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use crate::chaos::draw::CoefficientDraw;
use crate::chaos::statistics::{x4_sums_from_tuples, ChaosStatistics, DegenerateParts};
use crate::numeric::par_sum;

/// The torus integrals entering the fourth chaos:
/// `∫H4(f)`, `Σ_k ∫H2(f)H2(f_k)`, `Σ_k ∫H4(f_k)` and `Σ_{j≠k} ∫H2(f_j)H2(f_k)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct H4Integrals {
    pub h4: f64,
    pub h2_h2k: f64,
    pub h4k: f64,
    pub h2j_h2k: f64,
}

/// The torus integrals entering the second chaos: `∫H2(f)` and `Σ_k ∫H2(f_k)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct H2Integrals {
    pub h2: f64,
    pub h2k: f64,
}

/// `√(nπ/d) Γ((d+1)/2)`, the common prefactor of every projection.
fn prefactor(n: u64, d: usize) -> f64 {
    let df = d as f64;
    (n as f64 * PI / df).sqrt() * gamma((df + 1.0) / 2.0)
}

/// Second-order integrals evaluated algebraically from the draw: the first as
/// `(1/N)Σ(|a|²-1)`, the second axis by axis as `Σ_k (d/(nN))Σ λ_k²(|a|²-1)`.
pub fn h2_integral_identities(draw: &CoefficientDraw) -> H2Integrals {
    let set = draw.set();
    let d = set.dim().value();
    let big_n = set.len() as f64;
    let n = set.n() as f64;
    let pts = set.points();
    let h2 = par_sum(set.len(), |i| draw.value(i).norm_sqr() - 1.0) / big_n;
    let h2k = (0..d)
        .map(|k| {
            par_sum(set.len(), |i| {
                (pts[i].coord(k).pow(2)) as f64 * (draw.value(i).norm_sqr() - 1.0)
            }) * d as f64
                / (n * big_n)
        })
        .sum();
    H2Integrals { h2, h2k }
}

/// Second-order projection from its two integrals.
pub fn second_chaos_from_integrals(n: u64, d: usize, h: &H2Integrals) -> f64 {
    let df = d as f64;
    prefactor(n, d) * (-h.h2 / gamma(df / 2.0) + 0.5 * h.h2k / gamma((df + 2.0) / 2.0))
}

/// `V_n[2]`. The two terms cancel identically.
pub fn second_chaos(draw: &CoefficientDraw) -> f64 {
    let set = draw.set();
    second_chaos_from_integrals(set.n(), set.dim().value(), &h2_integral_identities(draw))
}

/// The four fourth-order integrals expressed through `W, R, X` statistics.
pub fn h4_integral_identities(stats: &ChaosStatistics) -> H4Integrals {
    let d = stats.d;
    let df = d as f64;
    let big_n = stats.multiplicity as f64;
    let w2 = stats.w * stats.w;
    let h4 = (3.0 * w2 - 3.0 * stats.r + stats.x.re) / big_n;
    let h2_h2k = df * (w2 - stats.r - stats.sum_xkk()) / big_n;
    let h4k = (0..d)
        .map(|k| {
            3.0 * df * df * stats.wjk[k][k].powi(2) - 3.0 * df * df * stats.rjk[k][k]
                + df * df * stats.xkkjj[k][k].re
        })
        .sum::<f64>()
        / big_n;
    let mut off = df * df * w2;
    for k in 0..d {
        off -= df * df * stats.wjk[k][k].powi(2);
        for j in 0..d {
            if j != k {
                off += 2.0 * df * df * stats.wjk[j][k].powi(2) - 3.0 * df * df * stats.rjk[k][j]
                    + df * df * stats.xkkjj[k][j].re;
            }
        }
    }
    H4Integrals {
        h4,
        h2_h2k,
        h4k,
        h2j_h2k: off / big_n,
    }
}

/// Fourth-order projection from its four integrals (Hermite-coefficient form).
pub fn fourth_chaos_from_integrals(n: u64, d: usize, h: &H4Integrals) -> f64 {
    let df = d as f64;
    let g0 = gamma(df / 2.0);
    let g2 = gamma((df + 2.0) / 2.0);
    let g4 = gamma((df + 4.0) / 2.0);
    prefactor(n, d)
        * (h.h4 / (4.0 * g0) - h.h2_h2k / (4.0 * g2) - h.h4k / (16.0 * g4)
            - 0.5 * h.h2j_h2k / (8.0 * g4))
}

/// `V_n[4]` in closed form, including the `R` and `X` terms.
pub fn fourth_chaos(stats: &ChaosStatistics) -> f64 {
    let df = stats.d as f64;
    let big_n = stats.multiplicity as f64;
    let bracket = 2.0 / (df + 2.0) * stats.w * stats.w - 2.0 * df / (df + 2.0) * stats.sum_w_sq()
        - stats.r
        + 3.0 * df / (df + 2.0) * stats.sum_r()
        + stats.x.re
        + 2.0 * stats.sum_xkk()
        - df / (df + 2.0) * stats.sum_xkkjj();
    prefactor(stats.n, stats.d) / (4.0 * big_n * gamma(df / 2.0)) * bracket
}

/// The `d = 3` rewrite with prefactor `√n / (5√3 N)`.
pub fn fourth_chaos_d3(stats: &ChaosStatistics) -> f64 {
    let big_n = stats.multiplicity as f64;
    let bracket = stats.w * stats.w - 3.0 * stats.sum_w_sq() - 2.5 * stats.r
        + 4.5 * stats.sum_r()
        + 2.5 * stats.x.re
        + 5.0 * stats.sum_xkk()
        - 1.5 * stats.sum_xkkjj();
    (stats.n as f64).sqrt() / (5.0 * 3f64.sqrt() * big_n) * bracket
}

/// The leading form with the `R` terms replaced by their limits and the `X`
/// terms dropped: `4 + W² - 3ΣW²` for `d = 3`, `2 + W² - 2ΣW²` for `d = 2`.
/// Diagnostic only.
pub fn fourth_chaos_leading(stats: &ChaosStatistics) -> f64 {
    let n = stats.n as f64;
    let big_n = stats.multiplicity as f64;
    match stats.d {
        2 => PI * (n / 512.0).sqrt() / big_n * (2.0 + stats.w * stats.w - 2.0 * stats.sum_w_sq()),
        _ => n.sqrt() / (5.0 * 3f64.sqrt() * big_n) * (4.0 + stats.w * stats.w - 3.0 * stats.sum_w_sq()),
    }
}

/// `-(5/2) r + (9/2)(Σ_k r_kk + Σ_{k≠j} r_kj)` with `r_kk = axis`, `r_kj = cross`.
pub fn r_bracket_d3(r: f64, axis: f64, cross: f64) -> f64 {
    -2.5 * r + 4.5 * (3.0 * axis + 6.0 * cross)
}

/// Right-hand sides of the inclusion–exclusion identities for sums over
/// `C_n(4)`: pairing terms, minus diagonal terms, plus the sum over `X_n(4)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationSums {
    /// `Σ_C a1a2a3a4`
    pub plain: f64,
    /// `Σ_C λ_{1,k}λ_{2,k} a1a2a3a4`, per `k`
    pub kk: Vec<f64>,
    /// `Σ_C λ_{1,k}λ_{2,k}λ_{3,j}λ_{4,j} a1a2a3a4`, per `(k, j)`
    pub kkjj: Vec<Vec<f64>>,
}

/// Decomposition side of the `C_n(4)` identities, with the `X_n(4)` part
/// summed over the given tuples. For `k ≠ j` the `kkjj` pairing term is
/// `Σλ_k²|a|² Σλ_j²|a|² + 2[Σλ_jλ_k(|a|²-1)]²`.
pub fn correlation_sum_decomposition(draw: &CoefficientDraw, x4: &[[u32; 4]]) -> CorrelationSums {
    let deg = DegenerateParts::of(draw);
    let xs = x4_sums_from_tuples(draw, x4);
    let d = xs.kk.len();
    CorrelationSums {
        plain: deg.plain() + xs.plain.re,
        kk: (0..d).map(|k| deg.kk(k) + xs.kk[k].re).collect(),
        kkjj: (0..d)
            .map(|k| (0..d).map(|j| deg.kkjj(k, j) + xs.kkjj[k][j].re).collect())
            .collect(),
    }
}
