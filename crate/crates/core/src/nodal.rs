//! Geometric estimators of the nodal volume: the `ε`-band functional and
//! piecewise-linear zero-set extraction (tetrahedra for `d = 3`, marching
//! squares for `d = 2`).

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use crate::error::{Error, Result};
use crate::field::FieldGrid;
use crate::numeric::{par_sum, tree_sum};

/// Added to grid values that are exactly zero before extraction.
pub const ZERO_SHIFT: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodalMethod {
    EpsilonBand,
    Isosurface,
    Isocontour,
}

impl NodalMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            NodalMethod::EpsilonBand => "band",
            NodalMethod::Isosurface => "surface",
            NodalMethod::Isocontour => "contour",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NodalEstimate {
    pub n: u64,
    pub d: usize,
    pub method: NodalMethod,
    /// Area for `d = 3`, length for `d = 2`.
    pub value: f64,
    pub epsilon: Option<f64>,
    pub g: usize,
}

/// `I_d = √(4π/d) Γ((d+1)/2)/Γ(d/2)`.
pub fn nodal_constant(d: usize) -> f64 {
    let df = d as f64;
    (4.0 * PI / df).sqrt() * gamma((df + 1.0) / 2.0) / gamma(df / 2.0)
}

/// `E[V_n] = I_d √n`.
pub fn expected_nodal_volume(n: u64, d: usize) -> f64 {
    nodal_constant(d) * (n as f64).sqrt()
}

/// `6 d √E_n` with `E_n = 4π² n`: a deterministic bound on every `ε`-band value.
pub fn band_bound(n: u64, d: usize) -> f64 {
    6.0 * d as f64 * 2.0 * PI * (n as f64).sqrt()
}

/// `(1/2ε)` times the grid average of `1{|f| <= ε} ‖∇f‖`, with
/// `‖∇f‖ = 2π√(n/d) ‖(f_{n,1}, …, f_{n,d})‖`.
pub fn epsilon_band(grid: &FieldGrid, epsilon: f64) -> Result<NodalEstimate> {
    if !(epsilon > 0.0) {
        return Err(Error::Domain(format!("ε = {epsilon} must be positive")));
    }
    if !grid.has_gradient() {
        return Err(Error::Dependency("ε-band needs the gradient arrays".into()));
    }
    let scale = 2.0 * PI * (grid.n as f64 / grid.d as f64).sqrt();
    let mean = grid.average(|i| {
        if grid.values[i].abs() <= epsilon {
            grid.gradient.iter().map(|g| g[i] * g[i]).sum::<f64>().sqrt()
        } else {
            0.0
        }
    });
    Ok(NodalEstimate {
        n: grid.n,
        d: grid.d,
        method: NodalMethod::EpsilonBand,
        value: scale * mean / (2.0 * epsilon),
        epsilon: Some(epsilon),
        g: grid.g,
    })
}

#[inline]
fn shifted(v: f64) -> f64 {
    if v == 0.0 {
        ZERO_SHIFT
    } else {
        v
    }
}

/// Kuhn decomposition of the unit cube: one tetrahedron per axis permutation,
/// each running from corner 0 to corner 7 along the main diagonal. Corners are
/// encoded as bit masks `x | y<<1 | z<<2`.
const TETRAHEDRA: [[usize; 4]; 6] = [
    [0, 1, 3, 7],
    [0, 1, 5, 7],
    [0, 2, 3, 7],
    [0, 2, 6, 7],
    [0, 4, 5, 7],
    [0, 4, 6, 7],
];

fn corner(mask: usize) -> [f64; 3] {
    [(mask & 1) as f64, ((mask >> 1) & 1) as f64, ((mask >> 2) & 1) as f64]
}

fn crossing(p: [f64; 3], q: [f64; 3], fp: f64, fq: f64) -> [f64; 3] {
    let t = fp / (fp - fq);
    [p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1]), p[2] + t * (q[2] - p[2])]
}

fn triangle_area(a: [f64; 3], b: [f64; 3], c: [f64; 3]) -> f64 {
    let u = [b[0] - a[0], b[1] - a[1], b[2] - a[2]];
    let v = [c[0] - a[0], c[1] - a[1], c[2] - a[2]];
    let w = [u[1] * v[2] - u[2] * v[1], u[2] * v[0] - u[0] * v[2], u[0] * v[1] - u[1] * v[0]];
    0.5 * (w[0] * w[0] + w[1] * w[1] + w[2] * w[2]).sqrt()
}

/// Area of the zero set of the linear interpolant on one tetrahedron, in
/// cell units.
fn tetra_area(p: [[f64; 3]; 4], f: [f64; 4]) -> f64 {
    let neg: Vec<usize> = (0..4).filter(|&i| f[i] < 0.0).collect();
    let pos: Vec<usize> = (0..4).filter(|&i| f[i] >= 0.0).collect();
    let cut = |i: usize, j: usize| crossing(p[i], p[j], f[i], f[j]);
    match (neg.len(), pos.len()) {
        (1, 3) => triangle_area(cut(neg[0], pos[0]), cut(neg[0], pos[1]), cut(neg[0], pos[2])),
        (3, 1) => triangle_area(cut(pos[0], neg[0]), cut(pos[0], neg[1]), cut(pos[0], neg[2])),
        (2, 2) => {
            let (a, b, c, e) = (neg[0], neg[1], pos[0], pos[1]);
            // the quadrilateral a-c, a-e, b-e, b-c is planar and convex
            let q = [cut(a, c), cut(a, e), cut(b, e), cut(b, c)];
            triangle_area(q[0], q[1], q[2]) + triangle_area(q[0], q[2], q[3])
        }
        _ => 0.0,
    }
}

/// Area of the zero isosurface of the piecewise-linear interpolant on the
/// periodic grid. Requires `d = 3`.
pub fn isosurface_area(grid: &FieldGrid) -> Result<NodalEstimate> {
    if grid.d != 3 {
        return Err(Error::Dimension(grid.d));
    }
    let g = grid.g;
    let corners: [[f64; 3]; 8] = std::array::from_fn(corner);
    let slabs: Vec<f64> = (0..g)
        .into_par_iter()
        .map(|i| {
            let mut rows = Vec::with_capacity(g);
            for j in 0..g {
                let mut acc = 0.0;
                for k in 0..g {
                    let vals: [f64; 8] = std::array::from_fn(|m| {
                        let idx = [i + (m & 1), j + ((m >> 1) & 1), k + ((m >> 2) & 1)];
                        shifted(grid.values[grid.index(&idx)])
                    });
                    let lo = vals.iter().cloned().fold(f64::INFINITY, f64::min);
                    let hi = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                    if lo >= 0.0 || hi < 0.0 {
                        continue;
                    }
                    for t in &TETRAHEDRA {
                        acc += tetra_area(t.map(|m| corners[m]), t.map(|m| vals[m]));
                    }
                }
                rows.push(acc);
            }
            tree_sum(&rows)
        })
        .collect();
    let cell = 1.0 / g as f64;
    Ok(NodalEstimate {
        n: grid.n,
        d: 3,
        method: NodalMethod::Isosurface,
        value: tree_sum(&slabs) * cell * cell,
        epsilon: None,
        g,
    })
}

/// Length of the zero contour by marching squares on the periodic grid,
/// resolving saddle cells by the sign of the cell-centre average.
/// Requires `d = 2`.
pub fn isocontour_length(grid: &FieldGrid) -> Result<NodalEstimate> {
    if grid.d != 2 {
        return Err(Error::Dimension(grid.d));
    }
    let g = grid.g;
    let total = par_sum(g * g, |c| {
        let (i, j) = (c / g, c % g);
        let v = |di: usize, dj: usize| shifted(grid.values[grid.index(&[i + di, j + dj])]);
        // counter-clockwise corners
        let f = [v(0, 0), v(1, 0), v(1, 1), v(0, 1)];
        let p = [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]];
        let cut = |e: usize| {
            let (a, b) = (e, (e + 1) % 4);
            let t = f[a] / (f[a] - f[b]);
            [p[a][0] + t * (p[b][0] - p[a][0]), p[a][1] + t * (p[b][1] - p[a][1])]
        };
        let len = |x: [f64; 2], y: [f64; 2]| ((x[0] - y[0]).powi(2) + (x[1] - y[1]).powi(2)).sqrt();
        let edges: Vec<usize> = (0..4).filter(|&e| (f[e] < 0.0) != (f[(e + 1) % 4] < 0.0)).collect();
        match edges.len() {
            2 => len(cut(edges[0]), cut(edges[1])),
            4 => {
                let centre = f.iter().sum::<f64>() / 4.0;
                if (centre < 0.0) == (f[0] < 0.0) {
                    // corners 1 and 3 are isolated
                    len(cut(0), cut(1)) + len(cut(2), cut(3))
                } else {
                    len(cut(3), cut(0)) + len(cut(1), cut(2))
                }
            }
            _ => 0.0,
        }
    });
    Ok(NodalEstimate {
        n: grid.n,
        d: 2,
        method: NodalMethod::Isocontour,
        value: total / g as f64,
        epsilon: None,
        g,
    })
}

/// Zero set extracted geometrically: area for `d = 3`, length for `d = 2`.
pub fn nodal_volume(grid: &FieldGrid) -> Result<NodalEstimate> {
    match grid.d {
        3 => isosurface_area(grid),
        2 => isocontour_length(grid),
        d => Err(Error::Dimension(d)),
    }
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use num_complex::Complex64;

    use super::*;
    use crate::chaos::draw::{sample_draw, CoefficientDraw};
    use crate::field::{synthesize, synthesize_values};
    use crate::lattice::{enumerate_frequencies, Dim};

    fn single_cosine(dim: Dim) -> CoefficientDraw {
        let s = Arc::new(enumerate_frequencies(1, dim).unwrap());
        let half = s
            .half_set()
            .iter()
            .map(|p| Complex64::new(if p.coord(0) == 1 { 1.0 } else { 0.0 }, 0.0))
            .collect();
        CoefficientDraw::new(s, half).unwrap()
    }

    #[test]
    fn constants() {
        assert!((nodal_constant(3) - 4.0 / 3f64.sqrt()).abs() < 1e-14);
        assert!((nodal_constant(2) - PI / 2f64.sqrt()).abs() < 1e-14);
        assert!((expected_nodal_volume(14, 3) - 8.6409).abs() < 1e-4);
    }

    #[test]
    fn planes_and_lines() {
        let grid = synthesize(&single_cosine(Dim::Three), 64).unwrap();
        let area = isosurface_area(&grid).unwrap().value;
        assert!((area - 2.0).abs() < 0.02, "{area}");
        // the zero planes sit on grid nodes; the band holds one node per plane
        let band = epsilon_band(&grid, 0.05).unwrap().value;
        assert!(band <= band_bound(1, 3));
        let grid2 = synthesize(&single_cosine(Dim::Two), 64).unwrap();
        let len = isocontour_length(&grid2).unwrap().value;
        assert!((len - 2.0).abs() < 0.02, "{len}");
    }

    #[test]
    fn band_is_unbiased_under_random_shifts() {
        use rand::{Rng, SeedableRng};
        let d = single_cosine(Dim::Two);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let m = 4000;
        let mean = (0..m)
            .map(|_| {
                let x0 = [rng.random::<f64>(), rng.random::<f64>()];
                let grid = synthesize(&d.translated(&x0), 64).unwrap();
                epsilon_band(&grid, 0.05).unwrap().value
            })
            .sum::<f64>()
            / m as f64;
        assert!((mean - 2.0).abs() < 0.05, "{mean}");
    }

    #[test]
    fn dimension_and_domain_errors() {
        let g2 = synthesize_values(&single_cosine(Dim::Two), 8).unwrap();
        let g3 = synthesize(&single_cosine(Dim::Three), 8).unwrap();
        assert!(matches!(isosurface_area(&g2), Err(Error::Dimension(2))));
        assert!(matches!(isocontour_length(&g3), Err(Error::Dimension(3))));
        assert!(matches!(epsilon_band(&g3, 0.0), Err(Error::Domain(_))));
        assert!(matches!(epsilon_band(&g2, 0.1), Err(Error::Dependency(_))));
    }

    #[test]
    fn band_and_surface_agree_on_random_draws() {
        let s = Arc::new(enumerate_frequencies(14, Dim::Three).unwrap());
        for seed in 0..3 {
            let grid = synthesize(&sample_draw(s.clone(), seed).unwrap(), 64).unwrap();
            let a = isosurface_area(&grid).unwrap().value;
            let b = epsilon_band(&grid, 0.05).unwrap().value;
            assert!((a - b).abs() < 0.05 * a, "{a} {b}");
            assert!(b <= band_bound(14, 3));
        }
    }

    #[test]
    fn axis_permutation_invariance() {
        let s = Arc::new(enumerate_frequencies(6, Dim::Three).unwrap());
        let d = sample_draw(s.clone(), 2).unwrap();
        // permute the coordinates of every λ: (x, y, z) -> (y, z, x)
        let half: Vec<Complex64> = s
            .half_set()
            .iter()
            .map(|p| {
                let q = crate::lattice::LatticePoint::new3(p.0[2], p.0[0], p.0[1]);
                let i = s.index_of(&q).unwrap();
                d.value(i)
            })
            .collect();
        let permuted = CoefficientDraw::new(s, half).unwrap();
        let a = isosurface_area(&synthesize_values(&d, 32).unwrap()).unwrap().value;
        let b = isosurface_area(&synthesize_values(&permuted, 32).unwrap()).unwrap().value;
        assert!((a - b).abs() < 0.005 * a, "{a} {b}");
    }
}
