//! Synthesis of `f_n` and its normalised gradient on regular torus grids, and
//! grid averages of Hermite integrands.

use std::io::{Read, Write};
use std::path::Path;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::chaos::coefficients::hermite;
use crate::chaos::draw::{sample_draw, CoefficientDraw};
use crate::error::{Error, Result};
use crate::lattice::FrequencySet;
use crate::numeric::par_sum;

const DUMP_MAGIC: &[u8; 4] = b"ARWF";

/// Samples of `f_n` and `f_{n,k}` at the nodes `x = i/G`, row-major with the
/// last axis fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldGrid {
    pub d: usize,
    pub n: u64,
    pub g: usize,
    pub values: Vec<f64>,
    /// One array per axis; empty when synthesised without gradient.
    pub gradient: Vec<Vec<f64>>,
    /// Largest imaginary part discarded during synthesis.
    pub imag_residue: f64,
}

impl FieldGrid {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Flat index of the node with integer coordinates `idx` (taken mod `G`).
    #[inline]
    pub fn index(&self, idx: &[usize]) -> usize {
        idx.iter().fold(0, |acc, &i| acc * self.g + i % self.g)
    }

    pub fn has_gradient(&self) -> bool {
        self.gradient.len() == self.d
    }

    /// Grid average of `h(i)` over node indices, with a thread-independent order.
    pub fn average<F: Fn(usize) -> f64 + Sync>(&self, h: F) -> f64 {
        par_sum(self.len(), h) / self.len() as f64
    }
}

/// Smallest power of two strictly greater than `factor·√n`.
pub fn default_resolution(n: u64, factor: f64) -> usize {
    let bound = factor * (n as f64).sqrt();
    let mut g = 1usize;
    while (g as f64) <= bound {
        g *= 2;
    }
    g
}

fn check_resolution(set: &FrequencySet, g: usize, factor: f64) -> Result<()> {
    let required = factor * (set.n() as f64).sqrt();
    if (g as f64) <= required {
        return Err(Error::Resolution { grid: g, required });
    }
    Ok(())
}

/// Spectral amplitudes `c_λ` of the field and of each normalised derivative.
fn amplitudes(draw: &CoefficientDraw, with_gradient: bool) -> Vec<Vec<Complex64>> {
    let set = draw.set();
    let d = set.dim().value();
    let big_n = set.len() as f64;
    let a = draw.values();
    let mut out = vec![a.iter().map(|v| v / big_n.sqrt()).collect::<Vec<_>>()];
    if with_gradient {
        let c = (d as f64 / (set.n() as f64 * big_n)).sqrt();
        for k in 0..d {
            out.push(
                set.points()
                    .iter()
                    .zip(&a)
                    .map(|(p, v)| Complex64::new(0.0, c * p.coord(k) as f64) * v)
                    .collect(),
            );
        }
    }
    out
}

/// In-place unnormalised inverse DFT along every axis of a `G^d` cube.
fn inverse_fft_cube(data: &mut [Complex64], g: usize, d: usize) {
    let fft = FftPlanner::new().plan_fft_inverse(g);
    // last axis: contiguous rows
    data.par_chunks_mut(g).for_each(|row| fft.process(row));
    let total = data.len();
    for axis in 0..d - 1 {
        let stride = g.pow((d - 1 - axis) as u32);
        let block = stride * g;
        data.par_chunks_mut(block).for_each(|blk| {
            let mut line = vec![Complex64::default(); g];
            for off in 0..stride {
                for (t, v) in line.iter_mut().enumerate() {
                    *v = blk[t * stride + off];
                }
                fft.process(&mut line);
                for (t, v) in line.iter().enumerate() {
                    blk[t * stride + off] = *v;
                }
            }
        });
        debug_assert_eq!(total % block, 0);
    }
}

fn synthesize_with(draw: &CoefficientDraw, g: usize, with_gradient: bool) -> Result<FieldGrid> {
    let set = draw.set();
    check_resolution(set, g, 2.0)?;
    let d = set.dim().value();
    let size = g.pow(d as u32);
    let wrap = |x: i64| x.rem_euclid(g as i64) as usize;
    let mut arrays = Vec::new();
    let mut residue: f64 = 0.0;
    for amp in amplitudes(draw, with_gradient) {
        let mut cube = vec![Complex64::default(); size];
        for (p, c) in set.points().iter().zip(&amp) {
            let idx = (0..d).fold(0, |acc, k| acc * g + wrap(p.coord(k)));
            cube[idx] += c;
        }
        inverse_fft_cube(&mut cube, g, d);
        residue = residue.max(cube.iter().map(|z| z.im.abs()).fold(0.0, f64::max));
        arrays.push(cube.into_iter().map(|z| z.re).collect::<Vec<f64>>());
    }
    let values = arrays.remove(0);
    Ok(FieldGrid {
        d,
        n: set.n(),
        g,
        values,
        gradient: arrays,
        imag_residue: residue,
    })
}

/// `f_n` and `f_{n,k}` on the `G^d` grid by discrete Fourier synthesis.
/// Requires `G > 2√n`.
pub fn synthesize(draw: &CoefficientDraw, g: usize) -> Result<FieldGrid> {
    synthesize_with(draw, g, true)
}

/// As [`synthesize`], without the gradient arrays.
pub fn synthesize_values(draw: &CoefficientDraw, g: usize) -> Result<FieldGrid> {
    synthesize_with(draw, g, false)
}

/// Direct summation of the exponential sums at every node, with separable
/// per-axis phase tables. `O(G^d N)`; used as an oracle for [`synthesize`].
pub fn synthesize_direct(draw: &CoefficientDraw, g: usize) -> Result<FieldGrid> {
    let set = draw.set();
    check_resolution(set, g, 2.0)?;
    let d = set.dim().value();
    let size = g.pow(d as u32);
    let amps = amplitudes(draw, true);
    let phase = |m: i64, i: usize| {
        let t = (m * i as i64).rem_euclid(g as i64) as f64 / g as f64;
        Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * t)
    };
    let results: Vec<(Vec<f64>, f64)> = (0..size)
        .into_par_iter()
        .map(|flat| {
            let mut idx = vec![0usize; d];
            let mut r = flat;
            for k in (0..d).rev() {
                idx[k] = r % g;
                r /= g;
            }
            let mut acc = vec![Complex64::default(); d + 1];
            for (j, p) in set.points().iter().enumerate() {
                let e = (0..d).fold(Complex64::new(1.0, 0.0), |z, k| z * phase(p.coord(k), idx[k]));
                for (slot, amp) in acc.iter_mut().zip(&amps) {
                    *slot += amp[j] * e;
                }
            }
            let im = acc.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
            (acc.iter().map(|z| z.re).collect(), im)
        })
        .collect();
    let mut arrays = vec![vec![0.0; size]; d + 1];
    let mut residue: f64 = 0.0;
    for (flat, (vals, im)) in results.into_iter().enumerate() {
        for (arr, v) in arrays.iter_mut().zip(vals) {
            arr[flat] = v;
        }
        residue = residue.max(im);
    }
    let values = arrays.remove(0);
    Ok(FieldGrid {
        d,
        n: set.n(),
        g,
        values,
        gradient: arrays,
        imag_residue: residue,
    })
}

/// `f_n(x)` at an arbitrary point.
pub fn evaluate(draw: &CoefficientDraw, x: &[f64]) -> f64 {
    let set = draw.set();
    let scale = 1.0 / (set.len() as f64).sqrt();
    let h = set.half_len();
    // pairs (λ, -λ) contribute 2 Re(a_λ e(<λ,x>))
    draw.half_values()
        .iter()
        .enumerate()
        .map(|(k, a)| {
            let p = set.point(h + k);
            let t: f64 = x.iter().enumerate().map(|(j, xj)| p.coord(j) as f64 * xj).sum();
            2.0 * (a * Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * t)).re
        })
        .sum::<f64>()
        * scale
}

/// `(1/N) Σ cos(2π<λ, x - y>)`.
pub fn covariance(set: &FrequencySet, x: &[f64], y: &[f64]) -> f64 {
    set.points()
        .iter()
        .map(|p| {
            let t: f64 = (0..x.len()).map(|j| p.coord(j) as f64 * (x[j] - y[j])).sum();
            (2.0 * std::f64::consts::PI * t).cos()
        })
        .sum::<f64>()
        / set.len() as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CovarianceCheck {
    pub estimate: f64,
    pub theoretical: f64,
    pub discrepancy: f64,
}

/// Monte Carlo estimate of `E[f(x)f(y)]` over `m` draws with seeds
/// `seed, seed+1, …`, against the exact covariance.
pub fn covariance_check(
    set: &std::sync::Arc<FrequencySet>,
    m: usize,
    x: &[f64],
    y: &[f64],
    seed: u64,
) -> Result<CovarianceCheck> {
    if m < 1000 {
        return Err(Error::Statistics(format!("{m} draws; at least 1000 required")));
    }
    if x.len() != set.dim().value() || y.len() != x.len() {
        return Err(Error::Dimension(x.len()));
    }
    let products: Vec<f64> = (0..m as u64)
        .into_par_iter()
        .map(|r| {
            let d = sample_draw(set.clone(), seed.wrapping_add(r))?;
            Ok(evaluate(&d, x) * evaluate(&d, y))
        })
        .collect::<Result<_>>()?;
    let estimate = crate::numeric::tree_sum(&products) / m as f64;
    let theoretical = covariance(set, x, y);
    Ok(CovarianceCheck {
        estimate,
        theoretical,
        discrepancy: estimate - theoretical,
    })
}

/// Hermite integrands of the second- and fourth-order identities.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Integrand {
    /// `H2(f)`
    H2,
    /// `H2(f_k)`
    H2Deriv(usize),
    /// `H4(f)`
    H4,
    /// `H4(f_k)`
    H4Deriv(usize),
    /// `H2(f) H2(f_k)`
    H2H2Deriv(usize),
    /// `H2(f_j) H2(f_k)`
    H2DerivPair(usize, usize),
}

/// Grid average of an integrand; exact for these degree-4 band-limited
/// integrands when `G > 4√n`.
pub fn grid_integral(grid: &FieldGrid, integrand: Integrand) -> Result<f64> {
    let required = 4.0 * (grid.n as f64).sqrt();
    if (grid.g as f64) <= required {
        return Err(Error::Resolution {
            grid: grid.g,
            required,
        });
    }
    let f = &grid.values;
    let deriv = |k: usize| -> Result<&Vec<f64>> {
        if !grid.has_gradient() {
            return Err(Error::Dependency("grid has no gradient arrays".into()));
        }
        grid.gradient.get(k).ok_or(Error::Dimension(k))
    };
    let h2 = |x: f64| x * x - 1.0;
    let h4 = |x: f64| hermite(4, x);
    Ok(match integrand {
        Integrand::H2 => grid.average(|i| h2(f[i])),
        Integrand::H4 => grid.average(|i| h4(f[i])),
        Integrand::H2Deriv(k) => {
            let g = deriv(k)?;
            grid.average(|i| h2(g[i]))
        }
        Integrand::H4Deriv(k) => {
            let g = deriv(k)?;
            grid.average(|i| h4(g[i]))
        }
        Integrand::H2H2Deriv(k) => {
            let g = deriv(k)?;
            grid.average(|i| h2(f[i]) * h2(g[i]))
        }
        Integrand::H2DerivPair(j, k) => {
            let (a, b) = (deriv(j)?, deriv(k)?);
            grid.average(|i| h2(a[i]) * h2(b[i]))
        }
    })
}

/// Header of a binary field dump.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DumpHeader {
    pub d: u32,
    pub n: u64,
    pub g: u64,
    pub seed: u64,
}

/// Writes `ARWF`, then `d: u32, n: u64, G: u64, seed: u64` and the `G^d`
/// values as little-endian `f64`, row-major.
pub fn write_dump(path: &Path, grid: &FieldGrid, seed: u64) -> Result<()> {
    let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
    w.write_all(DUMP_MAGIC)?;
    w.write_all(&(grid.d as u32).to_le_bytes())?;
    w.write_all(&grid.n.to_le_bytes())?;
    w.write_all(&(grid.g as u64).to_le_bytes())?;
    w.write_all(&seed.to_le_bytes())?;
    for v in &grid.values {
        w.write_all(&v.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_dump(path: &Path) -> Result<(DumpHeader, Vec<f64>)> {
    let mut bytes = Vec::new();
    std::fs::File::open(path)?.read_to_end(&mut bytes)?;
    let bad = || Error::Io(format!("{}: not a field dump", path.display()));
    if bytes.len() < 32 || &bytes[..4] != DUMP_MAGIC {
        return Err(bad());
    }
    let u64_at = |o: usize| u64::from_le_bytes(bytes[o..o + 8].try_into().unwrap());
    let header = DumpHeader {
        d: u32::from_le_bytes(bytes[4..8].try_into().unwrap()),
        n: u64_at(8),
        g: u64_at(16),
        seed: u64_at(24),
    };
    let count = (header.g as usize).pow(header.d);
    if bytes.len() != 32 + 8 * count {
        return Err(bad());
    }
    let values = bytes[32..]
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Ok((header, values))
}
