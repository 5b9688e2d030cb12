//! Hermite polynomials and the coefficients of the chaos expansion of the
//! nodal volume: `β_{2k}` for the Dirac mass at zero and `a(2s)` for the
//! Euclidean norm of a standard Gaussian vector.

use std::f64::consts::{PI, SQRT_2};

use statrs::function::gamma::gamma;

use crate::error::{Error, Result};

/// Default cap on the number of series terms for `a(2s)`.
pub const SERIES_MAX_TERMS: usize = 200;

/// Probabilists' Hermite polynomial `H_k(x)`, via
/// `H_{k+1}(x) = x H_k(x) - k H_{k-1}(x)`. Intended for `k <= 64`.
pub fn hermite(k: usize, x: f64) -> f64 {
    let (mut h0, mut h1) = (1.0, x);
    if k == 0 {
        return h0;
    }
    for j in 1..k {
        let h2 = x * h1 - j as f64 * h0;
        h0 = h1;
        h1 = h2;
    }
    h1
}

/// `β_k = H_k(0)/√(2π)`; odd orders vanish and are rejected.
pub fn beta_coefficient(k: usize) -> Result<f64> {
    if k % 2 == 1 {
        return Err(Error::Domain(format!("β_{k}: order must be even")));
    }
    Ok(hermite(k, 0.0) / (2.0 * PI).sqrt())
}

/// `Γ((d+1)/2) / Γ(d/2 + m)`.
fn gamma_ratio(d: usize, m: usize) -> f64 {
    gamma((d as f64 + 1.0) / 2.0) / gamma(d as f64 / 2.0 + m as f64)
}

/// Closed forms of `a(2s)` for `|s| <= 2`. Returns `None` for higher orders.
pub fn a_coefficient_closed(s: &[u32]) -> Option<f64> {
    let d = s.len();
    let total: u32 = s.iter().sum();
    let nonzero: Vec<u32> = s.iter().copied().filter(|&v| v > 0).collect();
    match (total, nonzero.as_slice()) {
        (0, _) => Some(SQRT_2 * gamma_ratio(d, 0)),
        (1, _) => Some(gamma_ratio(d, 1) / (2.0 * SQRT_2)),
        (2, [2]) => Some(-gamma_ratio(d, 2) / (16.0 * SQRT_2)),
        (2, [1, 1]) => Some(-gamma_ratio(d, 2) / (8.0 * SQRT_2)),
        _ => None,
    }
}

/// `a(2s)` from its series in `i`. The inner multinomial sum restricts
/// `j_m <= s_m`, so only `i <= |s|` contributes; `max_terms` bounds that range.
pub fn a_coefficient_series(s: &[u32], max_terms: usize) -> Result<f64> {
    let d = s.len();
    let total: u32 = s.iter().sum();
    if total as usize + 1 > max_terms {
        return Err(Error::Convergence(max_terms));
    }
    let half_d = d as f64 / 2.0;
    // Γ(d/2 + i + 1/2) / Γ(d/2 + i), advanced by the recurrence Γ(x+1) = xΓ(x).
    let mut ratio = gamma(half_d + 0.5) / gamma(half_d);
    let mut sum = 0.0;
    let mut i_fact = 1.0;
    let mut pow2 = 1.0;
    for i in 0..=total {
        if i > 0 {
            let x = i as f64;
            ratio *= (half_d + x - 0.5) / (half_d + x - 1.0);
            i_fact *= x;
            pow2 *= 2.0;
        }
        let gamma_i = SQRT_2 * ratio / (i_fact * pow2);
        let inner = compositions(s, i)
            .into_iter()
            .map(|j| {
                let multinomial = factorial(i) / j.iter().map(|&v| factorial(v)).product::<f64>();
                let rest: u32 = s.iter().zip(&j).map(|(sv, jv)| sv - jv).sum();
                let denom: f64 = s
                    .iter()
                    .zip(&j)
                    .map(|(sv, jv)| factorial(sv - jv))
                    .product::<f64>()
                    * 2f64.powi(rest as i32);
                let sign = if rest % 2 == 0 { 1.0 } else { -1.0 };
                multinomial * sign / denom
            })
            .sum::<f64>();
        sum += gamma_i * inner;
    }
    Ok(sum)
}

/// `a(2s)`: closed forms where available, otherwise the series.
pub fn a_coefficient(s: &[u32]) -> Result<f64> {
    if s.is_empty() {
        return Err(Error::Domain("empty multi-index".into()));
    }
    match a_coefficient_closed(s) {
        Some(v) => Ok(v),
        None => a_coefficient_series(s, SERIES_MAX_TERMS),
    }
}

/// All `j` with `Σ j = total` and `0 <= j_m <= s_m`.
fn compositions(s: &[u32], total: u32) -> Vec<Vec<u32>> {
    fn rec(s: &[u32], left: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if s.is_empty() {
            if left == 0 {
                out.push(cur.clone());
            }
            return;
        }
        for v in 0..=s[0].min(left) {
            cur.push(v);
            rec(&s[1..], left - v, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(s, total, &mut Vec::new(), &mut out);
    out
}

fn factorial(k: u32) -> f64 {
    (1..=k).map(f64::from).product()
}

/// Multi-indices `s ∈ N^d` with `|s| = p`.
pub fn multi_indices(d: usize, p: u32) -> Vec<Vec<u32>> {
    compositions(&vec![p; d], p)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hermite_values() {
        assert_eq!(hermite(2, 0.0), -1.0);
        assert_eq!(hermite(4, 0.0), 3.0);
        assert_eq!(hermite(3, 2.0), 2.0);
        assert_eq!(hermite(0, 5.0), 1.0);
        assert_eq!(hermite(1, 5.0), 5.0);
        // H_6(0) = -15, H_8(0) = 105: (-1)^k (2k-1)!!
        assert_eq!(hermite(6, 0.0), -15.0);
        assert_eq!(hermite(8, 0.0), 105.0);
    }

    #[test]
    fn beta_values() {
        let c = 1.0 / (2.0 * PI).sqrt();
        assert!((beta_coefficient(0).unwrap() - 0.3989422804014327).abs() < 1e-15);
        assert!((beta_coefficient(2).unwrap() + c).abs() < 1e-15);
        assert!((beta_coefficient(4).unwrap() - 3.0 * c).abs() < 1e-15);
        assert!((beta_coefficient(6).unwrap() + 15.0 * c).abs() < 1e-14);
        assert!(matches!(beta_coefficient(3), Err(Error::Domain(_))));
    }

    #[test]
    fn a_closed_form_values() {
        let a0 = a_coefficient(&[0, 0, 0]).unwrap();
        assert!((a0 - 2.0 * SQRT_2 / PI.sqrt()).abs() < 1e-14);
        assert!((a0 - 1.5957691216057308).abs() < 1e-14);
        // Γ(2)/Γ(5/2)/(2√2) = 4/(6√(2π))
        let a2 = a_coefficient(&[1, 0, 0]).unwrap();
        assert!((a2 - 1.0 / (1.5 * (2.0 * PI).sqrt())).abs() < 1e-14);
        let a11 = a_coefficient(&[1, 1]).unwrap();
        assert!((a11 + gamma(1.5) / gamma(3.0) / (8.0 * SQRT_2)).abs() < 1e-15);
    }

    #[test]
    fn series_agrees_with_closed_forms() {
        for d in 2..=4 {
            for p in 0..=2 {
                for s in multi_indices(d, p) {
                    let closed = a_coefficient_closed(&s).unwrap();
                    let series = a_coefficient_series(&s, SERIES_MAX_TERMS).unwrap();
                    assert!((closed - series).abs() < 1e-12, "d={d} s={s:?}");
                }
            }
        }
    }

    #[test]
    fn series_guard() {
        assert!(matches!(
            a_coefficient_series(&[3, 3], 4),
            Err(Error::Convergence(4))
        ));
    }
}
