//! Limiting covariance of the `W_{jk}` and the limit laws of the normalised
//! nodal volume.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use statrs::function::erf::erf;
use statrs::function::gamma::gamma_lr;

use crate::error::{Error, Result};
use crate::lattice::{is_admissible, FrequencySet};
use crate::quadrature::integrate;

/// Upper-triangle index pairs in the order `(11, 12, 13, 22, 23, 33)`.
pub const W_ORDER: [(usize, usize); 6] = [(0, 0), (0, 1), (0, 2), (1, 1), (1, 2), (2, 2)];

/// Limiting covariance of `(W11, W12, W13, W22, W23, W33)` as `N_n → ∞`.
pub fn covariance_matrix_limit() -> [[f64; 6]; 6] {
    let mut m = [[0.0; 6]; 6];
    for (a, &(k, l)) in W_ORDER.iter().enumerate() {
        for (b, &(j, i)) in W_ORDER.iter().enumerate() {
            // (2/n²N)Σλ_kλ_lλ_jλ_i with the equidistributed limits 1/5, 1/15
            let mut c = [0usize; 3];
            for x in [k, l, j, i] {
                c[x] += 1;
            }
            m[a][b] = if c.iter().any(|v| v % 2 == 1) {
                0.0
            } else if c.contains(&4) {
                2.0 / 5.0
            } else {
                2.0 / 15.0
            };
        }
    }
    m
}

/// Exact covariance at finite `n`: `E[W_kl W_ji] = (2/(n²N)) Σ λ_kλ_lλ_jλ_i`.
/// Requires `d = 3`.
pub fn covariance_matrix_exact(set: &FrequencySet) -> Result<[[f64; 6]; 6]> {
    if set.dim().value() != 3 {
        return Err(Error::Dimension(set.dim().value()));
    }
    if set.is_empty() {
        return Err(Error::Domain(format!("Λ_{} is empty", set.n())));
    }
    let n = set.n() as f64;
    let big_n = set.len() as f64;
    let mut m = [[0.0; 6]; 6];
    for (a, &(k, l)) in W_ORDER.iter().enumerate() {
        for (b, &(j, i)) in W_ORDER.iter().enumerate() {
            let mut e = [0u32; 3];
            for x in [k, l, j, i] {
                e[x] += 1;
            }
            m[a][b] = 2.0 * set.monomial_sum(&e) as f64 / (n * n * big_n);
        }
    }
    Ok(m)
}

/// Summary moments of a distribution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Moments {
    pub mean: f64,
    pub variance: f64,
    pub skewness: f64,
}

/// The law of `(5 - χ²₅)/√10`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct LimitLaw;

impl LimitLaw {
    pub fn cdf(&self, t: f64) -> f64 {
        let y = 5.0 - 10f64.sqrt() * t;
        if y <= 0.0 {
            1.0
        } else {
            1.0 - gamma_lr(2.5, y / 2.0)
        }
    }

    pub fn moments(&self) -> Moments {
        Moments {
            mean: 0.0,
            variance: 1.0,
            skewness: -(8.0f64 / 5.0).sqrt(),
        }
    }

    /// `m` samples, each from five squared standard normals.
    pub fn sample(&self, seed: u64, m: usize) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..m)
            .map(|_| {
                let chi: f64 = (0..5)
                    .map(|_| {
                        let z: f64 = StandardNormal.sample(&mut rng);
                        z * z
                    })
                    .sum();
                (5.0 - chi) / 10f64.sqrt()
            })
            .collect()
    }
}

/// The law of `[2 - (1+η)X₁² - (1-η)X₂²] / (2√(1+η²))` for `η ∈ [0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct D2LimitLaw {
    eta: f64,
}

impl D2LimitLaw {
    pub fn new(eta: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&eta) {
            return Err(Error::Range(format!("η = {eta} outside [0, 1]")));
        }
        Ok(D2LimitLaw { eta })
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    fn scale(&self) -> f64 {
        2.0 * (1.0 + self.eta * self.eta).sqrt()
    }

    /// `P((1+η)X₁² + (1-η)X₂² <= y)`.
    fn quadratic_form_cdf(&self, y: f64) -> f64 {
        if y <= 0.0 {
            return 0.0;
        }
        let (p, q) = (1.0 + self.eta, 1.0 - self.eta);
        if q <= 0.0 {
            return erf((y / p / 2.0).sqrt());
        }
        // x₁ = r sin θ over the ellipse's x₁-range; the inner X₂-probability is an erf
        let r = (y / p).sqrt();
        let inner = |theta: f64| {
            let (s, c) = theta.sin_cos();
            let x1 = r * s;
            let phi = (-0.5 * x1 * x1).exp() / (2.0 * std::f64::consts::PI).sqrt();
            phi * erf((y * c * c / (2.0 * q)).sqrt()) * r * c
        };
        let half_pi = std::f64::consts::FRAC_PI_2;
        integrate(inner, -half_pi, half_pi, 16, 20).clamp(0.0, 1.0)
    }

    pub fn cdf(&self, t: f64) -> f64 {
        1.0 - self.quadratic_form_cdf(2.0 - self.scale() * t)
    }

    pub fn moments(&self) -> Moments {
        let (p, q) = (1.0 + self.eta, 1.0 - self.eta);
        let s = self.scale();
        // cumulants of -(pX₁² + qX₂²): variance 2(p²+q²), third -8(p³+q³)
        let var = 2.0 * (p * p + q * q) / (s * s);
        let k3 = -8.0 * (p.powi(3) + q.powi(3)) / s.powi(3);
        Moments {
            mean: 0.0,
            variance: var,
            skewness: k3 / var.powf(1.5),
        }
    }

    pub fn sample(&self, seed: u64, m: usize) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = self.scale();
        (0..m)
            .map(|_| {
                let x1: f64 = StandardNormal.sample(&mut rng);
                let x2: f64 = StandardNormal.sample(&mut rng);
                (2.0 - (1.0 + self.eta) * x1 * x1 - (1.0 - self.eta) * x2 * x2) / s
            })
            .collect()
    }
}

/// `(32/375) n / N²`, the leading variance of the nodal area for `d = 3`.
pub fn theoretical_variance(n: u64, multiplicity: usize) -> Result<f64> {
    const_assert_variance_constant();
    if !is_admissible(n) {
        return Err(Error::Domain(format!("n = {n} is not admissible")));
    }
    if multiplicity == 0 {
        return Err(Error::Domain(format!("Λ_{n} is empty")));
    }
    Ok(32.0 / 375.0 * n as f64 / (multiplicity as f64).powi(2))
}

fn const_assert_variance_constant() {
    // 2⁵/(5³·3) = 32/375
    const _: () = assert!(2u64.pow(5) * 375 == 32 * 5u64.pow(3) * 3);
}

/// `(1 + μ̂_n(4)²)/512`, the `d = 2` variance constant with `Var(L_n) ~ c_n E_n / N²`.
pub fn planar_variance_constant(mu4: f64) -> f64 {
    (1.0 + mu4 * mu4) / 512.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{enumerate_frequencies, Dim};

    #[test]
    fn limit_matrix_pattern() {
        let m = covariance_matrix_limit();
        assert_eq!(m[0][0], 2.0 / 5.0);
        assert_eq!(m[1][1], 2.0 / 15.0);
        assert_eq!(m[0][3], 2.0 / 15.0);
        assert_eq!(m[3][5], 2.0 / 15.0);
        assert_eq!(m[1][2], 0.0);
        assert_eq!(m[0][1], 0.0);
        for a in 0..6 {
            for b in 0..6 {
                assert_eq!(m[a][b], m[b][a]);
            }
        }
    }

    #[test]
    fn exact_matrix_at_n1() {
        // Λ_1: Σλ_1⁴ = 2, Σλ_1²λ_2² = 0, N = 6
        let s = enumerate_frequencies(1, Dim::Three).unwrap();
        let m = covariance_matrix_exact(&s).unwrap();
        assert!((m[0][0] - 2.0 * 2.0 / 6.0).abs() < 1e-15);
        assert_eq!(m[0][3], 0.0);
        assert_eq!(m[1][1], 0.0);
    }

    #[test]
    fn limit_law_cdf_and_samples() {
        let law = LimitLaw;
        assert_eq!(law.cdf(5.0 / 10f64.sqrt()), 1.0);
        assert!(law.cdf(-10.0) < 1e-6);
        // median of χ²₅ ≈ 4.35146
        let t = (5.0 - 4.351_460_191_1) / 10f64.sqrt();
        assert!((law.cdf(t) - 0.5).abs() < 1e-8);
        let xs = law.sample(1, 200_000);
        let mean = xs.iter().sum::<f64>() / xs.len() as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / xs.len() as f64;
        assert!(mean.abs() < 0.01);
        assert!((var - 1.0).abs() < 0.02);
    }

    #[test]
    fn d2_law_moments_and_cdf() {
        assert!(D2LimitLaw::new(1.2).is_err());
        assert!(D2LimitLaw::new(-0.1).is_err());
        let l0 = D2LimitLaw::new(0.0).unwrap();
        assert!((l0.moments().variance - 1.0).abs() < 1e-15);
        for eta in [0.0, 0.3, 0.999, 1.0] {
            let law = D2LimitLaw::new(eta).unwrap();
            assert!((law.moments().variance - 1.0).abs() < 1e-12, "η={eta}");
            let xs = law.sample(7, 100_000);
            let mut sorted = xs.clone();
            sorted.sort_by(f64::total_cmp);
            for q in [0.1, 0.5, 0.9] {
                let t = sorted[(q * xs.len() as f64) as usize];
                assert!((law.cdf(t) - q).abs() < 0.01, "η={eta} q={q}");
            }
        }
        // η = 0: χ²₂ is exponential, P(Y <= t) = exp(-(2 - 2t)/2)
        let t = 0.3;
        assert!((l0.cdf(t) - (-(1.0 - t)).exp()).abs() < 1e-10);
    }

    #[test]
    fn variance_constant() {
        let v = theoretical_variance(14, 48).unwrap();
        assert!((v - 32.0 * 14.0 / (375.0 * 2304.0)).abs() < 1e-18);
        assert!(theoretical_variance(7, 10).is_err());
        assert!(theoretical_variance(16, 10).is_err());
        assert_eq!(planar_variance_constant(-1.0), 2.0 / 512.0);
    }
}
