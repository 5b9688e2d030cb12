use std::sync::Arc;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::lattice::FrequencySet;

/// One realisation of the Gaussian coefficients `{a_λ}`.
///
/// Only the representatives of `Λ_n/±` are stored; `a_{-λ}` is the complex
/// conjugate of `a_λ`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientDraw {
    set: Arc<FrequencySet>,
    half: Vec<Complex64>,
}

impl CoefficientDraw {
    /// `half[h]` is the coefficient of `set.half_set()[h]`.
    pub fn new(set: Arc<FrequencySet>, half: Vec<Complex64>) -> Result<Self> {
        if set.is_empty() {
            return Err(Error::Domain(format!("Λ_{} is empty", set.n())));
        }
        if half.len() != set.half_len() {
            return Err(Error::Domain(format!(
                "expected {} coefficients, got {}",
                set.half_len(),
                half.len()
            )));
        }
        Ok(CoefficientDraw { set, half })
    }

    /// Every coefficient equal to one.
    pub fn unit(set: Arc<FrequencySet>) -> Result<Self> {
        let h = set.half_len();
        Self::new(set, vec![Complex64::new(1.0, 0.0); h])
    }

    pub fn set(&self) -> &Arc<FrequencySet> {
        &self.set
    }

    pub fn half_values(&self) -> &[Complex64] {
        &self.half
    }

    /// `a_λ` for the point at index `i`.
    #[inline]
    pub fn value(&self, i: usize) -> Complex64 {
        let h = self.set.half_len();
        if i >= h {
            self.half[i - h]
        } else {
            self.half[self.set.antipode(i) - h].conj()
        }
    }

    /// Coefficients of all points, in the set's order.
    pub fn values(&self) -> Vec<Complex64> {
        (0..self.set.len()).map(|i| self.value(i)).collect()
    }

    /// Multiplies each `a_λ` by `e(<λ, x0>)`: the coefficients of `f(· + x0)`.
    pub fn translated(&self, x0: &[f64]) -> Self {
        let h = self.set.half_len();
        let half = self
            .half
            .iter()
            .enumerate()
            .map(|(k, a)| {
                let p = self.set.point(h + k);
                let phase: f64 = x0.iter().enumerate().map(|(j, x)| p.coord(j) as f64 * x).sum();
                a * Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * phase)
            })
            .collect();
        CoefficientDraw {
            set: self.set.clone(),
            half,
        }
    }
}

/// Draws independent `a_λ` with real and imaginary parts `N(0, 1/2)`, one per
/// representative in canonical order. Fully determined by `seed`.
pub fn sample_draw(set: Arc<FrequencySet>, seed: u64) -> Result<CoefficientDraw> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    let half = (0..set.half_len())
        .map(|_| {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            Complex64::new(re * scale, im * scale)
        })
        .collect();
    CoefficientDraw::new(set, half)
}
