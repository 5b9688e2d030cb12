//! Sample moments, Kolmogorov–Smirnov distances and correlation.

use serde::{Deserialize, Serialize};
use statrs::function::erf::erf;

use crate::chaos::limit::{D2LimitLaw, LimitLaw};
use crate::error::{Error, Result};

/// Minimum sample size accepted by [`ks_distance`].
pub const KS_MIN_SAMPLES: usize = 100;

/// One-pass accumulator for mean and second/third central moments.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct MomentAccumulator {
    count: u64,
    mean: f64,
    m2: f64,
    m3: f64,
}

impl MomentAccumulator {
    pub fn push(&mut self, x: f64) {
        let n1 = self.count as f64;
        self.count += 1;
        let n = self.count as f64;
        let delta = x - self.mean;
        let delta_n = delta / n;
        let term1 = delta * delta_n * n1;
        self.mean += delta_n;
        self.m3 += term1 * delta_n * (n - 2.0) - 3.0 * delta_n * self.m2;
        self.m2 += term1;
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn summary(&self) -> SampleMoments {
        let n = self.count as f64;
        let variance = if self.count > 1 { self.m2 / (n - 1.0) } else { 0.0 };
        let skewness = if self.m2 > 0.0 {
            (self.m3 / n) / (self.m2 / n).powf(1.5)
        } else {
            0.0
        };
        SampleMoments {
            count: self.count as usize,
            mean: self.mean,
            variance,
            skewness,
        }
    }
}

/// Sample mean, unbiased variance and moment skewness `m3 / m2^{3/2}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleMoments {
    pub count: usize,
    pub mean: f64,
    pub variance: f64,
    pub skewness: f64,
}

pub fn moments(samples: &[f64]) -> SampleMoments {
    let mut acc = MomentAccumulator::default();
    for &x in samples {
        acc.push(x);
    }
    acc.summary()
}

/// Reference distributions for KS tests.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Law {
    /// `(5 - χ²₅)/√10`
    Limit,
    /// The `d = 2` law with parameter `η`.
    D2(D2LimitLaw),
    StandardNormal,
}

impl Law {
    pub fn cdf(&self, t: f64) -> f64 {
        match self {
            Law::Limit => LimitLaw.cdf(t),
            Law::D2(l) => l.cdf(t),
            Law::StandardNormal => 0.5 * (1.0 + erf(t / std::f64::consts::SQRT_2)),
        }
    }
}

/// `sup_t |F_m(t) - F(t)|` for the empirical CDF `F_m` of the samples.
pub fn ks_distance(samples: &[f64], law: &Law) -> Result<f64> {
    if samples.len() < KS_MIN_SAMPLES {
        return Err(Error::Statistics(format!(
            "{} samples; at least {KS_MIN_SAMPLES} required",
            samples.len()
        )));
    }
    if samples.iter().any(|x| !x.is_finite()) {
        return Err(Error::Statistics("non-finite sample".into()));
    }
    let mut xs = samples.to_vec();
    xs.sort_by(f64::total_cmp);
    let m = xs.len() as f64;
    let mut d: f64 = 0.0;
    let mut i = 0;
    while i < xs.len() {
        // ties: the empirical CDF jumps from i/m to j/m at xs[i]
        let mut j = i;
        while j < xs.len() && xs[j] == xs[i] {
            j += 1;
        }
        let f = law.cdf(xs[i]);
        d = d.max(f - i as f64 / m).max(j as f64 / m - f);
        i = j;
    }
    Ok(d)
}

/// `(x - mean)/sd` with the sample's own mean and standard deviation.
pub fn standardize(samples: &[f64]) -> Vec<f64> {
    let m = moments(samples);
    let sd = m.variance.sqrt();
    samples.iter().map(|x| (x - m.mean) / sd).collect()
}

/// Pearson correlation coefficient.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(Error::Statistics(format!(
            "paired samples of lengths {} and {}",
            x.len(),
            y.len()
        )));
    }
    let (mx, my) = (moments(x).mean, moments(y).mean);
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::Statistics("constant sample".into()));
    }
    Ok(sxy / (sxx * syy).sqrt())
}
