//! Monte Carlo campaigns over independent draws, their persisted records and
//! the cross-validation of the algebraic and geometric pipelines.

use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Arc;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::chaos::draw::sample_draw;
use crate::chaos::limit::{planar_variance_constant, theoretical_variance, D2LimitLaw};
use crate::chaos::projections::fourth_chaos;
use crate::chaos::statistics::{chaos_statistics, X4Source};
use crate::correlations::{census_4, enumerate_x4, PairBuckets, DEFAULT_CAP};
use crate::error::{Error, Result};
use crate::field::{default_resolution, synthesize_values};
use crate::lattice::{enumerate_frequencies, is_admissible, moment_report, Dim, FrequencySet};
use crate::nodal::{expected_nodal_volume, nodal_volume};
use crate::stats::{ks_distance, moments, pearson, standardize, Law, KS_MIN_SAMPLES};

/// Admissible `n < 16000` with `N_n >= 300` for `d = 3` whose non-degenerate
/// correlations contribute least to the fourth-chaos variance, found with
/// `scan-n --census`. At these `n` the finite-`N` excess over the leading
/// variance is about 10%; at typical `n` it exceeds 50%.
pub const CURATED_N3: &[u64] = &[15073, 12937, 13297, 8578];

/// The smallest admissible `n` with `N_n >= 100` for `d = 3`.
pub const CURATED_N3_SMALL: &[u64] = &[74, 81, 86, 89, 90, 98, 101];

/// Products of distinct primes `≡ 1 mod 4`, giving large `N_n` for `d = 2`.
pub const CURATED_N2: &[u64] = &[1105, 32045, 1_185_665, 48_612_265];

/// Largest tuple list kept in memory for the tuple route.
pub const DEFAULT_TUPLE_BUDGET: usize = 20_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Pipeline {
    /// `A_n[4]` from the closed-form fourth chaos of each draw.
    Algebraic,
    /// Nodal volume extracted from the synthesised field.
    Geometric,
    Both,
}

impl Pipeline {
    fn algebraic(self) -> bool {
        matches!(self, Pipeline::Algebraic | Pipeline::Both)
    }

    fn geometric(self) -> bool {
        matches!(self, Pipeline::Geometric | Pipeline::Both)
    }
}

impl fmt::Display for Pipeline {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Pipeline::Algebraic => "algebraic",
            Pipeline::Geometric => "geometric",
            Pipeline::Both => "both",
        })
    }
}

impl FromStr for Pipeline {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "algebraic" => Ok(Pipeline::Algebraic),
            "geometric" => Ok(Pipeline::Geometric),
            "both" => Ok(Pipeline::Both),
            other => Err(Error::Config(format!("unknown pipeline {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub n: u64,
    pub d: usize,
    pub replicas: usize,
    pub base_seed: u64,
    /// Grid resolution for the geometric pipeline; defaults to the smallest
    /// power of two above `8√n`.
    pub grid: Option<usize>,
    pub pipeline: Pipeline,
    pub output: Option<PathBuf>,
    /// Worker threads; `None` uses the global pool.
    pub threads: Option<usize>,
    /// Largest `N_n` for which non-degenerate tuples are enumerated.
    pub cap: usize,
}

impl ExperimentConfig {
    pub fn new(n: u64, d: usize, replicas: usize, base_seed: u64, pipeline: Pipeline) -> Self {
        ExperimentConfig {
            n,
            d,
            replicas,
            base_seed,
            grid: None,
            pipeline,
            output: None,
            threads: None,
            cap: DEFAULT_CAP,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.replicas == 0 {
            return Err(Error::Config("replicas must be at least 1".into()));
        }
        Dim::try_from(self.d)?;
        if self.n == 0 {
            return Err(Error::Config("n must be positive".into()));
        }
        if self.d == 3 && !is_admissible(self.n) {
            return Err(Error::Domain(format!("n = {} is not admissible", self.n)));
        }
        if self.threads == Some(0) {
            return Err(Error::Config("threads must be at least 1".into()));
        }
        Ok(())
    }

    pub fn resolution(&self) -> usize {
        self.grid.unwrap_or_else(|| default_resolution(self.n, 8.0))
    }

    /// Seed of replica `r`.
    pub fn seed(&self, r: usize) -> u64 {
        self.base_seed.wrapping_add(r as u64)
    }

    /// Flat `key=value` lines; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = ExperimentConfig::new(0, 3, 0, 0, Pipeline::Algebraic);
        let mut seen_n = false;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key=value", lineno + 1)))?;
            let (key, value) = (key.trim(), value.trim());
            let bad = |e: &dyn fmt::Display| Error::Config(format!("{key}: {e}"));
            match key {
                "n" => {
                    cfg.n = value.parse().map_err(|e| bad(&e))?;
                    seen_n = true;
                }
                "dim" | "d" => cfg.d = value.parse().map_err(|e| bad(&e))?,
                "replicas" | "m" => cfg.replicas = value.parse().map_err(|e| bad(&e))?,
                "seed" | "base_seed" => cfg.base_seed = value.parse().map_err(|e| bad(&e))?,
                "grid" => cfg.grid = Some(value.parse().map_err(|e| bad(&e))?),
                "pipeline" => cfg.pipeline = value.parse()?,
                "out" | "output" => cfg.output = Some(PathBuf::from(value)),
                "threads" => cfg.threads = Some(value.parse().map_err(|e| bad(&e))?),
                "cap" => cfg.cap = value.parse().map_err(|e| bad(&e))?,
                other => return Err(Error::Config(format!("unknown key {other:?}"))),
            }
        }
        if !seen_n {
            return Err(Error::Config("missing key n".into()));
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    /// The `key=value` form read by [`ExperimentConfig::parse`].
    pub fn to_kv(&self) -> String {
        let mut s = format!(
            "n={}\ndim={}\nreplicas={}\nseed={}\npipeline={}\ncap={}\n",
            self.n, self.d, self.replicas, self.base_seed, self.pipeline, self.cap
        );
        if let Some(g) = self.grid {
            s += &format!("grid={g}\n");
        }
        if let Some(t) = self.threads {
            s += &format!("threads={t}\n");
        }
        if let Some(o) = &self.output {
            s += &format!("out={}\n", o.display());
        }
        s
    }
}

/// Summary of one pipeline's per-replica values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineSummary {
    pub mean: f64,
    pub variance: f64,
    pub skewness: f64,
    /// KS distance after centring and scaling by the sample moments.
    pub ks_empirical: Option<f64>,
    /// KS distance after centring and scaling by the theoretical moments.
    pub ks_theoretical: Option<f64>,
    pub theoretical_mean: f64,
    pub theoretical_variance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRecord {
    pub config: ExperimentConfig,
    pub multiplicity: usize,
    pub seeds: Vec<u64>,
    pub algebraic: Vec<f64>,
    pub geometric: Vec<f64>,
    pub algebraic_summary: Option<PipelineSummary>,
    pub geometric_summary: Option<PipelineSummary>,
    /// Seconds since the Unix epoch at completion.
    pub timestamp: u64,
    pub elapsed_secs: f64,
}

/// The frequency set and correlation data shared by all replicas.
pub struct CampaignContext {
    pub set: Arc<FrequencySet>,
    x4: X4Data,
}

enum X4Data {
    Tuples(Vec<[u32; 4]>),
    Buckets(PairBuckets),
    Empty,
}

impl CampaignContext {
    /// Enumerates `X_n(4)` when `N_n <= cap` and the list fits the tuple
    /// budget; otherwise prepares the pair-sum buckets for the complement.
    pub fn new(n: u64, d: usize, cap: usize) -> Result<Self> {
        let dim = Dim::try_from(d)?;
        let set = Arc::new(enumerate_frequencies(n, dim)?);
        if set.is_empty() {
            return Err(Error::Domain(format!("Λ_{n} is empty for d = {d}")));
        }
        let x4 = match dim {
            Dim::Two => X4Data::Empty,
            Dim::Three if set.len() <= cap => {
                match enumerate_x4(&set, cap, DEFAULT_TUPLE_BUDGET) {
                    Ok(t) => X4Data::Tuples(t),
                    Err(Error::Size { .. }) => X4Data::Buckets(PairBuckets::build(&set)),
                    Err(e) => return Err(e),
                }
            }
            Dim::Three => X4Data::Buckets(PairBuckets::build(&set)),
        };
        Ok(CampaignContext { set, x4 })
    }

    pub fn source(&self) -> X4Source<'_> {
        match &self.x4 {
            X4Data::Tuples(t) => X4Source::Tuples(t),
            X4Data::Buckets(b) => X4Source::Buckets(b),
            X4Data::Empty => X4Source::Empty,
        }
    }

    /// `A_n[4]` (or `L_n[4]`) of the draw with the given seed.
    pub fn algebraic(&self, seed: u64) -> Result<f64> {
        let draw = sample_draw(self.set.clone(), seed)?;
        Ok(fourth_chaos(&chaos_statistics(&draw, self.source())?))
    }

    /// Geometric nodal volume of the draw with the given seed.
    pub fn geometric(&self, seed: u64, g: usize) -> Result<f64> {
        let draw = sample_draw(self.set.clone(), seed)?;
        Ok(nodal_volume(&synthesize_values(&draw, g)?)?.value)
    }

    /// Leading variance of the nodal volume and its limit law.
    pub fn theory(&self) -> Result<(f64, Law)> {
        let n = self.set.n();
        let big_n = self.set.len();
        match self.set.dim() {
            Dim::Three => Ok((theoretical_variance(n, big_n)?, Law::Limit)),
            Dim::Two => {
                let mu = moment_report(&self.set)?.fourier4.map(|z| z.re).unwrap_or(0.0);
                let e_n = 4.0 * std::f64::consts::PI.powi(2) * n as f64;
                let var = planar_variance_constant(mu) * e_n / (big_n as f64).powi(2);
                Ok((var, Law::D2(D2LimitLaw::new(mu.abs().min(1.0))?)))
            }
        }
    }
}

fn run_in_pool<T: Send, F: FnOnce() -> T + Send>(threads: Option<usize>, f: F) -> Result<T> {
    match threads {
        None => Ok(f()),
        Some(t) => Ok(rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| Error::Config(e.to_string()))?
            .install(f)),
    }
}

fn summarize(values: &[f64], mean: f64, variance: f64, law: &Law) -> Result<PipelineSummary> {
    let m = moments(values);
    let (ks_empirical, ks_theoretical) = if values.len() >= KS_MIN_SAMPLES && m.variance > 0.0 {
        let sd = variance.sqrt();
        let exact: Vec<f64> = values.iter().map(|v| (v - mean) / sd).collect();
        (
            Some(ks_distance(&standardize(values), law)?),
            Some(ks_distance(&exact, law)?),
        )
    } else {
        (None, None)
    };
    Ok(PipelineSummary {
        mean: m.mean,
        variance: m.variance,
        skewness: m.skewness,
        ks_empirical,
        ks_theoretical,
        theoretical_mean: mean,
        theoretical_variance: variance,
    })
}

/// Runs every replica of the campaign. Replica `r` uses seed `base_seed + r`;
/// results are independent of the thread count.
pub fn run_campaign(config: &ExperimentConfig) -> Result<ExperimentRecord> {
    config.validate()?;
    let start = Instant::now();
    let ctx = CampaignContext::new(config.n, config.d, config.cap)?;
    let (variance, law) = ctx.theory()?;
    let seeds: Vec<u64> = (0..config.replicas).map(|r| config.seed(r)).collect();
    let g = config.resolution();
    let (algebraic, geometric) = run_in_pool(config.threads, || -> Result<_> {
        let algebraic = if config.pipeline.algebraic() {
            seeds.par_iter().map(|&s| ctx.algebraic(s)).collect::<Result<Vec<_>>>()?
        } else {
            Vec::new()
        };
        // one field at a time: synthesis and extraction are parallel internally
        let geometric = if config.pipeline.geometric() {
            seeds.iter().map(|&s| ctx.geometric(s, g)).collect::<Result<Vec<_>>>()?
        } else {
            Vec::new()
        };
        Ok((algebraic, geometric))
    })??;
    let algebraic_summary = if algebraic.is_empty() {
        None
    } else {
        Some(summarize(&algebraic, 0.0, variance, &law)?)
    };
    let geometric_summary = if geometric.is_empty() {
        None
    } else {
        let mean = expected_nodal_volume(config.n, config.d);
        Some(summarize(&geometric, mean, variance, &law)?)
    };
    Ok(ExperimentRecord {
        config: config.clone(),
        multiplicity: ctx.set.len(),
        seeds,
        algebraic,
        geometric,
        algebraic_summary,
        geometric_summary,
        timestamp: SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0),
        elapsed_secs: start.elapsed().as_secs_f64(),
    })
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

impl ExperimentRecord {
    /// CSV body: config comments, `replica,seed,algebraic,geometric` rows and
    /// summary comments. Excludes the timestamp.
    fn csv_body(&self) -> String {
        let mut s = String::new();
        for line in self.config.to_kv().lines() {
            if !line.starts_with("out=") && !line.starts_with("threads=") {
                s += &format!("# {line}\n");
            }
        }
        s += &format!("# multiplicity={}\n", self.multiplicity);
        s += "replica,seed,algebraic,geometric\n";
        for (r, seed) in self.seeds.iter().enumerate() {
            s += &format!(
                "{r},{seed},{},{}\n",
                fmt_opt(self.algebraic.get(r).copied()),
                fmt_opt(self.geometric.get(r).copied())
            );
        }
        for (name, sum) in [("algebraic", &self.algebraic_summary), ("geometric", &self.geometric_summary)] {
            if let Some(p) = sum {
                s += &format!(
                    "# {name}: mean={} variance={} skewness={} ks_empirical={} ks_theoretical={} theoretical_mean={} theoretical_variance={}\n",
                    p.mean,
                    p.variance,
                    p.skewness,
                    fmt_opt(p.ks_empirical),
                    fmt_opt(p.ks_theoretical),
                    p.theoretical_mean,
                    p.theoretical_variance
                );
            }
        }
        s
    }

    /// SHA-256 of the CSV body, hex encoded.
    pub fn content_hash(&self) -> String {
        Sha256::digest(self.csv_body().as_bytes())
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }

    /// Full CSV with trailing wall-clock and hash lines.
    pub fn to_csv(&self) -> String {
        format!(
            "{}# timestamp={} elapsed_secs={:.3}\n# sha256={}\n",
            self.csv_body(),
            self.timestamp,
            self.elapsed_secs,
            self.content_hash()
        )
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Io(e.to_string()))
    }

    pub fn write(&self, path: &Path, json: bool) -> Result<()> {
        let text = if json { self.to_json()? } else { self.to_csv() };
        let mut f = std::fs::File::create(path)?;
        f.write_all(text.as_bytes())?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossValidation {
    pub n: u64,
    pub d: usize,
    pub multiplicity: usize,
    pub g: usize,
    pub correlation: f64,
    /// Correlation after a seeded shuffle of the geometric values.
    pub shuffled_correlation: f64,
    pub algebraic: Vec<f64>,
    pub geometric: Vec<f64>,
}

/// Pearson correlation between the geometric nodal volume and the fourth
/// chaos of the same `m` draws (seeds `seed, seed+1, …`).
pub fn cross_validate(n: u64, d: usize, m: usize, g: usize, seed: u64) -> Result<CrossValidation> {
    if d == 3 && !is_admissible(n) {
        return Err(Error::Domain(format!("n = {n} is not admissible")));
    }
    let required = 8.0 * (n as f64).sqrt();
    if (g as f64) < required {
        return Err(Error::Resolution { grid: g, required });
    }
    let ctx = CampaignContext::new(n, d, DEFAULT_CAP)?;
    if d == 3 && ctx.set.len() < 100 {
        return Err(Error::Domain(format!("N_{n} = {} < 100", ctx.set.len())));
    }
    let seeds: Vec<u64> = (0..m as u64).map(|r| seed.wrapping_add(r)).collect();
    let algebraic = seeds.par_iter().map(|&s| ctx.algebraic(s)).collect::<Result<Vec<_>>>()?;
    let geometric = seeds.iter().map(|&s| ctx.geometric(s, g)).collect::<Result<Vec<_>>>()?;
    let correlation = pearson(&geometric, &algebraic)?;
    let mut shuffled = geometric.clone();
    shuffled.shuffle(&mut ChaCha8Rng::seed_from_u64(seed ^ 0x5eed));
    let shuffled_correlation = pearson(&shuffled, &algebraic)?;
    Ok(CrossValidation {
        n,
        d,
        multiplicity: ctx.set.len(),
        g,
        correlation,
        shuffled_correlation,
        algebraic,
        geometric,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    pub n: u64,
    pub multiplicity: usize,
    pub x4: Option<u64>,
    /// `|X_n(4)| / N_n²`
    pub x4_ratio: Option<f64>,
}

/// Admissible `n` in `[lo, hi)` with `N_n >= min_multiplicity`, in increasing
/// order. With `census`, also counts `X_n(4)` (`d = 3` only).
pub fn scan_n(d: usize, lo: u64, hi: u64, min_multiplicity: usize, census: bool) -> Result<Vec<ScanRow>> {
    let dim = Dim::try_from(d)?;
    let candidates: Vec<u64> = (lo.max(1)..hi).filter(|&n| dim == Dim::Two || is_admissible(n)).collect();
    let rows: Vec<Option<ScanRow>> = candidates
        .par_iter()
        .map(|&n| -> Result<Option<ScanRow>> {
            let set = enumerate_frequencies(n, dim)?;
            if set.len() < min_multiplicity.max(1) {
                return Ok(None);
            }
            let x4 = if census && dim == Dim::Three {
                Some(census_4(&set, usize::MAX)?.nondegenerate_x4)
            } else {
                None
            };
            Ok(Some(ScanRow {
                n,
                multiplicity: set.len(),
                x4,
                x4_ratio: x4.map(|x| x as f64 / (set.len() as f64).powi(2)),
            }))
        })
        .collect::<Result<_>>()?;
    Ok(rows.into_iter().flatten().collect())
}
