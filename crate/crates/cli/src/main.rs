//! `arw`: command-line front end for arithmetic random wave experiments.
//!
//! Every subcommand writes to `--out` when given, else to stdout. CSV column
//! orders are fixed and listed in each subcommand's help text.

use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use arw::chaos::{chaos_statistics, fourth_chaos, sample_draw, second_chaos};
use arw::correlations::{census_4, enumerate_x4, DEFAULT_CAP};
use arw::experiment::{
    cross_validate, run_campaign, scan_n, CampaignContext, ExperimentConfig, Pipeline, DEFAULT_TUPLE_BUDGET,
};
use arw::field::{default_resolution, synthesize, synthesize_values, write_dump};
use arw::lattice::{enumerate_frequencies, is_admissible, moment_report, Dim};
use arw::nodal::{epsilon_band, nodal_volume};

#[derive(Parser, Debug)]
#[command(name = "arw", version, about = "Arithmetic random waves on the 2- and 3-torus")]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Output file (default: stdout).
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Output format; each subcommand has its own default.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args, Debug, Clone, Copy)]
struct Wave {
    #[arg(long)]
    n: u64,
    #[arg(long, default_value_t = 3)]
    dim: usize,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Frequency set Λ_n. CSV: `n,d,multiplicity,admissible`, or with
    /// `--points` one `x,y[,z]` row per point.
    Lattice {
        #[command(flatten)]
        wave: Wave,
        /// Include the moment report (JSON only).
        #[arg(long)]
        moments: bool,
        /// Include the points.
        #[arg(long)]
        points: bool,
        #[arg(long, conflicts_with = "csv")]
        json: bool,
        #[arg(long)]
        csv: bool,
    },
    /// 4-correlation census. CSV: `n,d,multiplicity,total_c4,pair_12_34,
    /// pair_13_24,pair_14_23,diag_a,diag_b,diag_c,nondegenerate_x4,exponent`;
    /// with `--list-x4` one `x1,y1[,z1],…,x4,y4[,z4]` row per tuple.
    Correlations {
        #[command(flatten)]
        wave: Wave,
        /// List at most this many non-degenerate tuples.
        #[arg(long)]
        list_x4: Option<usize>,
        /// Largest N_n for which tuples are enumerated.
        #[arg(long, default_value_t = DEFAULT_CAP)]
        cap: usize,
        #[arg(long)]
        csv: bool,
    },
    /// Chaos statistics of one draw (JSON), or one projection.
    /// CSV: `n,d,seed,projection,value`.
    Chaos {
        #[command(flatten)]
        wave: Wave,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, conflicts_with_all = ["fourth", "second"])]
        stats: bool,
        #[arg(long, conflicts_with = "second")]
        fourth: bool,
        #[arg(long)]
        second: bool,
        #[arg(long, default_value_t = DEFAULT_CAP)]
        cap: usize,
    },
    /// Binary field dump: `ARWF`, `d: u32`, `n, G, seed: u64`, then `G^d`
    /// little-endian f64 values, row-major. Requires `--out`.
    Field {
        #[command(flatten)]
        wave: Wave,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Grid points per axis (default: power of two above 8√n).
        #[arg(long)]
        grid: Option<usize>,
    },
    /// Nodal volume of one draw. CSV: `n,d,seed,method,G,epsilon,value`.
    Nodal {
        #[command(flatten)]
        wave: Wave,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        grid: Option<usize>,
        #[arg(long, value_enum, default_value_t = Method::Surface)]
        method: Method,
        /// Band half-width; repeat for a convergence study.
        #[arg(long, default_values_t = [0.05])]
        epsilon: Vec<f64>,
    },
    /// Monte Carlo campaign. Flags override the config file. CSV:
    /// `# key=value` config lines, `replica,seed,algebraic,geometric` rows,
    /// `# <pipeline>: …` summaries, then `# timestamp=…` and `# sha256=…`.
    Campaign {
        /// Flat key=value config file.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        n: Option<u64>,
        #[arg(long)]
        dim: Option<usize>,
        #[arg(long)]
        replicas: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        grid: Option<usize>,
        #[arg(long)]
        pipeline: Option<Pipeline>,
        #[arg(long)]
        cap: Option<usize>,
    },
    /// Correlation between geometric and algebraic values on shared draws.
    /// CSV: `n,d,multiplicity,G,replicas,correlation,shuffled_correlation`.
    CrossValidate {
        #[command(flatten)]
        wave: Wave,
        #[arg(long, default_value_t = 100)]
        replicas: usize,
        #[arg(long)]
        grid: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Admissible n in [from, to) with N_n ≥ min-multiplicity.
    /// CSV: `n,multiplicity,x4,x4_ratio`.
    ScanN {
        #[arg(long, default_value_t = 3)]
        dim: usize,
        #[arg(long, default_value_t = 1)]
        from: u64,
        #[arg(long)]
        to: u64,
        #[arg(long, default_value_t = 300)]
        min_multiplicity: usize,
        /// Count non-degenerate correlations (d = 3).
        #[arg(long)]
        census: bool,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Method {
    Band,
    Surface,
}

type CliResult<T> = Result<T, Box<dyn std::error::Error>>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("arw: {e}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> CliResult<()> {
    if let Some(t) = cli.threads {
        if t == 0 {
            return Err("--threads must be at least 1".into());
        }
        rayon::ThreadPoolBuilder::new().num_threads(t).build_global()?;
    }
    let out = cli.out.clone();
    let text = match cli.command {
        Command::Lattice { wave, moments, points, json, csv } => {
            let format = pick(cli.format, json, csv, Format::Json);
            lattice(wave, moments, points, format)?
        }
        Command::Correlations { wave, list_x4, cap, csv } => {
            let format = pick(cli.format, false, csv, Format::Json);
            correlations(wave, list_x4, cap, format)?
        }
        Command::Chaos { wave, seed, fourth, second, cap, .. } => {
            let projection = if fourth {
                Some("fourth")
            } else if second {
                Some("second")
            } else {
                None
            };
            chaos(wave, seed, projection, cap, cli.format.unwrap_or(Format::Json))?
        }
        Command::Field { wave, seed, grid } => {
            let path = out.ok_or("field requires --out")?;
            let set = Arc::new(enumerate_frequencies(wave.n, Dim::try_from(wave.dim)?)?);
            let g = grid.unwrap_or_else(|| default_resolution(wave.n, 8.0));
            let field = synthesize_values(&sample_draw(set, seed)?, g)?;
            write_dump(&path, &field, seed)?;
            return Ok(());
        }
        Command::Nodal { wave, seed, grid, method, epsilon } => {
            nodal(wave, seed, grid, method, &epsilon, cli.format.unwrap_or(Format::Csv))?
        }
        Command::Campaign { config, n, dim, replicas, seed, grid, pipeline, cap } => {
            let mut cfg = match &config {
                Some(path) => ExperimentConfig::load(path)?,
                None => ExperimentConfig::new(
                    n.ok_or("campaign requires --n or --config")?,
                    3,
                    1,
                    0,
                    Pipeline::Algebraic,
                ),
            };
            cfg.n = n.unwrap_or(cfg.n);
            cfg.d = dim.unwrap_or(cfg.d);
            cfg.replicas = replicas.unwrap_or(cfg.replicas);
            cfg.base_seed = seed.unwrap_or(cfg.base_seed);
            cfg.grid = grid.or(cfg.grid);
            cfg.pipeline = pipeline.unwrap_or(cfg.pipeline);
            cfg.cap = cap.unwrap_or(cfg.cap);
            cfg.threads = cli.threads.or(cfg.threads);
            let target = out.or(cfg.output.clone());
            cfg.output = target.clone();
            let record = run_campaign(&cfg)?;
            let text = match cli.format.unwrap_or(Format::Csv) {
                Format::Json => record.to_json()? + "\n",
                Format::Csv => record.to_csv(),
            };
            return emit(target, &text);
        }
        Command::CrossValidate { wave, replicas, grid, seed } => {
            let g = grid.unwrap_or_else(|| default_resolution(wave.n, 8.0));
            let cv = cross_validate(wave.n, wave.dim, replicas, g, seed)?;
            match cli.format.unwrap_or(Format::Csv) {
                Format::Json => to_json(&cv)?,
                Format::Csv => format!(
                    "n,d,multiplicity,G,replicas,correlation,shuffled_correlation\n{},{},{},{},{},{},{}\n",
                    cv.n, cv.d, cv.multiplicity, cv.g, replicas, cv.correlation, cv.shuffled_correlation
                ),
            }
        }
        Command::ScanN { dim, from, to, min_multiplicity, census } => {
            let rows = scan_n(dim, from, to, min_multiplicity, census)?;
            match cli.format.unwrap_or(Format::Csv) {
                Format::Json => to_json(&rows)?,
                Format::Csv => {
                    let mut s = String::from("n,multiplicity,x4,x4_ratio\n");
                    for r in rows {
                        s += &format!("{},{},{},{}\n", r.n, r.multiplicity, opt(r.x4), opt(r.x4_ratio));
                    }
                    s
                }
            }
        }
    };
    emit(out, &text)
}

/// Subcommand-local `--json`/`--csv` flags win over the global `--format`.
fn pick(global: Option<Format>, json: bool, csv: bool, default: Format) -> Format {
    if json {
        Format::Json
    } else if csv {
        Format::Csv
    } else {
        global.unwrap_or(default)
    }
}

fn emit(out: Option<PathBuf>, text: &str) -> CliResult<()> {
    match out {
        Some(path) => fs::write(path, text)?,
        None => io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn to_json<T: Serialize + ?Sized>(value: &T) -> CliResult<String> {
    Ok(serde_json::to_string_pretty(value)? + "\n")
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn lattice(wave: Wave, moments: bool, points: bool, format: Format) -> CliResult<String> {
    let dim = Dim::try_from(wave.dim)?;
    let set = enumerate_frequencies(wave.n, dim)?;
    let admissible = dim == Dim::Two || is_admissible(wave.n);
    let d = dim.value();
    Ok(match format {
        Format::Json => {
            let mut v = json!({
                "n": wave.n,
                "d": d,
                "multiplicity": set.len(),
                "admissible": admissible,
            });
            if points {
                v["points"] = json!(set.points().iter().map(|p| p.coords(dim).to_vec()).collect::<Vec<_>>());
            }
            if moments && !set.is_empty() {
                v["moments"] = serde_json::to_value(moment_report(&set)?)?;
            }
            to_json(&v)?
        }
        Format::Csv if points => {
            let mut s = String::from(if d == 2 { "x,y\n" } else { "x,y,z\n" });
            for p in set.points() {
                s += &join(p.coords(dim));
                s.push('\n');
            }
            s
        }
        Format::Csv => format!("n,d,multiplicity,admissible\n{},{d},{},{admissible}\n", wave.n, set.len()),
    })
}

fn join(xs: &[i64]) -> String {
    xs.iter().map(i64::to_string).collect::<Vec<_>>().join(",")
}

fn correlations(wave: Wave, list: Option<usize>, cap: usize, format: Format) -> CliResult<String> {
    let dim = Dim::try_from(wave.dim)?;
    let set = enumerate_frequencies(wave.n, dim)?;
    let census = census_4(&set, cap)?;
    let tuples = match list {
        Some(max) => {
            let mut t = enumerate_x4(&set, cap, DEFAULT_TUPLE_BUDGET)?;
            t.truncate(max);
            Some(t)
        }
        None => None,
    };
    let coords = |t: &[u32; 4]| -> Vec<Vec<i64>> { t.iter().map(|&i| set.point(i as usize).coords(dim).to_vec()).collect() };
    Ok(match format {
        Format::Json => {
            let mut v = serde_json::to_value(&census)?;
            if let Some(t) = &tuples {
                v["x4"] = json!(t.iter().map(coords).collect::<Vec<_>>());
            }
            to_json(&v)?
        }
        Format::Csv => match &tuples {
            Some(t) => {
                let axes: &[&str] = if dim == Dim::Two { &["x", "y"] } else { &["x", "y", "z"] };
                let header: Vec<String> = (1..=4).flat_map(|k| axes.iter().map(move |a| format!("{a}{k}"))).collect();
                let mut s = header.join(",") + "\n";
                for tuple in t {
                    s += &coords(tuple).iter().map(|c| join(c)).collect::<Vec<_>>().join(",");
                    s.push('\n');
                }
                s
            }
            None => {
                let c = &census;
                format!(
                    "n,d,multiplicity,total_c4,pair_12_34,pair_13_24,pair_14_23,diag_a,diag_b,diag_c,nondegenerate_x4,exponent\n\
                     {},{},{},{},{},{},{},{},{},{},{},{}\n",
                    c.n,
                    c.d,
                    c.multiplicity,
                    c.total_c4,
                    c.pairing_counts[0],
                    c.pairing_counts[1],
                    c.pairing_counts[2],
                    c.diagonal_counts[0],
                    c.diagonal_counts[1],
                    c.diagonal_counts[2],
                    c.nondegenerate_x4,
                    opt(c.exponent_estimate)
                )
            }
        },
    })
}

fn chaos(wave: Wave, seed: u64, projection: Option<&str>, cap: usize, format: Format) -> CliResult<String> {
    let ctx = CampaignContext::new(wave.n, wave.dim, cap)?;
    let draw = sample_draw(ctx.set.clone(), seed)?;
    let value = match projection {
        None => {
            let stats = chaos_statistics(&draw, ctx.source())?;
            return match format {
                Format::Json => to_json(&stats),
                Format::Csv => Ok(format!(
                    "n,d,seed,multiplicity,w,r,x_re,x_im\n{},{},{seed},{},{},{},{},{}\n",
                    stats.n, stats.d, stats.multiplicity, stats.w, stats.r, stats.x.re, stats.x.im
                )),
            };
        }
        Some("second") => second_chaos(&draw),
        Some(_) => fourth_chaos(&chaos_statistics(&draw, ctx.source())?),
    };
    let name = projection.unwrap_or_default();
    Ok(match format {
        Format::Json => to_json(&json!({"n": wave.n, "d": wave.dim, "seed": seed, "projection": name, "value": value}))?,
        Format::Csv => format!("n,d,seed,projection,value\n{},{},{seed},{name},{value}\n", wave.n, wave.dim),
    })
}

fn nodal(wave: Wave, seed: u64, grid: Option<usize>, method: Method, eps: &[f64], format: Format) -> CliResult<String> {
    let set = Arc::new(enumerate_frequencies(wave.n, Dim::try_from(wave.dim)?)?);
    let g = grid.unwrap_or_else(|| default_resolution(wave.n, 8.0));
    let draw = sample_draw(set, seed)?;
    let estimates = match method {
        Method::Surface => vec![nodal_volume(&synthesize_values(&draw, g)?)?],
        Method::Band => {
            let field = synthesize(&draw, g)?;
            eps.iter().map(|&e| epsilon_band(&field, e)).collect::<Result<Vec<_>, _>>()?
        }
    };
    Ok(match format {
        Format::Json => to_json(&estimates)?,
        Format::Csv => {
            let mut s = String::from("n,d,seed,method,G,epsilon,value\n");
            for e in estimates {
                s += &format!("{},{},{seed},{},{},{},{}\n", e.n, e.d, e.method.as_str(), e.g, opt(e.epsilon), e.value);
            }
            s
        }
    })
}
