//! Python bindings: frequency sets, chaos projections, nodal volumes and
//! campaigns. Results are plain Python values (lists, dicts, floats).

use std::sync::Arc;

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use arw::chaos::{a_coefficient, sample_draw, second_chaos, LimitLaw};
use arw::correlations::{census_4, DEFAULT_CAP};
use arw::experiment::{cross_validate, run_campaign, CampaignContext, ExperimentConfig, Pipeline};
use arw::field::{default_resolution, synthesize, synthesize_values};
use arw::lattice::{enumerate_frequencies, is_admissible, Dim, FrequencySet};
use arw::nodal::{epsilon_band, expected_nodal_volume, nodal_volume};
use arw::stats::{ks_distance, Law};
use arw::Error;

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Io(_) | Error::Convergence(_) => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn frequency_set(n: u64, d: usize) -> PyResult<FrequencySet> {
    enumerate_frequencies(n, Dim::try_from(d).map_err(to_py)?).map_err(to_py)
}

/// Points of Λ_n as coordinate lists, in lexicographic order.
#[pyfunction]
#[pyo3(signature = (n, d=3))]
fn frequencies(n: u64, d: usize) -> PyResult<Vec<Vec<i64>>> {
    let set = frequency_set(n, d)?;
    Ok(set.points().iter().map(|p| p.coords(set.dim()).to_vec()).collect())
}

#[pyfunction]
fn admissible(n: u64) -> bool {
    is_admissible(n)
}

/// 4-correlation census as a dict.
#[pyfunction]
#[pyo3(signature = (n, d=3, cap=DEFAULT_CAP))]
fn census<'py>(py: Python<'py>, n: u64, d: usize, cap: usize) -> PyResult<Bound<'py, PyDict>> {
    let c = census_4(&frequency_set(n, d)?, cap).map_err(to_py)?;
    let out = PyDict::new(py);
    out.set_item("n", c.n)?;
    out.set_item("d", c.d)?;
    out.set_item("multiplicity", c.multiplicity)?;
    out.set_item("total_c4", c.total_c4)?;
    out.set_item("nondegenerate_x4", c.nondegenerate_x4)?;
    Ok(out)
}

/// `a(s)` for a multi-index `s`.
#[pyfunction]
fn coefficient(s: Vec<u32>) -> PyResult<f64> {
    a_coefficient(&s).map_err(to_py)
}

/// `(second, fourth)` chaos projections of the draw with this seed.
#[pyfunction]
#[pyo3(signature = (n, d=3, seed=0))]
fn projections(n: u64, d: usize, seed: u64) -> PyResult<(f64, f64)> {
    let ctx = CampaignContext::new(n, d, DEFAULT_CAP).map_err(to_py)?;
    let draw = sample_draw(ctx.set.clone(), seed).map_err(to_py)?;
    Ok((second_chaos(&draw), ctx.algebraic(seed).map_err(to_py)?))
}

/// Nodal volume of one draw: `method` is `"surface"` or `"band"`.
#[pyfunction]
#[pyo3(signature = (n, d=3, seed=0, grid=None, method="surface", epsilon=0.05))]
fn nodal(n: u64, d: usize, seed: u64, grid: Option<usize>, method: &str, epsilon: f64) -> PyResult<f64> {
    let set = Arc::new(frequency_set(n, d)?);
    let g = grid.unwrap_or_else(|| default_resolution(n, 8.0));
    let draw = sample_draw(set, seed).map_err(to_py)?;
    let est = match method {
        "surface" => nodal_volume(&synthesize_values(&draw, g).map_err(to_py)?),
        "band" => epsilon_band(&synthesize(&draw, g).map_err(to_py)?, epsilon),
        other => return Err(PyValueError::new_err(format!("unknown method {other:?}"))),
    };
    Ok(est.map_err(to_py)?.value)
}

#[pyfunction]
#[pyo3(signature = (n, d=3))]
fn expected_volume(n: u64, d: usize) -> f64 {
    expected_nodal_volume(n, d)
}

/// CDF of `(5 - χ²₅)/√10`.
#[pyfunction]
fn limit_cdf(t: f64) -> f64 {
    LimitLaw.cdf(t)
}

/// KS distance of the samples to `(5 - χ²₅)/√10`.
#[pyfunction]
fn ks_limit(samples: Vec<f64>) -> PyResult<f64> {
    ks_distance(&samples, &Law::Limit).map_err(to_py)
}

/// Runs a campaign and returns its CSV record.
#[pyfunction]
#[pyo3(signature = (n, d=3, replicas=100, seed=0, pipeline="algebraic", grid=None))]
fn campaign(n: u64, d: usize, replicas: usize, seed: u64, pipeline: &str, grid: Option<usize>) -> PyResult<String> {
    let pipeline: Pipeline = pipeline.parse().map_err(to_py)?;
    let mut cfg = ExperimentConfig::new(n, d, replicas, seed, pipeline);
    cfg.grid = grid;
    Ok(run_campaign(&cfg).map_err(to_py)?.to_csv())
}

/// `(correlation, shuffled_correlation)` between nodal volume and fourth chaos.
#[pyfunction]
#[pyo3(signature = (n, d=3, replicas=100, grid=None, seed=0))]
fn correlation(n: u64, d: usize, replicas: usize, grid: Option<usize>, seed: u64) -> PyResult<(f64, f64)> {
    let g = grid.unwrap_or_else(|| default_resolution(n, 8.0));
    let cv = cross_validate(n, d, replicas, g, seed).map_err(to_py)?;
    Ok((cv.correlation, cv.shuffled_correlation))
}

#[pymodule]
fn arw_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(frequencies, m)?)?;
    m.add_function(wrap_pyfunction!(admissible, m)?)?;
    m.add_function(wrap_pyfunction!(census, m)?)?;
    m.add_function(wrap_pyfunction!(coefficient, m)?)?;
    m.add_function(wrap_pyfunction!(projections, m)?)?;
    m.add_function(wrap_pyfunction!(nodal, m)?)?;
    m.add_function(wrap_pyfunction!(expected_volume, m)?)?;
    m.add_function(wrap_pyfunction!(limit_cdf, m)?)?;
    m.add_function(wrap_pyfunction!(ks_limit, m)?)?;
    m.add_function(wrap_pyfunction!(campaign, m)?)?;
    m.add_function(wrap_pyfunction!(correlation, m)?)?;
    Ok(())
}
