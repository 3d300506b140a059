//! Python bindings for the snnlab core: initialization math, propagation
//! experiments, training and the gradient audit.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use snnlab::init::{self, InitScheme};
use snnlab::numerics::{std_normal_tail, Matrix};
use snnlab::propagation::{run_multi_step, run_single_step, PropagationConfig};
use snnlab::snn::{LifParams, NetworkSpec, ResetMode};
use snnlab::training::{self, SurrogateSpec, TrainConfig};

fn err(e: snnlab::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn parse_reset(reset: &str) -> PyResult<ResetMode> {
    match reset {
        "soft" => Ok(ResetMode::Soft),
        "hard" => Ok(ResetMode::Hard),
        "none" => Ok(ResetMode::None),
        other => Err(PyValueError::new_err(format!(
            "reset must be soft, hard or none, got '{other}'"
        ))),
    }
}

/// Var[w] = 1 / (fan_in * P(u > theta)).
#[pyfunction]
fn proposed_variance(fan_in: usize, theta: f64) -> PyResult<f64> {
    init::proposed_variance(fan_in, theta).map_err(err)
}

#[pyfunction]
fn kaiming_variance(fan_in: usize) -> PyResult<f64> {
    init::kaiming_variance(fan_in).map_err(err)
}

/// P(Z > theta) for a standard normal Z.
#[pyfunction]
fn spike_probability(theta: f64) -> PyResult<f64> {
    std_normal_tail(theta).map_err(err)
}

#[pyfunction]
fn scheme_names() -> Vec<&'static str> {
    vec![
        "proposed",
        "kaiming",
        "glorot",
        "lee2016",
        "bellec2018",
        "zenke",
        "ding2022",
        "fluctuation_driven",
    ]
}

/// Run a depth (x time) propagation experiment. Returns one dict per
/// (seed, layer, t) record.
#[pyfunction]
#[pyo3(signature = (scheme, depth=100, width=1000, t_steps=1, beta=0.5, theta=1.0, reset=None, seeds=20, base_seed=42))]
#[allow(clippy::too_many_arguments)]
fn propagate(
    py: Python<'_>,
    scheme: &str,
    depth: usize,
    width: usize,
    t_steps: usize,
    beta: f64,
    theta: f64,
    reset: Option<&str>,
    seeds: u64,
    base_seed: u64,
) -> PyResult<Vec<Py<PyDict>>> {
    let reset = match reset {
        Some(r) => parse_reset(r)?,
        None if t_steps == 1 => ResetMode::None,
        None => ResetMode::Soft,
    };
    let config = PropagationConfig {
        depth,
        width,
        t_steps,
        lif: LifParams::new(beta, theta, reset).map_err(err)?,
        scheme: InitScheme::from_name(scheme).map_err(err)?,
        seeds,
        base_seed,
    };
    let trace = if t_steps == 1 {
        run_single_step(&config).map_err(err)?
    } else {
        run_multi_step(&config).map_err(err)?
    };
    let mut out = Vec::with_capacity(trace.records.len());
    for r in &trace.records {
        let d = PyDict::new(py);
        d.set_item("seed", r.seed)?;
        d.set_item("layer", r.layer)?;
        d.set_item("t", r.t)?;
        d.set_item("var_u", r.var_u)?;
        d.set_item("spike_count", r.spike_count)?;
        d.set_item("skewness", r.skewness)?;
        d.set_item("excess_kurtosis", r.excess_kurtosis)?;
        out.push(d.into());
    }
    Ok(out)
}

/// Finite-difference audit of the surrogate-gradient backward pass.
/// Returns (max_relative_error, networks_checked, params_checked).
#[pyfunction]
#[pyo3(signature = (slope=2.0))]
fn gradcheck(slope: f64) -> PyResult<(f64, usize, usize)> {
    let report = training::gradcheck_suite(&SurrogateSpec { slope }, false).map_err(err)?;
    Ok((
        report.max_relative_error,
        report.networks_checked,
        report.params_checked,
    ))
}

/// Train a small MLP on caller-supplied data. `images` is a flat
/// row-major list of samples x features. Returns per-epoch
/// (loss, accuracy) tuples.
#[pyfunction]
#[pyo3(signature = (images, labels, features, scheme, hidden_width=32, hidden_layers=1, classes=10, epochs=3, batch_size=32, t_steps=3, lr=1e-3, beta=0.5, theta=1.0, seed=0))]
#[allow(clippy::too_many_arguments)]
fn train_mlp(
    images: Vec<f64>,
    labels: Vec<usize>,
    features: usize,
    scheme: &str,
    hidden_width: usize,
    hidden_layers: usize,
    classes: usize,
    epochs: usize,
    batch_size: usize,
    t_steps: usize,
    lr: f64,
    beta: f64,
    theta: f64,
    seed: u64,
) -> PyResult<Vec<(f64, f64)>> {
    let n = labels.len();
    let images = Matrix::from_vec(n, features, images).map_err(err)?;
    let dataset = snnlab::data::Dataset::from_parts(images, labels).map_err(err)?;
    let lif = LifParams::new(beta, theta, ResetMode::Soft).map_err(err)?;
    let net = NetworkSpec::mlp(features, hidden_width, hidden_layers, classes, lif);
    let mut weights =
        init::initialize_network(&net, &InitScheme::from_name(scheme).map_err(err)?, seed)
            .map_err(err)?;
    let config = TrainConfig {
        epochs,
        batch_size,
        t_steps,
        lr,
        seed,
        ..TrainConfig::default()
    };
    let log = training::train(&net, &mut weights, &config, &dataset, None).map_err(err)?;
    Ok(log
        .epochs
        .iter()
        .map(|e| (e.train_loss, e.train_accuracy))
        .collect())
}

#[pymodule]
fn snnlab_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(proposed_variance, m)?)?;
    m.add_function(wrap_pyfunction!(kaiming_variance, m)?)?;
    m.add_function(wrap_pyfunction!(spike_probability, m)?)?;
    m.add_function(wrap_pyfunction!(scheme_names, m)?)?;
    m.add_function(wrap_pyfunction!(propagate, m)?)?;
    m.add_function(wrap_pyfunction!(gradcheck, m)?)?;
    m.add_function(wrap_pyfunction!(train_mlp, m)?)?;
    Ok(())
}
