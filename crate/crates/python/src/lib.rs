//! Python access to the benchmark: run a config, list devices, inspect
//! update curves and floorplans.

use std::path::PathBuf;

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use cimbench::config::{load_config, RunConfig};
use cimbench::device::{default_catalog, nl_label_to_a, UpdateCurve};
use cimbench::harness::run_benchmark;
use cimbench::mapping::{build_floorplan, HierarchyParams};
use cimbench::net::NetworkTopology;
use cimbench::Error;

fn to_py(e: Error) -> PyErr {
    let msg = format!("[{}] {e}", e.module());
    if e.is_config_error() {
        PyValueError::new_err(msg)
    } else {
        PyRuntimeError::new_err(msg)
    }
}

/// Names in the built-in device catalog.
#[pyfunction]
fn device_names() -> Vec<String> {
    default_catalog().names().into_iter().map(String::from).collect()
}

/// Runs a benchmark and returns one dict of summary metrics per epoch.
///
/// Exactly one of `config_path` (a TOML file) or `config` (TOML text) is
/// needed; `device` alone also works and takes every other default.
#[pyfunction]
#[pyo3(signature = (config_path=None, config=None, device=None, seed=None, epochs=None, output_dir=None))]
fn run(
    py: Python<'_>,
    config_path: Option<PathBuf>,
    config: Option<String>,
    device: Option<String>,
    seed: Option<u64>,
    epochs: Option<usize>,
    output_dir: Option<PathBuf>,
) -> PyResult<Vec<Py<PyDict>>> {
    let mut cfg = match (config_path, config, &device) {
        (Some(p), None, _) => load_config(&p).map_err(to_py)?,
        (None, Some(t), _) => RunConfig::parse(&t).map_err(to_py)?,
        (None, None, Some(d)) => RunConfig::for_device(d),
        _ => return Err(PyValueError::new_err("give one of config_path, config or device")),
    };
    if let Some(d) = device {
        cfg.device = cimbench::config::DeviceRef::Name(d);
    }
    if let Some(s) = seed {
        cfg.seed = s;
    }
    if let Some(e) = epochs {
        cfg.schedule.epochs = e;
    }
    if let Some(o) = output_dir {
        cfg.output_dir = o;
    }
    let out = py.detach(|| run_benchmark(&cfg, &|_| {})).map_err(to_py)?;
    out.reports
        .iter()
        .map(|r| {
            let d = PyDict::new(py);
            d.set_item("epoch", r.epoch)?;
            d.set_item("accuracy", r.accuracy)?;
            d.set_item("train_loss", r.train_loss)?;
            d.set_item("train_accuracy", r.train_accuracy)?;
            d.set_item("area", r.area.total())?;
            d.set_item("latency", r.metrics.latency)?;
            d.set_item("energy", r.metrics.energy)?;
            d.set_item("dynamic_energy", r.metrics.dynamic_energy)?;
            d.set_item("leakage_energy", r.metrics.leakage_energy)?;
            d.set_item("peak_latency", r.metrics.peak_latency)?;
            d.set_item("peak_energy", r.metrics.peak_energy)?;
            d.set_item("tops", r.metrics.tops)?;
            d.set_item("tops_per_w", r.metrics.tops_per_w)?;
            d.set_item("memory_utilization", r.memory_utilization)?;
            Ok(d.unbind())
        })
        .collect()
}

/// Potentiation and depression conductances at pulse indices `0..=p_max`.
#[pyfunction]
#[pyo3(signature = (nl, p_max, g_min=1e-6, g_max=1e-4))]
fn update_curve(nl: f64, p_max: u32, g_min: f64, g_max: f64) -> PyResult<(Vec<f64>, Vec<f64>)> {
    let c = if nl == 0.0 {
        UpdateCurve::linear(g_min, g_max, p_max)
    } else {
        nl_label_to_a(nl, p_max).and_then(|a| UpdateCurve::new(a, a, g_min, g_max, p_max))
    }
    .map_err(to_py)?;
    let at = |f: &dyn Fn(f64) -> cimbench::Result<f64>| -> PyResult<Vec<f64>> {
        (0..=p_max).map(|p| f(p as f64).map_err(to_py)).collect()
    };
    Ok((at(&|p| c.ltp_conductance(p))?, at(&|p| c.ltd_conductance(p))?))
}

/// Fraction of allocated cells holding weights for a preset topology.
#[pyfunction]
#[pyo3(signature = (topology="vgg8", array_rows=128, array_cols=128))]
fn memory_utilization(topology: &str, array_rows: usize, array_cols: usize) -> PyResult<f64> {
    let net = NetworkTopology::preset(topology)
        .ok_or_else(|| PyValueError::new_err(format!("unknown topology {topology:?}")))?;
    let hp = HierarchyParams {
        array_rows,
        array_cols,
        ..Default::default()
    };
    Ok(build_floorplan(&net, &hp, 1).map_err(to_py)?.memory_utilization)
}

#[pymodule]
fn pycimbench(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(device_names, m)?)?;
    m.add_function(wrap_pyfunction!(run, m)?)?;
    m.add_function(wrap_pyfunction!(update_curve, m)?)?;
    m.add_function(wrap_pyfunction!(memory_utilization, m)?)?;
    Ok(())
}
