//! Python bindings. Graphs cross the boundary as JSON graph documents, given
//! either as a string or as the equivalent dict; results come back as plain
//! Python lists and dicts.

use curveflow::io::{parse_document, to_document, GraphDocument};
use curveflow::report::summarize;
use curveflow::sharpness::{sharpness_all, DEFAULT_TOLERANCE};
use curveflow::sweep::{parse_grid, sweep_path3, sweep_square};
use curveflow::{
    certify_limit, clique_scheme, flow_rhs, integrate, k3_catalog, simple_random_walk, triangle_free_solve,
    Dimension, FlowConfig, MixedGraph, WeightingScheme,
};
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

fn err(e: curveflow::Error) -> PyErr {
    match e {
        curveflow::Error::FlowBlowUp { .. } => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn document(obj: &Bound<'_, PyAny>) -> PyResult<GraphDocument> {
    let text = match obj.extract::<String>() {
        Ok(s) => s,
        Err(_) => obj.py().import("json")?.call_method1("dumps", (obj,))?.extract()?,
    };
    parse_document(&text).map_err(err)
}

fn scheme(obj: &Bound<'_, PyAny>) -> PyResult<WeightingScheme> {
    document(obj)?.scheme().map_err(err)
}

fn topology(obj: &Bound<'_, PyAny>) -> PyResult<MixedGraph> {
    document(obj)?.topology().map_err(err)
}

fn to_py<'py, T: Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyValueError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

fn dimension(n: &str) -> PyResult<Dimension> {
    n.parse().map_err(err)
}

fn matrix(s: &WeightingScheme) -> Vec<Vec<f64>> {
    (0..s.len()).map(|x| s.rates().row(x).iter().copied().collect()).collect()
}

/// Validated rate matrix of a graph document, rows in vertex order.
#[pyfunction]
fn rates(doc: &Bound<'_, PyAny>) -> PyResult<Vec<Vec<f64>>> {
    Ok(matrix(&scheme(doc)?))
}

/// Per-vertex curvature, distance bound, theoretical bounds and sharpness.
#[pyfunction]
#[pyo3(signature = (doc, dimension = "inf"))]
fn curvature<'py>(py: Python<'py>, doc: &Bound<'py, PyAny>, dimension: &str) -> PyResult<Bound<'py, PyAny>> {
    let s = scheme(doc)?;
    to_py(py, &summarize(&s, self::dimension(dimension)?, DEFAULT_TOLERANCE))
}

/// Full sharpness reports; `None` at isolated vertices.
#[pyfunction]
#[pyo3(signature = (doc, tol = DEFAULT_TOLERANCE))]
fn sharpness<'py>(py: Python<'py>, doc: &Bound<'py, PyAny>, tol: f64) -> PyResult<Bound<'py, PyAny>> {
    to_py(py, &sharpness_all(&scheme(doc)?, tol))
}

/// Right-hand side of the curvature flow at the given scheme.
#[pyfunction]
fn rhs(doc: &Bound<'_, PyAny>) -> PyResult<Vec<Vec<f64>>> {
    let f = flow_rhs(&scheme(doc)?);
    Ok((0..f.nrows()).map(|x| f.row(x).iter().copied().collect()).collect())
}

/// Integrates the flow and returns times, diagnostics and the final document.
#[pyfunction]
#[pyo3(signature = (doc, dt = 0.01, t_max = 100.0, tol = 1e-8, record_every = 100))]
fn flow<'py>(
    py: Python<'py>,
    doc: &Bound<'py, PyAny>,
    dt: f64,
    t_max: f64,
    tol: f64,
    record_every: usize,
) -> PyResult<Bound<'py, PyAny>> {
    let s = scheme(doc)?;
    let config = FlowConfig { dt, t_max, convergence_tol: tol, record_every, ..FlowConfig::default() };
    let traj = py.detach(|| integrate(&s, &config)).map_err(err)?;
    let out = json!({
        "converged": traj.converged,
        "converged_at": traj.converged_at,
        "times": traj.times,
        "diagnostics": traj.diagnostics,
        "limit_sharp": certify_limit(&traj).ok().map(|(_, ok)| ok),
        "final": to_document(&traj.final_scheme),
    });
    to_py(py, &out)
}

/// Sharp scheme on a topology: `kind` is `srw`, `clique` or `triangle-free`.
#[pyfunction]
#[pyo3(signature = (kind, doc, clique = None))]
fn construct<'py>(
    py: Python<'py>,
    kind: &str,
    doc: &Bound<'py, PyAny>,
    clique: Option<Vec<String>>,
) -> PyResult<Bound<'py, PyAny>> {
    let g = topology(doc)?;
    let s = match kind {
        "srw" => simple_random_walk(&g),
        "clique" => {
            let names = clique.ok_or_else(|| PyValueError::new_err("clique vertices required"))?;
            let members = names.iter().map(|v| g.vertex_or_err(v)).collect::<Result<Vec<_>, _>>().map_err(err)?;
            clique_scheme(&g, &members)
        }
        "triangle-free" => triangle_free_solve(&g).map(|sol| sol.scheme),
        other => return Err(PyValueError::new_err(format!("unknown kind {other:?}"))),
    }
    .map_err(err)?;
    to_py(py, &to_document(&s))
}

/// The four curvature sharp schemes on the triangle.
#[pyfunction]
fn k3_schemes<'py>(py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
    let docs: Vec<Value> = k3_catalog()
        .iter()
        .map(|s| serde_json::to_value(to_document(s)).expect("documents serialize"))
        .collect();
    to_py(py, &docs)
}

/// `(p, K_inf, K_inf_dist)` rows for `family` in `square`/`path3` over an `a:b:step` grid.
#[pyfunction]
fn sweep(family: &str, grid: &str) -> PyResult<Vec<(f64, f64, f64)>> {
    let grid = parse_grid(grid).map_err(err)?;
    let rows = match family {
        "square" => sweep_square(&grid),
        "path3" => sweep_path3(&grid),
        other => return Err(PyValueError::new_err(format!("unknown family {other:?}"))),
    }
    .map_err(err)?;
    Ok(rows.iter().map(|r| (r.p, r.k_inf, r.k_inf_dist)).collect())
}

#[pymodule]
#[pyo3(name = "curveflow")]
fn curveflow_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(rates, m)?)?;
    m.add_function(wrap_pyfunction!(curvature, m)?)?;
    m.add_function(wrap_pyfunction!(sharpness, m)?)?;
    m.add_function(wrap_pyfunction!(rhs, m)?)?;
    m.add_function(wrap_pyfunction!(flow, m)?)?;
    m.add_function(wrap_pyfunction!(construct, m)?)?;
    m.add_function(wrap_pyfunction!(k3_schemes, m)?)?;
    m.add_function(wrap_pyfunction!(sweep, m)?)?;
    Ok(())
}
