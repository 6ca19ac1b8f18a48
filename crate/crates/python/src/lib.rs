//! Python bindings: points, holonomy traces, systole, the field and its flow.

use std::sync::Arc;

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use ::teichretract::chart::{validate_point, Chart, FnPoint, SurfaceType};
use ::teichretract::error::Error;
use ::teichretract::flow::{self as flows, FlowConfig};
use ::teichretract::gradient::{self, FieldMode, MetricModel};
use ::teichretract::holonomy::{self, build_holonomy};
use ::teichretract::mcg::{self, MappingClass};
use ::teichretract::systole::{self as sys, EnumerationConfig};
use ::teichretract::word::{CurveClass, Word};

fn to_py(e: Error) -> PyErr {
    if e.is_input_error() {
        PyValueError::new_err(e.to_string())
    } else {
        PyRuntimeError::new_err(e.to_string())
    }
}

fn parse_class(s: &str) -> PyResult<CurveClass> {
    CurveClass::parse(s).map_err(to_py)
}

fn parse_mode(s: &str) -> PyResult<FieldMode> {
    match s.to_ascii_lowercase().as_str() {
        "blended" => Ok(FieldMode::Blended),
        "naive" => Ok(FieldMode::Naive),
        _ => Err(PyValueError::new_err(format!("unknown field mode {s:?}"))),
    }
}

fn parse_metric(s: &str) -> PyResult<MetricModel> {
    match s.to_ascii_lowercase().as_str() {
        "model_wp" => Ok(MetricModel::MODEL_WP),
        "euclid_fn" => Ok(MetricModel::EUCLID_FN),
        _ => Err(PyValueError::new_err(format!("unknown metric {s:?}"))),
    }
}

/// A point in Fenchel–Nielsen coordinates on the standard chart of a surface type.
#[pyclass(name = "Point", frozen, from_py_object)]
#[derive(Clone)]
struct PyPoint {
    inner: FnPoint,
}

#[pymethods]
impl PyPoint {
    #[new]
    fn new(genus: u32, punctures: u32, lengths: Vec<f64>, twists: Vec<f64>) -> PyResult<Self> {
        let surface = SurfaceType::new(genus, punctures).map_err(to_py)?;
        let chart = Arc::new(Chart::standard(surface).map_err(to_py)?);
        let inner = FnPoint::new(chart, lengths, twists).map_err(to_py)?;
        Ok(PyPoint { inner })
    }

    #[getter]
    fn genus(&self) -> u32 {
        self.inner.chart.surface().genus
    }

    #[getter]
    fn punctures(&self) -> u32 {
        self.inner.chart.surface().punctures
    }

    #[getter]
    fn lengths(&self) -> Vec<f64> {
        self.inner.lengths.clone()
    }

    #[getter]
    fn twists(&self) -> Vec<f64> {
        self.inner.twists.clone()
    }

    /// `[ℓ_0, …, ℓ_{d-1}, θ_0, …, θ_{d-1}]`.
    fn coords(&self) -> Vec<f64> {
        self.inner.coords()
    }

    fn to_json(&self) -> String {
        serde_json::to_string(&self.inner).expect("point serializes")
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let inner: FnPoint =
            serde_json::from_str(text).map_err(|e| PyValueError::new_err(e.to_string()))?;
        let inner = validate_point(inner).map_err(to_py)?;
        Ok(PyPoint { inner })
    }

    fn __eq__(&self, other: &PyPoint) -> bool {
        self.inner == other.inner
    }

    fn __repr__(&self) -> String {
        format!(
            "Point({}, lengths={:?}, twists={:?})",
            self.inner.chart.surface(),
            self.inner.lengths,
            self.inner.twists
        )
    }
}

/// Trace of a word in the generators, e.g. `"aB"`.
#[pyfunction]
fn trace(point: &PyPoint, word: &str) -> PyResult<f64> {
    let w: Word = word.parse().map_err(to_py)?;
    let rep = build_holonomy(&point.inner).map_err(to_py)?;
    if w.0.iter().any(|l| l.generator() >= rep.rank()) {
        return Err(PyValueError::new_err(format!(
            "word {word:?} uses a generator beyond rank {}",
            rep.rank()
        )));
    }
    Ok(rep.trace(&w))
}

/// Length of a curve class: `"p0"` for pants curve 0, or a word.
#[pyfunction]
fn curve_length(point: &PyPoint, class: &str) -> PyResult<f64> {
    let rep = build_holonomy(&point.inner).map_err(to_py)?;
    holonomy::curve_length(&rep, &parse_class(class)?).map_err(to_py)
}

/// Holonomy invariant residuals `(pants, puncture, relator)`.
#[pyfunction]
fn trace_residuals(point: &PyPoint) -> PyResult<(f64, f64, f64)> {
    let r = build_holonomy(&point.inner).map_err(to_py)?.trace_report();
    Ok((
        r.max_pants_residual,
        r.max_puncture_residual,
        r.max_relator_residual,
    ))
}

/// `(Λ, realizers)`.
#[pyfunction]
fn systole(point: &PyPoint) -> PyResult<(f64, Vec<String>)> {
    let s = sys::systole(&point.inner, &EnumerationConfig::default()).map_err(to_py)?;
    Ok((s.value, s.realizers.iter().map(|c| c.to_string()).collect()))
}

/// Classes of length at most `t`, sorted by length.
#[pyfunction]
fn short_set(point: &PyPoint, t: f64) -> PyResult<Vec<(String, f64)>> {
    let s = sys::short_set(&point.inner, t, &EnumerationConfig::default()).map_err(to_py)?;
    Ok(s.entries
        .iter()
        .map(|e| (e.class.to_string(), e.length))
        .collect())
}

#[pyfunction]
fn in_truncated(point: &PyPoint, eps: f64) -> PyResult<bool> {
    sys::in_truncated(&point.inner, eps, &EnumerationConfig::default()).map_err(to_py)
}

/// The field at a point as `(dℓ components, dθ components)`.
#[pyfunction]
#[pyo3(signature = (point, eps, mode = "blended", metric = "model_wp"))]
fn vector_field(
    point: &PyPoint,
    eps: f64,
    mode: &str,
    metric: &str,
) -> PyResult<(Vec<f64>, Vec<f64>)> {
    let f = gradient::vector_field(
        &point.inner,
        eps,
        parse_mode(mode)?,
        &parse_metric(metric)?,
        &EnumerationConfig::default(),
    )
    .map_err(to_py)?;
    Ok((f.v.dl, f.v.dt))
}

/// Integrate the field; returns `(t, point, Λ)` per accepted step.
#[pyfunction]
#[pyo3(signature = (point, eps, duration = None, mode = "blended"))]
fn flow(
    point: &PyPoint,
    eps: f64,
    duration: Option<f64>,
    mode: &str,
) -> PyResult<Vec<(f64, PyPoint, f64)>> {
    let cfg = FlowConfig {
        duration,
        mode: parse_mode(mode)?,
        ..FlowConfig::new(eps)
    };
    cfg.validate().map_err(to_py)?;
    let traj = flows::flow(&point.inner, &cfg).map_err(to_py)?;
    Ok(traj
        .samples
        .into_iter()
        .map(|s| (s.t, PyPoint { inner: s.point }, s.systole))
        .collect())
}

/// Endpoint of the time-ε flow.
#[pyfunction]
fn retract(point: &PyPoint, eps: f64) -> PyResult<PyPoint> {
    let inner = flows::retract(&point.inner, eps, &FlowConfig::new(eps)).map_err(to_py)?;
    Ok(PyPoint { inner })
}

/// `θ_curve += count·ℓ_curve`.
#[pyfunction]
#[pyo3(signature = (point, curve, count = 1))]
fn dehn_twist(point: &PyPoint, curve: usize, count: i64) -> PyResult<PyPoint> {
    let inner = mcg::apply(&MappingClass::twist(curve, count), &point.inner).map_err(to_py)?;
    Ok(PyPoint { inner })
}

/// Compare `retract(T(x))` with `T(retract(x))` for a Dehn twist `T`.
#[pyfunction]
#[pyo3(signature = (point, curve, count, eps))]
fn equivariance_check<'py>(
    py: Python<'py>,
    point: &PyPoint,
    curve: usize,
    count: i64,
    eps: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let r = mcg::equivariance_check(
        &MappingClass::twist(curve, count),
        &point.inner,
        &FlowConfig::new(eps),
    )
    .map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("discrepancy", r.discrepancy)?;
    d.set_item("systole", r.systole)?;
    d.set_item("systole_invariant", r.systole_invariant)?;
    d.set_item("pass", r.pass)?;
    Ok(d)
}

#[pymodule]
#[pyo3(name = "teichretract")]
fn python_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyPoint>()?;
    m.add_function(wrap_pyfunction!(trace, m)?)?;
    m.add_function(wrap_pyfunction!(curve_length, m)?)?;
    m.add_function(wrap_pyfunction!(trace_residuals, m)?)?;
    m.add_function(wrap_pyfunction!(systole, m)?)?;
    m.add_function(wrap_pyfunction!(short_set, m)?)?;
    m.add_function(wrap_pyfunction!(in_truncated, m)?)?;
    m.add_function(wrap_pyfunction!(vector_field, m)?)?;
    m.add_function(wrap_pyfunction!(flow, m)?)?;
    m.add_function(wrap_pyfunction!(retract, m)?)?;
    m.add_function(wrap_pyfunction!(dehn_twist, m)?)?;
    m.add_function(wrap_pyfunction!(equivariance_check, m)?)?;
    Ok(())
}
