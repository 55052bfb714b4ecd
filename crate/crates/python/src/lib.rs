//! Python bindings: instances, event graph sizes, model files, the exact
//! oracle and the validator.

use std::sync::Arc;

use evdarp::instance::{generate_synthetic, parse_cordeau, tighten_time_windows};
use evdarp::solve::parse_assignment;
use evdarp::{
    build_model, evaluate_objective, import_solution, oracle_solve, validate_solution, write_lp, write_mps, Error,
    EventGraph, GeneratorConfig, MilpModel, ModelVariant, ObjectiveKind, ObjectiveSpec,
};
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn to_py(err: Error) -> PyErr {
    match err {
        Error::Infeasible(_) | Error::InvalidSolution(_) => PyRuntimeError::new_err(err.to_string()),
        _ => PyValueError::new_err(err.to_string()),
    }
}

fn objective_spec(
    kind: &str,
    n: usize,
    alpha: Option<f64>,
    beta: Option<f64>,
    gamma: Option<f64>,
) -> PyResult<ObjectiveSpec> {
    let kind: ObjectiveKind = kind.parse().map_err(to_py)?;
    let d = ObjectiveSpec::new(kind, n);
    Ok(ObjectiveSpec {
        kind,
        alpha: alpha.unwrap_or(d.alpha),
        beta: beta.unwrap_or(d.beta),
        gamma: gamma.unwrap_or(d.gamma),
    })
}

#[pyclass(name = "Instance", frozen)]
struct PyInstance {
    inner: evdarp::Instance,
}

#[pymethods]
impl PyInstance {
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        evdarp::Instance::from_json(text).map(|inner| PyInstance { inner }).map_err(to_py)
    }

    /// Benchmark text, windows as given.
    #[staticmethod]
    fn from_cordeau(text: &str) -> PyResult<Self> {
        parse_cordeau(text).map(|inner| PyInstance { inner }).map_err(to_py)
    }

    #[staticmethod]
    #[pyo3(signature = (n, q, seed=0))]
    fn generate(n: usize, q: u32, seed: u64) -> PyResult<Self> {
        generate_synthetic(&GeneratorConfig::new(n, q, seed)).map(|inner| PyInstance { inner }).map_err(to_py)
    }

    fn tighten(&self) -> PyResult<Self> {
        tighten_time_windows(&self.inner).map(|inner| PyInstance { inner }).map_err(to_py)
    }

    fn to_json(&self) -> String {
        self.inner.to_json()
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    #[getter]
    fn fleet_size(&self) -> usize {
        self.inner.fleet_size
    }

    #[getter]
    fn capacity(&self) -> u32 {
        self.inner.capacity
    }

    fn __repr__(&self) -> String {
        format!("Instance(n={}, Q={}, K={})", self.inner.n(), self.inner.capacity, self.inner.fleet_size)
    }
}

/// Node and arc counts, per class and closed form where it applies.
#[pyfunction]
fn graph_stats<'py>(py: Python<'py>, instance: &PyInstance) -> PyResult<Bound<'py, PyDict>> {
    let s = EventGraph::build(&instance.inner).stats();
    let d = PyDict::new(py);
    d.set_item("nodes", s.nodes)?;
    d.set_item("arcs", s.arcs)?;
    d.set_item("arcs_by_class", s.arcs_by_class)?;
    d.set_item("closed_form_nodes", s.closed_form_nodes)?;
    d.set_item("closed_form_arcs", s.closed_form_arcs)?;
    Ok(d)
}

#[pyfunction]
fn graph_dot(instance: &PyInstance) -> String {
    EventGraph::build(&instance.inner).to_dot()
}

#[pyclass(name = "Solution", frozen)]
struct PySolution {
    inner: evdarp::Solution,
}

#[pymethods]
impl PySolution {
    #[staticmethod]
    fn from_json(text: &str, instance: &PyInstance) -> PyResult<Self> {
        evdarp::Solution::from_json(text, &instance.inner).map(|inner| PySolution { inner }).map_err(to_py)
    }

    fn to_json(&self) -> String {
        self.inner.to_json()
    }

    /// Each tour as `(request, "pickup" | "dropoff", start)` triples.
    #[getter]
    fn tours(&self) -> Vec<Vec<(u32, &'static str, f64)>> {
        self.inner
            .tours
            .iter()
            .zip(&self.inner.schedules)
            .map(|(t, s)| {
                t.stops
                    .iter()
                    .zip(&s.start)
                    .map(|(stop, &time)| {
                        let kind = match stop.kind {
                            evdarp::StopKind::Pickup => "pickup",
                            evdarp::StopKind::Dropoff => "dropoff",
                        };
                        (stop.request, kind, time)
                    })
                    .collect()
            })
            .collect()
    }

    #[getter]
    fn accepted(&self) -> Vec<u32> {
        self.inner.accepted.iter().copied().collect()
    }

    /// `total, f_c, f_e, f_emax, f_n`, or None if not evaluated.
    #[getter]
    fn objective<'py>(&self, py: Python<'py>) -> PyResult<Option<Bound<'py, PyDict>>> {
        let Some(v) = self.inner.objective else { return Ok(None) };
        let d = PyDict::new(py);
        for (k, x) in [("total", v.total), ("f_c", v.f_c), ("f_e", v.f_e), ("f_emax", v.f_emax), ("f_n", v.f_n)] {
            d.set_item(k, x)?;
        }
        Ok(Some(d))
    }
}

#[pyclass(name = "Model", frozen)]
struct PyModel {
    inner: MilpModel,
}

#[pymethods]
impl PyModel {
    #[new]
    #[pyo3(signature = (instance, variant="model3", objective="cost", allow_denial=false, alpha=None, beta=None, gamma=None))]
    fn new(
        instance: &PyInstance,
        variant: &str,
        objective: &str,
        allow_denial: bool,
        alpha: Option<f64>,
        beta: Option<f64>,
        gamma: Option<f64>,
    ) -> PyResult<Self> {
        let variant: ModelVariant = variant.parse().map_err(to_py)?;
        let spec = objective_spec(objective, instance.inner.n(), alpha, beta, gamma)?;
        let g = Arc::new(EventGraph::build(&instance.inner));
        build_model(g, variant, spec, allow_denial).map(|inner| PyModel { inner }).map_err(to_py)
    }

    #[getter]
    fn num_columns(&self) -> usize {
        self.inner.variables().len()
    }

    #[getter]
    fn num_rows(&self) -> usize {
        self.inner.rows().len()
    }

    #[getter]
    fn objective_offset(&self) -> f64 {
        self.inner.objective_offset()
    }

    fn to_mps(&self, name: &str) -> String {
        write_mps(&self.inner, name)
    }

    fn to_lp(&self, name: &str) -> String {
        write_lp(&self.inner, name)
    }

    fn mapping_json(&self) -> PyResult<String> {
        serde_json::to_string_pretty(&self.inner.mapping()).map_err(|e| PyValueError::new_err(e.to_string()))
    }

    /// Decodes `name value` solver output into tours.
    fn import_assignment(&self, text: &str) -> PyResult<PySolution> {
        let (values, claimed) = parse_assignment(text).map_err(to_py)?;
        let out = import_solution(&self.inner, &values, claimed).map_err(to_py)?;
        let mut inner = out.solution;
        inner.objective = Some(out.recomputed);
        Ok(PySolution { inner })
    }
}

#[pyfunction]
#[pyo3(signature = (instance, objective="cost", allow_denial=false, limit=6, alpha=None, beta=None, gamma=None))]
fn solve_oracle(
    instance: &PyInstance,
    objective: &str,
    allow_denial: bool,
    limit: usize,
    alpha: Option<f64>,
    beta: Option<f64>,
    gamma: Option<f64>,
) -> PyResult<PySolution> {
    let spec = objective_spec(objective, instance.inner.n(), alpha, beta, gamma)?;
    oracle_solve(&instance.inner, &spec, allow_denial, limit).map(|inner| PySolution { inner }).map_err(to_py)
}

/// Weighted objective of `solution`.
#[pyfunction]
#[pyo3(signature = (instance, solution, objective="cost", alpha=None, beta=None, gamma=None))]
fn evaluate(
    instance: &PyInstance,
    solution: &PySolution,
    objective: &str,
    alpha: Option<f64>,
    beta: Option<f64>,
    gamma: Option<f64>,
) -> PyResult<f64> {
    let spec = objective_spec(objective, instance.inner.n(), alpha, beta, gamma)?;
    evaluate_objective(&instance.inner, &solution.inner, &spec).map(|v| v.total).map_err(to_py)
}

/// `(ok, ["kind: detail", ...])`.
#[pyfunction]
fn validate(instance: &PyInstance, solution: &PySolution) -> (bool, Vec<String>) {
    let r = validate_solution(&instance.inner, &solution.inner);
    (r.ok, r.violations.iter().map(|v| format!("{}: {}", v.kind, v.detail)).collect())
}

#[pymodule]
fn evdarp_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyInstance>()?;
    m.add_class::<PySolution>()?;
    m.add_class::<PyModel>()?;
    m.add_function(wrap_pyfunction!(graph_stats, m)?)?;
    m.add_function(wrap_pyfunction!(graph_dot, m)?)?;
    m.add_function(wrap_pyfunction!(solve_oracle, m)?)?;
    m.add_function(wrap_pyfunction!(evaluate, m)?)?;
    m.add_function(wrap_pyfunction!(validate, m)?)?;
    Ok(())
}
