//! Python bindings for `varcalc`.
//!
//! Structured results (classification reports, conjugate-point searches,
//! analysis reports) are returned as plain dicts and lists.

use std::collections::HashMap;

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};
use serde::Serialize;
use serde_json::Value;

use varcalc::cli;
use varcalc::expr::{self, ParamBindings};
use varcalc::isoperimetric::{self, MomentProblem};
use varcalc::jacobi::{self, ClassifyOptions, JacobiOptions};
use varcalc::variational::{self, Grid, IvpOptions, Region, TestDirection};

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn runtime_err(e: impl std::fmt::Display) -> PyErr {
    PyRuntimeError::new_err(e.to_string())
}

fn to_py<'py>(py: Python<'py>, v: &Value) -> PyResult<Bound<'py, PyAny>> {
    Ok(match v {
        Value::Null => py.None().into_bound(py),
        Value::Bool(b) => b.into_pyobject(py)?.to_owned().into_any(),
        Value::Number(n) => match (n.as_i64(), n.as_f64()) {
            (Some(i), _) => i.into_pyobject(py)?.into_any(),
            (None, Some(f)) => f.into_pyobject(py)?.into_any(),
            _ => py.None().into_bound(py),
        },
        Value::String(s) => s.into_pyobject(py)?.into_any(),
        Value::Array(items) => {
            let list = PyList::empty(py);
            for item in items {
                list.append(to_py(py, item)?)?;
            }
            list.into_any()
        }
        Value::Object(map) => {
            let dict = PyDict::new(py);
            for (k, item) in map {
                dict.set_item(k, to_py(py, item)?)?;
            }
            dict.into_any()
        }
    })
}

fn serialize<'py, T: Serialize>(py: Python<'py>, t: &T) -> PyResult<Bound<'py, PyAny>> {
    let v = serde_json::to_value(t).map_err(runtime_err)?;
    to_py(py, &v)
}

fn bindings(params: Option<HashMap<String, f64>>) -> ParamBindings {
    ParamBindings::from_pairs(params.unwrap_or_default())
}

/// A parsed expression in `x`, `y`, `yp` and named parameters.
#[pyclass(name = "Expr", frozen)]
struct PyExpr {
    inner: expr::Expr,
}

#[pymethods]
impl PyExpr {
    #[new]
    fn new(source: &str) -> PyResult<Self> {
        Ok(PyExpr {
            inner: expr::parse(source).map_err(value_err)?,
        })
    }

    #[pyo3(signature = (x, y = 0.0, yp = 0.0, params = None))]
    fn eval(&self, x: f64, y: f64, yp: f64, params: Option<HashMap<String, f64>>) -> PyResult<f64> {
        self.inner
            .eval(x, y, yp, &bindings(params))
            .map_err(value_err)
    }

    /// Symbolic derivative with respect to `x`, `y`, `yp` or a parameter.
    fn diff(&self, wrt: &str) -> PyExpr {
        PyExpr {
            inner: self.inner.diff(wrt).simplify(),
        }
    }

    fn params(&self) -> Vec<String> {
        self.inner.params().into_iter().collect()
    }

    fn __str__(&self) -> String {
        self.inner.to_string()
    }

    fn __repr__(&self) -> String {
        format!("Expr('{}')", self.inner)
    }
}

/// A Lagrangian `L(x, y, yp)` with bound parameters.
#[pyclass(name = "Lagrangian", frozen)]
struct PyLagrangian {
    inner: variational::Lagrangian,
}

#[pymethods]
impl PyLagrangian {
    #[new]
    #[pyo3(signature = (source, params = None))]
    fn new(source: &str, params: Option<HashMap<String, f64>>) -> PyResult<Self> {
        Ok(PyLagrangian {
            inner: variational::Lagrangian::parse(source, bindings(params)).map_err(value_err)?,
        })
    }

    fn value(&self, x: f64, y: f64, yp: f64) -> PyResult<f64> {
        self.inner.value(x, y, yp).map_err(value_err)
    }

    /// `P = D33 L`.
    fn p(&self, x: f64, y: f64, yp: f64) -> PyResult<f64> {
        self.inner.p_coefficient(x, y, yp).map_err(value_err)
    }

    /// `Q = D22 L - d/dx D23 L`.
    fn q(&self, x: f64, y: f64, yp: f64, ypp: f64) -> PyResult<f64> {
        self.inner.q_coefficient(x, y, yp, ypp).map_err(value_err)
    }

    /// Euler-Lagrange residual `D2 L - d/dx D3 L`.
    fn residual(&self, x: f64, y: f64, yp: f64, ypp: f64) -> PyResult<f64> {
        self.inner.residual(x, y, yp, ypp).map_err(value_err)
    }

    fn __repr__(&self) -> String {
        format!("Lagrangian('{}')", self.inner.source())
    }
}

/// A candidate path on `[a, b]`, either closed-form or an Euler-Lagrange
/// solution.
#[pyclass(name = "Path", frozen)]
struct PyPath {
    inner: variational::Path,
}

#[pymethods]
impl PyPath {
    #[staticmethod]
    #[pyo3(signature = (expression, a, b, params = None))]
    fn analytic(expression: &str, a: f64, b: f64, params: Option<HashMap<String, f64>>) -> PyResult<Self> {
        let e = expr::parse(expression).map_err(value_err)?;
        Ok(PyPath {
            inner: variational::Path::analytic(e, &bindings(params), a, b).map_err(value_err)?,
        })
    }

    /// Integrates the Euler-Lagrange equation from `(y_a, yp_a)` at `a`.
    #[staticmethod]
    #[pyo3(signature = (lagrangian, a, b, y_a, yp_a, rtol = 1e-10, atol = 1e-12))]
    fn solve_ivp(
        lagrangian: &PyLagrangian,
        a: f64,
        b: f64,
        y_a: f64,
        yp_a: f64,
        rtol: f64,
        atol: f64,
    ) -> PyResult<Self> {
        let opts = IvpOptions {
            ode: varcalc::odeint::Options::with_tolerances(rtol, atol),
            ..IvpOptions::default()
        };
        Ok(PyPath {
            inner: variational::solve_el_ivp(&lagrangian.inner, a, b, y_a, yp_a, &opts)
                .map_err(runtime_err)?,
        })
    }

    #[getter]
    fn a(&self) -> f64 {
        self.inner.a()
    }

    #[getter]
    fn b(&self) -> f64 {
        self.inner.b()
    }

    fn y(&self, x: f64) -> PyResult<f64> {
        self.inner.y(x).map_err(value_err)
    }

    fn yp(&self, x: f64) -> PyResult<f64> {
        self.inner.yp(x).map_err(value_err)
    }

    fn ypp(&self, x: f64) -> PyResult<f64> {
        self.inner.ypp(x).map_err(value_err)
    }
}

fn direction(v: &str, p: &PyPath) -> PyResult<TestDirection> {
    let e = expr::parse(v).map_err(value_err)?;
    TestDirection::new(e, p.inner.a(), p.inner.b()).map_err(value_err)
}

#[pyfunction]
fn action(lagrangian: &PyLagrangian, path: &PyPath) -> PyResult<f64> {
    variational::action(&lagrangian.inner, &path.inner).map_err(runtime_err)
}

/// First variation along a direction given as an expression in `x` that
/// vanishes at both ends.
#[pyfunction]
fn first_variation(lagrangian: &PyLagrangian, path: &PyPath, v: &str) -> PyResult<f64> {
    variational::first_variation(&lagrangian.inner, &path.inner, &direction(v, path)?)
        .map_err(runtime_err)
}

#[pyfunction]
fn second_variation(lagrangian: &PyLagrangian, path: &PyPath, v: &str) -> PyResult<f64> {
    variational::second_variation(&lagrangian.inner, &path.inner, &direction(v, path)?)
        .map_err(runtime_err)
}

#[pyfunction]
#[pyo3(signature = (lagrangian, path, samples = 1001))]
fn check_critical<'py>(
    py: Python<'py>,
    lagrangian: &PyLagrangian,
    path: &PyPath,
    samples: usize,
) -> PyResult<Bound<'py, PyAny>> {
    let c = variational::check_critical(&lagrangian.inner, &path.inner, samples).map_err(runtime_err)?;
    serialize(py, &c)
}

#[pyfunction]
#[pyo3(signature = (lagrangian, x, y, yp, grid = 17))]
fn convexity<'py>(
    py: Python<'py>,
    lagrangian: &PyLagrangian,
    x: (f64, f64),
    y: (f64, f64),
    yp: (f64, f64),
    grid: usize,
) -> PyResult<Bound<'py, PyAny>> {
    let region = Region { x, y, yp };
    let cert = variational::convexity_certificate(&lagrangian.inner, &region, Grid {
        nx: grid,
        ny: grid,
        nyp: grid,
    });
    serialize(py, &cert)
}

/// Conjugate-point search along a critical path.
#[pyfunction]
fn first_conjugate_point<'py>(
    py: Python<'py>,
    lagrangian: &PyLagrangian,
    path: &PyPath,
) -> PyResult<Bound<'py, PyAny>> {
    let j = jacobi::build_jacobi(&lagrangian.inner, &path.inner, &JacobiOptions::default())
        .map_err(runtime_err)?;
    let rep = j.first_conjugate_point().map_err(runtime_err)?;
    serialize(py, &rep)
}

/// Full classification. `y_range` and `yp_range` enable the convexity
/// certificate over that box.
#[pyfunction]
#[pyo3(signature = (lagrangian, path, y_range = None, yp_range = None))]
fn classify<'py>(
    py: Python<'py>,
    lagrangian: &PyLagrangian,
    path: &PyPath,
    y_range: Option<(f64, f64)>,
    yp_range: Option<(f64, f64)>,
) -> PyResult<Bound<'py, PyAny>> {
    let region = match (y_range, yp_range) {
        (Some(y), Some(yp)) => Some(Region {
            x: (path.inner.a(), path.inner.b()),
            y,
            yp,
        }),
        (None, None) => None,
        _ => return Err(value_err("give both y_range and yp_range or neither")),
    };
    let opts = ClassifyOptions {
        region,
        ..ClassifyOptions::default()
    };
    let rep = jacobi::classify(&lagrangian.inner, &path.inner, &opts).map_err(runtime_err)?;
    serialize(py, &rep)
}

/// Lagrange multipliers of the maximum-entropy problem with variance
/// `sigma^2`.
#[pyfunction]
fn solve_multipliers<'py>(py: Python<'py>, sigma: f64) -> PyResult<Bound<'py, PyAny>> {
    let prob = MomentProblem::new(sigma).map_err(value_err)?;
    let s = isoperimetric::solve_multipliers(&prob).map_err(runtime_err)?;
    serialize(py, &s)
}

/// Analyses a problem file given as text and returns the report.
#[pyfunction]
#[pyo3(signature = (text, source = None))]
fn analyze_source<'py>(py: Python<'py>, text: &str, source: Option<String>) -> PyResult<Bound<'py, PyAny>> {
    serialize(py, &cli::analyze_source(text, source))
}

#[pyfunction]
fn analyze_file<'py>(py: Python<'py>, path: std::path::PathBuf) -> PyResult<Bound<'py, PyAny>> {
    serialize(py, &cli::analyze_file(&path))
}

/// Names and sources of the bundled example problems.
#[pyfunction]
fn fixtures() -> Vec<(String, String)> {
    cli::FIXTURES
        .iter()
        .map(|f| (f.name.to_string(), f.source.to_string()))
        .collect()
}

#[pymodule]
#[pyo3(name = "varcalc")]
fn varcalc_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    register(m)
}

/// Adds the classes and functions to `m`.
pub fn register(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyExpr>()?;
    m.add_class::<PyLagrangian>()?;
    m.add_class::<PyPath>()?;
    m.add_function(wrap_pyfunction!(action, m)?)?;
    m.add_function(wrap_pyfunction!(first_variation, m)?)?;
    m.add_function(wrap_pyfunction!(second_variation, m)?)?;
    m.add_function(wrap_pyfunction!(check_critical, m)?)?;
    m.add_function(wrap_pyfunction!(convexity, m)?)?;
    m.add_function(wrap_pyfunction!(first_conjugate_point, m)?)?;
    m.add_function(wrap_pyfunction!(classify, m)?)?;
    m.add_function(wrap_pyfunction!(solve_multipliers, m)?)?;
    m.add_function(wrap_pyfunction!(analyze_source, m)?)?;
    m.add_function(wrap_pyfunction!(analyze_file, m)?)?;
    m.add_function(wrap_pyfunction!(fixtures, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
