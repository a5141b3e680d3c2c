//! Python bindings: knot sequences, placement, spline fitting, metrics, and
//! the regression pipeline, all over plain Python lists.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use freeknot::bspline::{self, FunctionSet, SampledFunction};
use freeknot::io::{self, ModelDocument};
use freeknot::m2p::{self, LearnerConfig, M2PConfig, Placement};
use freeknot::metrics;
use freeknot::placement;
use freeknot::{Error, ErrorClass};

fn to_py_err(e: Error) -> PyErr {
    match e.class() {
        ErrorClass::Numerical => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn function_set(grid: Vec<f64>, rows: Vec<Vec<f64>>) -> PyResult<FunctionSet> {
    FunctionSet::new(grid, rows).map_err(to_py_err)
}

/// An open knot sequence with boundary multiplicity degree + 1.
#[pyclass(name = "KnotSequence", module = "freeknot_py", from_py_object)]
#[derive(Clone)]
struct PyKnotSequence {
    inner: bspline::KnotSequence,
}

#[pymethods]
impl PyKnotSequence {
    #[new]
    fn new(degree: usize, lower: f64, upper: f64, interior: Vec<f64>) -> PyResult<Self> {
        Ok(PyKnotSequence {
            inner: bspline::KnotSequence::new(degree, lower, upper, interior)
                .map_err(to_py_err)?,
        })
    }

    /// Uniform interior knots splitting the domain into equal spans.
    #[staticmethod]
    fn equidistant(lower: f64, upper: f64, degree: usize, interior_count: usize) -> PyResult<Self> {
        Ok(PyKnotSequence {
            inner: placement::equidistant_knots(lower, upper, degree, interior_count)
                .map_err(to_py_err)?,
        })
    }

    #[getter]
    fn degree(&self) -> usize {
        self.inner.degree()
    }

    #[getter]
    fn lower(&self) -> f64 {
        self.inner.lower()
    }

    #[getter]
    fn upper(&self) -> f64 {
        self.inner.upper()
    }

    #[getter]
    fn interior(&self) -> Vec<f64> {
        self.inner.interior().to_vec()
    }

    #[getter]
    fn expanded(&self) -> Vec<f64> {
        self.inner.expanded().to_vec()
    }

    #[getter]
    fn basis_count(&self) -> usize {
        self.inner.basis_count()
    }

    fn basis_value(&self, index: usize, t: f64) -> PyResult<f64> {
        self.inner.basis_value(index, t).map_err(to_py_err)
    }

    fn basis_row(&self, t: f64) -> PyResult<Vec<f64>> {
        self.inner.basis_row(t).map_err(to_py_err)
    }

    fn save(&self, path: &str) -> PyResult<()> {
        io::write_model(&ModelDocument::Knots(self.inner.clone()), path).map_err(to_py_err)
    }

    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        Ok(PyKnotSequence {
            inner: io::read_knots(path).map_err(to_py_err)?,
        })
    }

    fn __repr__(&self) -> String {
        format!(
            "KnotSequence(degree={}, domain=[{}, {}], interior={:?})",
            self.inner.degree(),
            self.inner.lower(),
            self.inner.upper(),
            self.inner.interior()
        )
    }
}

/// A fitted spline: knots plus one coefficient row per function.
#[pyclass(name = "SplineModel", module = "freeknot_py")]
struct PySplineModel {
    inner: bspline::SplineModel,
}

#[pymethods]
impl PySplineModel {
    #[getter]
    fn knots(&self) -> PyKnotSequence {
        PyKnotSequence {
            inner: self.inner.knots().clone(),
        }
    }

    #[getter]
    fn coefficients(&self) -> Vec<Vec<f64>> {
        self.inner.coefficients().to_vec()
    }

    fn evaluate(&self, function: usize, t: f64) -> PyResult<f64> {
        self.inner.evaluate(function, t).map_err(to_py_err)
    }

    fn evaluate_on(&self, function: usize, grid: Vec<f64>) -> PyResult<Vec<f64>> {
        self.inner.evaluate_on(function, &grid).map_err(to_py_err)
    }

    fn save(&self, path: &str) -> PyResult<()> {
        io::write_model(&ModelDocument::Spline(self.inner.clone()), path).map_err(to_py_err)
    }

    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        Ok(PySplineModel {
            inner: io::read_spline(path).map_err(to_py_err)?,
        })
    }
}

/// A trained function-to-function regression pipeline.
#[pyclass(name = "M2PModel", module = "freeknot_py")]
struct PyM2PModel {
    inner: m2p::M2PModel,
}

#[pymethods]
impl PyM2PModel {
    #[getter]
    fn input_dim(&self) -> usize {
        self.inner.input_dim()
    }

    #[getter]
    fn output_dim(&self) -> usize {
        self.inner.output_dim()
    }

    #[getter]
    fn input_knots(&self) -> PyKnotSequence {
        PyKnotSequence {
            inner: self.inner.input_knots().clone(),
        }
    }

    #[getter]
    fn output_knots(&self) -> PyKnotSequence {
        PyKnotSequence {
            inner: self.inner.output_knots().clone(),
        }
    }

    /// Predicts one output curve; returns (grid, values).
    #[pyo3(signature = (grid, values, output_grid = None))]
    fn predict(
        &self,
        grid: Vec<f64>,
        values: Vec<f64>,
        output_grid: Option<Vec<f64>>,
    ) -> PyResult<(Vec<f64>, Vec<f64>)> {
        let input = SampledFunction::new(grid, values).map_err(to_py_err)?;
        let predicted = self
            .inner
            .predict(&input, output_grid.as_deref())
            .map_err(to_py_err)?;
        Ok((predicted.grid().to_vec(), predicted.values().to_vec()))
    }

    fn save(&self, path: &str) -> PyResult<()> {
        io::write_model(&ModelDocument::M2P(self.inner.clone()), path).map_err(to_py_err)
    }

    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        Ok(PyM2PModel {
            inner: io::read_m2p(path).map_err(to_py_err)?,
        })
    }
}

/// Interior knots placed by the error-bounded scan; returns the knot
/// sequence and the number of spans forced past the bound.
#[pyfunction]
fn place_knots(
    grid: Vec<f64>,
    rows: Vec<Vec<f64>>,
    degree: usize,
    epsilon: f64,
) -> PyResult<(PyKnotSequence, usize)> {
    let set = function_set(grid, rows)?;
    let envelope = placement::derivative_envelope(&set, degree).map_err(to_py_err)?;
    let placed = placement::ilp_place_knots(&envelope, degree, epsilon).map_err(to_py_err)?;
    Ok((
        PyKnotSequence {
            inner: placed.knots,
        },
        placed.forced_spans.len(),
    ))
}

/// Pointwise maximum of |(degree+1)-th divided difference| across rows.
#[pyfunction]
fn derivative_envelope(grid: Vec<f64>, rows: Vec<Vec<f64>>, degree: usize) -> PyResult<Vec<f64>> {
    let set = function_set(grid, rows)?;
    Ok(placement::derivative_envelope(&set, degree)
        .map_err(to_py_err)?
        .values()
        .to_vec())
}

/// Least-squares fit of every row on the given knots.
#[pyfunction]
#[pyo3(signature = (grid, rows, knots, ridge = 0.0))]
fn fit_spline(
    grid: Vec<f64>,
    rows: Vec<Vec<f64>>,
    knots: &PyKnotSequence,
    ridge: f64,
) -> PyResult<PySplineModel> {
    let set = function_set(grid, rows)?;
    let design = bspline::design_matrix(&knots.inner, set.grid()).map_err(to_py_err)?;
    Ok(PySplineModel {
        inner: bspline::fit_least_squares(&design, set.rows(), ridge).map_err(to_py_err)?,
    })
}

#[pyfunction]
fn max_abs_error(actual: Vec<f64>, predicted: Vec<f64>) -> PyResult<f64> {
    metrics::max_abs_error(&actual, &predicted).map_err(to_py_err)
}

#[pyfunction]
fn rmse(actual: Vec<f64>, predicted: Vec<f64>) -> PyResult<f64> {
    metrics::rmse(&actual, &predicted).map_err(to_py_err)
}

#[pyfunction]
fn mspe(actual: Vec<f64>, predicted: Vec<f64>) -> PyResult<f64> {
    metrics::mspe(&actual, &predicted).map_err(to_py_err)
}

#[pyfunction]
fn mspe_mean(actual: Vec<Vec<f64>>, predicted: Vec<Vec<f64>>) -> PyResult<f64> {
    metrics::mspe_mean(&actual, &predicted).map_err(to_py_err)
}

#[pyfunction]
fn mspe_function(actual: Vec<Vec<f64>>, predicted: Vec<Vec<f64>>) -> PyResult<f64> {
    metrics::mspe_function(&actual, &predicted).map_err(to_py_err)
}

/// Checks the local error bound on every positive-length knot span.
/// Returns (all_pass, spans) with one (lower, upper, max_envelope, delta,
/// passes) tuple per span.
#[pyfunction]
fn verify_bound(
    knots: &PyKnotSequence,
    grid: Vec<f64>,
    rows: Vec<Vec<f64>>,
    epsilon: f64,
) -> PyResult<(bool, Vec<(f64, f64, f64, f64, bool)>)> {
    let set = function_set(grid, rows)?;
    let envelope =
        placement::derivative_envelope(&set, knots.inner.degree()).map_err(to_py_err)?;
    let report = placement::verify_bound(&knots.inner, &envelope, epsilon).map_err(to_py_err)?;
    let spans = report
        .spans
        .iter()
        .map(|s| (s.lower, s.upper, s.max_envelope, s.delta, s.passes))
        .collect();
    Ok((report.all_pass, spans))
}

/// Trains the ridge pipeline on paired function sets (columns = subjects).
#[pyfunction]
#[pyo3(signature = (
    input_grid, input_rows, output_grid, output_rows,
    degree_x = 3, degree_y = 3, eps_x = 0.05, eps_y = 0.05,
    lambda_ = 1e-8, normalize = false
))]
#[allow(clippy::too_many_arguments)]
fn train_m2p(
    input_grid: Vec<f64>,
    input_rows: Vec<Vec<f64>>,
    output_grid: Vec<f64>,
    output_rows: Vec<Vec<f64>>,
    degree_x: usize,
    degree_y: usize,
    eps_x: f64,
    eps_y: f64,
    lambda_: f64,
    normalize: bool,
) -> PyResult<PyM2PModel> {
    let inputs = function_set(input_grid, input_rows)?;
    let outputs = function_set(output_grid, output_rows)?;
    let config = M2PConfig {
        degree_input: degree_x,
        degree_output: degree_y,
        placement_input: Placement::Ilp { epsilon: eps_x },
        placement_output: Placement::Ilp { epsilon: eps_y },
        learner: LearnerConfig::Ridge { lambda: lambda_ },
        normalize,
    };
    Ok(PyM2PModel {
        inner: m2p::fit_m2p(&inputs, &outputs, &config).map_err(to_py_err)?,
    })
}

#[pymodule]
fn freeknot_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyKnotSequence>()?;
    m.add_class::<PySplineModel>()?;
    m.add_class::<PyM2PModel>()?;
    m.add_function(wrap_pyfunction!(place_knots, m)?)?;
    m.add_function(wrap_pyfunction!(derivative_envelope, m)?)?;
    m.add_function(wrap_pyfunction!(fit_spline, m)?)?;
    m.add_function(wrap_pyfunction!(max_abs_error, m)?)?;
    m.add_function(wrap_pyfunction!(rmse, m)?)?;
    m.add_function(wrap_pyfunction!(mspe, m)?)?;
    m.add_function(wrap_pyfunction!(mspe_mean, m)?)?;
    m.add_function(wrap_pyfunction!(mspe_function, m)?)?;
    m.add_function(wrap_pyfunction!(verify_bound, m)?)?;
    m.add_function(wrap_pyfunction!(train_m2p, m)?)?;
    Ok(())
}
