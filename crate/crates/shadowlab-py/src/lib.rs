//! Python bindings. Structured results come back as plain dicts and lists.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyModule;
use serde::Serialize;

use shadowlab::channel::{channel_spectrum, measurement_channel_exact, EXACT_CLUSTER_TOL};
use shadowlab::io::{parse_observable, parse_state, table_rows};
use shadowlab::protocol::{build_protocol, ProtocolId, SizeParams};
use shadowlab::rep::young::Partition;
use shadowlab::shadows::{estimate, Strategy};
use shadowlab::suites::{run_suite, SuiteOptions};
use shadowlab::variance::variance_report;

fn err(e: shadowlab::Error) -> PyErr {
    match e {
        shadowlab::Error::InvalidArgument(_) | shadowlab::Error::UnknownLabel(_) | shadowlab::Error::Config(_) => {
            PyValueError::new_err(e.to_string())
        }
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn to_py<'py, T: Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let s = serde_json::to_string(value).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (s,))
}

/// A shadow protocol: group ensemble plus measurement basis.
#[pyclass(name = "Protocol", module = "shadowlab_py", unsendable)]
struct PyProtocol {
    inner: shadowlab::protocol::Protocol,
}

#[pymethods]
impl PyProtocol {
    #[new]
    #[pyo3(signature = (name, n=None, d=None, shape=None))]
    fn new(name: &str, n: Option<usize>, d: Option<usize>, shape: Option<&str>) -> PyResult<Self> {
        let id: ProtocolId = name.parse().map_err(err)?;
        let lambda = shape.map(Partition::parse).transpose().map_err(err)?;
        let inner = build_protocol(id, &SizeParams { n, d, lambda }).map_err(err)?;
        Ok(Self { inner })
    }

    #[getter]
    fn name(&self) -> String {
        self.inner.id.to_string()
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    /// Component table (labels, a = a_num/a_den, dimensions).
    fn spec<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &self.inner.spec().map_err(err)?.export())
    }

    /// Predicted channel eigenvalues as (value, multiplicity) pairs.
    fn predicted_spectrum(&self) -> PyResult<Vec<(f64, usize)>> {
        let spec = self.inner.spec().map_err(err)?;
        Ok(spec
            .predicted_spectrum()
            .into_iter()
            .map(|(a, m)| (*a.numer() as f64 / *a.denom() as f64, m))
            .collect())
    }

    /// Eigenvalues of the channel averaged over the whole finite group.
    fn exact_spectrum(&self) -> PyResult<Vec<(f64, usize)>> {
        let m = measurement_channel_exact(&self.inner.ensemble, &self.inner.basis).map_err(err)?;
        channel_spectrum(&m, EXACT_CLUSTER_TOL).map_err(err)
    }

    /// Shadow estimate of Tr[rho O]; state and observable use the CLI names.
    #[allow(clippy::too_many_arguments)]
    #[pyo3(signature = (observable, state="zero", snapshots=1000, groups=1, seed=0, state_seed=None))]
    fn estimate<'py>(
        &self,
        py: Python<'py>,
        observable: &str,
        state: &str,
        snapshots: usize,
        groups: usize,
        seed: u64,
        state_seed: Option<u64>,
    ) -> PyResult<Bound<'py, PyAny>> {
        let o = parse_observable(observable, self.inner.dim()).map_err(err)?;
        let rho = parse_state(state, self.inner.dim(), state_seed.unwrap_or(seed)).map_err(err)?;
        let strategy = if groups == 1 { Strategy::Mean } else { Strategy::MedianOfMeans { groups } };
        let est = estimate(&self.inner, &rho, &o, snapshots, strategy, seed).map_err(err)?;
        to_py(py, &est)
    }

    /// Variance bounds next to the empirical single-shot variance.
    #[pyo3(signature = (observable, state="haar", snapshots=10000, seed=0, state_seed=None))]
    fn variance<'py>(
        &self,
        py: Python<'py>,
        observable: &str,
        state: &str,
        snapshots: usize,
        seed: u64,
        state_seed: Option<u64>,
    ) -> PyResult<Bound<'py, PyAny>> {
        let o = parse_observable(observable, self.inner.dim()).map_err(err)?;
        let rho = parse_state(state, self.inner.dim(), state_seed.unwrap_or(seed)).map_err(err)?;
        to_py(py, &variance_report(&self.inner, &rho, &o, snapshots, seed).map_err(err)?)
    }

    fn __repr__(&self) -> String {
        format!("Protocol({}, {})", self.inner.id, self.inner.size.tag())
    }
}

/// Protocol summary rows.
#[pyfunction]
fn table(py: Python<'_>) -> PyResult<Bound<'_, PyAny>> {
    to_py(py, &table_rows().map_err(err)?)
}

/// Runs one verification suite and returns its checks.
#[pyfunction]
#[pyo3(signature = (name, samples=100_000, seed=2024))]
fn verify<'py>(py: Python<'py>, name: &str, samples: usize, seed: u64) -> PyResult<Bound<'py, PyAny>> {
    let checks = run_suite(name, &SuiteOptions { samples, seed }).map_err(err)?;
    to_py(py, &checks)
}

/// Runs the command-line tool in-process and returns its exit code.
#[pyfunction]
fn cli(args: Vec<String>) -> i32 {
    shadowlab::cli::main_with_args(std::iter::once("shadowlab".to_string()).chain(args))
}

#[pymodule]
fn shadowlab_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyProtocol>()?;
    m.add_function(wrap_pyfunction!(table, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    m.add_function(wrap_pyfunction!(cli, m)?)?;
    Ok(())
}
