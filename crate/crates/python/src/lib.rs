//! Python module `hqs`.
//!
//! ```python
//! import hqs
//! plan = hqs.Plan("surface-code", lx=3, ly=4)
//! plan.expectation("X@t-1:1 X@t-1:2 X@t-2:1 X@t-2:2")            # 1.0
//! plan.deviation("X@t-1:1 X@t-1:2 X@t-2:1 X@t-2:2", epsilon=1e-3)
//! ```

use hqs_core::circuits::{export_transition, NoiseSpec};
use hqs_core::fcs::{deviation, expectation_local, expectation_operator, LocalObservable, PreparationPlan};
use hqs_core::mixing::{eta_at_scale, predicted_bound as core_bound, AscentOptions};
use hqs_core::stabilizer::{check_row_annihilation, StabilizerCircuit};
use hqs_experiments::config::{build_plan, ExperimentConfig, Model, ObservableSpec};
use hqs_experiments::sweep::{fit_bound as fit_rows, parse_sweep_csv, run_sweep};
use hqs_experiments::{criteria, ExpError};
use pyo3::create_exception;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

create_exception!(hqs, DenseCeilingError, PyRuntimeError, "Dense simulation would exceed the qubit ceiling.");

fn to_py(e: ExpError) -> PyErr {
    match e.exit_code() {
        2 => PyValueError::new_err(e.to_string()),
        3 => DenseCeilingError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn core_err(e: hqs_core::Error) -> PyErr {
    to_py(ExpError::Core(e))
}

/// Noise spec from the same names the config files use.
pub fn noise_spec(epsilon: f64, gate: &str, state: &str, measurement: &str, seed: u64) -> Result<NoiseSpec, ExpError> {
    let cfg = ExperimentConfig::parse(&format!(
        "gate_noise = {gate}\nstate_noise = {state}\nmeasurement_noise = {measurement}\n"
    ))?;
    let spec = cfg.noise(epsilon, seed);
    spec.validate()?;
    Ok(spec)
}

/// A preparation plan: row-by-row transition maps plus the bath start state.
#[pyclass(module = "hqs", frozen)]
pub struct Plan {
    model: Model,
    inner: PreparationPlan,
}

impl Plan {
    fn observable(&self, spec: &str) -> Result<LocalObservable, ExpError> {
        ObservableSpec::parse(spec)?.resolve(self.inner.lx(), self.inner.ly())
    }
}

// keyword arguments mirror the config keys
#[allow(clippy::too_many_arguments)]
#[pymethods]
impl Plan {
    #[new]
    #[pyo3(signature = (model = "surface-code", lx = 3, ly = 4, theta = 0.7, phi = 0.3))]
    fn new(model: &str, lx: usize, ly: usize, theta: f64, phi: f64) -> PyResult<Self> {
        let model: Model = model.parse().map_err(to_py)?;
        let inner = build_plan(model, lx, ly, theta, phi).map_err(core_err)?;
        Ok(Self { model, inner })
    }

    #[getter]
    fn lx(&self) -> usize {
        self.inner.lx()
    }

    #[getter]
    fn ly(&self) -> usize {
        self.inner.ly()
    }

    #[getter]
    fn model(&self) -> String {
        self.model.to_string()
    }

    /// `<O>` in the prepared state, optionally with noise of strength `epsilon`
    /// on gates, fresh states and the measured observable.
    #[pyo3(signature = (observable, epsilon = 0.0, gate_noise = "depolarize", state_noise = "maximally-mixed", measurement_noise = "shrink", seed = 0))]
    fn expectation(
        &self,
        py: Python<'_>,
        observable: &str,
        epsilon: f64,
        gate_noise: &str,
        state_noise: &str,
        measurement_noise: &str,
        seed: u64,
    ) -> PyResult<f64> {
        let obs = self.observable(observable).map_err(to_py)?;
        if epsilon == 0.0 {
            return py.detach(|| expectation_local(&self.inner, &obs)).map_err(core_err);
        }
        let spec = noise_spec(epsilon, gate_noise, state_noise, measurement_noise, seed).map_err(to_py)?;
        py.detach(|| {
            let noisy = self.inner.with_noise(&spec)?;
            expectation_operator(&noisy, &hqs_core::circuits::noisy_pauli(&obs.pauli, &spec)?)
        })
        .map_err(core_err)
    }

    /// `|<O>_noisy - <O>|`.
    #[pyo3(signature = (observable, epsilon, gate_noise = "depolarize", state_noise = "maximally-mixed", measurement_noise = "shrink", seed = 0))]
    fn deviation(
        &self,
        py: Python<'_>,
        observable: &str,
        epsilon: f64,
        gate_noise: &str,
        state_noise: &str,
        measurement_noise: &str,
        seed: u64,
    ) -> PyResult<f64> {
        let obs = self.observable(observable).map_err(to_py)?;
        let spec = noise_spec(epsilon, gate_noise, state_noise, measurement_noise, seed).map_err(to_py)?;
        py.detach(|| deviation(&self.inner, &obs, &spec)).map_err(core_err)
    }

    /// `(lower, upper)` for the contraction of the bath map over rows
    /// `t..=t_prime` on segments of `ell` bath qubits.
    #[pyo3(signature = (t, t_prime, ell, restarts = 64, iterations = 200, seed = 0))]
    fn eta(&self, py: Python<'_>, t: usize, t_prime: usize, ell: usize, restarts: usize, iterations: usize, seed: u64) -> PyResult<(f64, f64)> {
        let opts = AscentOptions { restarts, iterations, seed, ..AscentOptions::default() };
        let e = py.detach(|| eta_at_scale(&self.inner, t, t_prime, ell, &opts)).map_err(core_err)?;
        Ok((e.lower, e.upper))
    }

    /// Exact noiseless `<P>` (+1, -1 or 0) by stabilizer simulation.
    fn stabilizer_expectation(&self, observable: &str) -> PyResult<i8> {
        let obs = self.observable(observable).map_err(to_py)?;
        let circ = StabilizerCircuit::from_plan(&self.inner).map_err(core_err)?;
        let tab = circ.run().map_err(core_err)?;
        circ.pauli_expectation(&tab, &obs.pauli).map_err(core_err)
    }

    /// Text form of the row-`row` transition circuit.
    fn export_circuit(&self, row: usize) -> PyResult<String> {
        let tm = self
            .inner
            .transitions()
            .get(row.wrapping_sub(1))
            .ok_or_else(|| PyValueError::new_err(format!("row {row} outside 1..={}", self.inner.ly())))?;
        Ok(export_transition(tm))
    }

    fn __repr__(&self) -> String {
        format!("Plan({:?}, lx={}, ly={})", self.model.to_string(), self.inner.lx(), self.inner.ly())
    }
}

/// `C (eps ln^2 eps + ly delta) ||O||`.
#[pyfunction]
#[pyo3(signature = (epsilon, ly, delta = 0.0, c = 1.0, op_norm = 1.0))]
fn predicted_bound(epsilon: f64, ly: usize, delta: f64, c: f64, op_norm: f64) -> PyResult<f64> {
    core_bound(epsilon, ly, delta, c, op_norm).map_err(core_err)
}

/// `(survivors, candidates, only_logical)` for products of row generators.
#[pyfunction]
fn row_annihilation(lx: usize) -> PyResult<(usize, usize, bool)> {
    let rep = check_row_annihilation(lx).map_err(core_err)?;
    Ok((rep.survivors.len(), rep.candidates, rep.only_logical_survives()))
}

/// Run a sweep from config text; returns the CSV.
#[pyfunction]
#[pyo3(signature = (config, jobs = 1))]
fn sweep(py: Python<'_>, config: &str, jobs: usize) -> PyResult<String> {
    let cfg = ExperimentConfig::parse(config).map_err(to_py)?;
    let mut buf = Vec::new();
    py.detach(|| run_sweep(&cfg, jobs, &mut buf)).map_err(to_py)?;
    String::from_utf8(buf).map_err(|e| PyRuntimeError::new_err(e.to_string()))
}

/// Fit `deviation <= C (eps ln^2 eps + ly delta)` and the log-log slope to sweep CSV.
#[pyfunction]
#[pyo3(signature = (csv, delta = 0.0))]
fn fit_bound<'py>(py: Python<'py>, csv: &str, delta: f64) -> PyResult<Bound<'py, PyDict>> {
    let rows = parse_sweep_csv(csv).map_err(to_py)?;
    let f = fit_rows(&rows, delta).map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("c", f.c)?;
    d.set_item("slope", f.slope)?;
    d.set_item("intercept", f.intercept)?;
    d.set_item("residual", f.residual)?;
    d.set_item("points", f.points)?;
    d.set_item("all_zero", f.all_zero)?;
    Ok(d)
}

/// Run a verification suite; one `(name, passed, detail)` per check.
#[pyfunction]
fn verify(py: Python<'_>, suite: &str) -> PyResult<Vec<(String, bool, String)>> {
    let suite: criteria::Suite = suite.parse().map_err(to_py)?;
    let checks = py.detach(|| criteria::verify(suite)).map_err(to_py)?;
    Ok(checks.into_iter().map(|c| (c.name, c.passed, c.detail)).collect())
}

#[pymodule]
fn hqs(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Plan>()?;
    m.add_function(wrap_pyfunction!(predicted_bound, m)?)?;
    m.add_function(wrap_pyfunction!(row_annihilation, m)?)?;
    m.add_function(wrap_pyfunction!(sweep, m)?)?;
    m.add_function(wrap_pyfunction!(fit_bound, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    m.add("DenseCeilingError", m.py().get_type::<DenseCeilingError>())?;
    Ok(())
}
