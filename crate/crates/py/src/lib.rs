use num_complex::Complex64;
use pyo3::create_exception;
use pyo3::exceptions::{PyNotImplementedError, PyOSError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use qosc_core::gates::{self, RegisterState, ScheduleConfig};
use qosc_core::oscillator::{self, qp_from_amplitudes, PhaseSpaceState};
use qosc_core::quantum_ref;
use qosc_core::runner;
use qosc_core::scenario::ScenarioConfig;
use qosc_core::{output, AmplitudeState, DMatrix, Error, HamiltonianSpec, IntegratorConfig, Trajectory};

create_exception!(qosc, NumericalError, PyRuntimeError);

fn py_err(e: Error) -> PyErr {
    match e {
        Error::NotImplemented(_) => PyNotImplementedError::new_err(e.to_string()),
        Error::Io(_) => PyOSError::new_err(e.to_string()),
        e if e.is_numerical() => NumericalError::new_err(e.to_string()),
        e => PyValueError::new_err(e.to_string()),
    }
}

fn matrix(rows: Vec<Vec<f64>>) -> PyResult<DMatrix<f64>> {
    let n = rows.len();
    if rows.iter().any(|r| r.len() != n) {
        return Err(PyValueError::new_err("matrix must be square"));
    }
    Ok(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
}

fn config(rtol: f64, atol: f64, samples: usize) -> IntegratorConfig {
    IntegratorConfig::default()
        .with_tolerances(rtol, atol)
        .with_samples(samples)
}

/// Hamiltonian of an N-level system, possibly time dependent or non-Hermitian.
#[pyclass(frozen, skip_from_py_object)]
#[derive(Clone)]
struct Hamiltonian {
    inner: HamiltonianSpec,
}

impl Hamiltonian {
    fn checked(inner: HamiltonianSpec) -> PyResult<Self> {
        inner.validate().map_err(py_err)?;
        Ok(Hamiltonian { inner })
    }
}

#[pymethods]
impl Hamiltonian {
    #[staticmethod]
    fn static_real(h: Vec<Vec<f64>>) -> PyResult<Self> {
        Self::checked(HamiltonianSpec::StaticReal { h: matrix(h)? })
    }

    #[staticmethod]
    fn two_level(e1: f64, e2: f64, v: f64) -> PyResult<Self> {
        Self::checked(HamiltonianSpec::TwoLevel { e1, e2, v })
    }

    #[staticmethod]
    fn lz_linear(e0: f64, a: f64, v: f64) -> PyResult<Self> {
        Self::checked(HamiltonianSpec::LzLinear { e0, a, v })
    }

    #[staticmethod]
    fn lz_arctan(e0: f64, v: f64) -> PyResult<Self> {
        Self::checked(HamiltonianSpec::LzArctan { e0, v })
    }

    #[staticmethod]
    fn dissipative(e1: f64, e2: f64, v: f64, lambda1: f64, lambda2: f64) -> PyResult<Self> {
        Self::checked(HamiltonianSpec::DissipativeTwoLevel {
            e1,
            e2,
            v,
            lambda1,
            lambda2,
        })
    }

    #[staticmethod]
    #[allow(clippy::too_many_arguments)]
    fn driven(
        e1: f64,
        e2: f64,
        v: f64,
        lambda1: f64,
        lambda2: f64,
        mu1: f64,
        mu2: f64,
        omega_drive: f64,
    ) -> PyResult<Self> {
        Self::checked(HamiltonianSpec::DrivenDissipative {
            e1,
            e2,
            v,
            lambda1,
            lambda2,
            mu1,
            mu2,
            omega_drive,
        })
    }

    #[staticmethod]
    fn general_complex(h_r: Vec<Vec<f64>>, h_i: Vec<Vec<f64>>) -> PyResult<Self> {
        Self::checked(HamiltonianSpec::GeneralComplexStatic {
            h_r: matrix(h_r)?,
            h_i: matrix(h_i)?,
        })
    }

    #[getter]
    fn kind(&self) -> &'static str {
        self.inner.kind().name()
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    #[getter]
    fn time_dependent(&self) -> bool {
        self.inner.is_time_dependent()
    }

    /// `(H_R, H_I)` at time `t`.
    fn at(&self, t: f64) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
        let rows = |m: &DMatrix<f64>| m.row_iter().map(|r| r.iter().copied().collect()).collect();
        let (r, i) = self.inner.eval_h(t);
        (rows(&r), rows(&i))
    }

    fn __repr__(&self) -> String {
        format!("Hamiltonian({:?})", self.inner)
    }
}

type Amplitudes = (Vec<f64>, Vec<Vec<Complex64>>);
type PhaseSpace = (Vec<f64>, Vec<Vec<f64>>, Vec<Vec<f64>>);

fn amplitudes_out(tr: Trajectory<AmplitudeState>) -> Amplitudes {
    (tr.times, tr.states.into_iter().map(|s| s.0).collect())
}

fn phase_space_out(tr: Trajectory<PhaseSpaceState>) -> PhaseSpace {
    let (q, p) = tr.states.into_iter().map(|s| (s.q, s.p)).unzip();
    (tr.times, q, p)
}

/// Reference Schrödinger evolution; returns `(times, amplitudes)`.
#[pyfunction]
#[pyo3(signature = (h, c0, t0, t1, rtol=1e-10, atol=1e-12, samples=1001))]
fn evolve_tdse(
    h: &Hamiltonian,
    c0: Vec<Complex64>,
    t0: f64,
    t1: f64,
    rtol: f64,
    atol: f64,
    samples: usize,
) -> PyResult<Amplitudes> {
    quantum_ref::evolve_tdse(&h.inner, &AmplitudeState::new(c0), t0, t1, &config(rtol, atol, samples))
        .map(amplitudes_out)
        .map_err(py_err)
}

/// Exact classical oscillators; returns `(times, q, p)`.
#[pyfunction]
#[pyo3(signature = (h, c0, t0, t1, rtol=1e-10, atol=1e-12, samples=1001))]
fn evolve_exact(
    h: &Hamiltonian,
    c0: Vec<Complex64>,
    t0: f64,
    t1: f64,
    rtol: f64,
    atol: f64,
    samples: usize,
) -> PyResult<PhaseSpace> {
    let s0 = qp_from_amplitudes(&AmplitudeState::new(c0));
    runner::evolve_exact(&h.inner, &s0, t0, t1, &config(rtol, atol, samples))
        .map(phase_space_out)
        .map_err(py_err)
}

/// Position-coupled approximation for two-level kinds; returns `(times, q, p)`.
#[pyfunction]
#[pyo3(signature = (h, c0, t0, t1, rtol=1e-10, atol=1e-12, samples=1001))]
fn evolve_rca(
    h: &Hamiltonian,
    c0: Vec<Complex64>,
    t0: f64,
    t1: f64,
    rtol: f64,
    atol: f64,
    samples: usize,
) -> PyResult<PhaseSpace> {
    let s0 = qp_from_amplitudes(&AmplitudeState::new(c0));
    oscillator::evolve_rca(&h.inner, &s0, t0, t1, &config(rtol, atol, samples))
        .map(phase_space_out)
        .map_err(py_err)
}

/// Doubled oscillator set for static complex Hamiltonians; returns `(times, q, p)`.
#[pyfunction]
#[pyo3(signature = (h, c0, t0, t1, rtol=1e-10, atol=1e-12, samples=1001))]
fn evolve_doubled(
    h: &Hamiltonian,
    c0: Vec<Complex64>,
    t0: f64,
    t1: f64,
    rtol: f64,
    atol: f64,
    samples: usize,
) -> PyResult<PhaseSpace> {
    oscillator::evolve_doubled(&h.inner, &AmplitudeState::new(c0), t0, t1, &config(rtol, atol, samples))
        .map(|tr| tr.map(|s| s.phase_space()))
        .map(phase_space_out)
        .map_err(py_err)
}

#[pyfunction]
fn zener_probability(v: f64, a: f64) -> PyResult<f64> {
    quantum_ref::zener_probability(v, a).map_err(py_err)
}

#[pyfunction]
fn eigenvalues_two_level(e1: f64, e2: f64, v: f64) -> (f64, f64) {
    quantum_ref::eigenvalues_two_level(e1, e2, v)
}

#[pyfunction]
fn exact_eigenfrequencies(e1: f64, e2: f64, v: f64) -> (f64, f64) {
    oscillator::exact_eigenfrequencies(e1, e2, v)
}

#[pyfunction]
fn rca_eigenfrequencies(e1: f64, e2: f64, v: f64) -> (f64, f64) {
    oscillator::rca_eigenfrequencies(e1, e2, v)
}

fn register(amplitudes: Vec<Complex64>) -> PyResult<RegisterState> {
    let n = amplitudes.len();
    if n < 2 || !n.is_power_of_two() {
        return Err(PyValueError::new_err(format!("register needs 2^n amplitudes, got {n}")));
    }
    RegisterState::new(n.trailing_zeros() as usize, amplitudes).map_err(py_err)
}

/// Applies a circuit such as `"h(0); cnot(0, 1)"` by matrix multiplication.
#[pyfunction]
fn apply_circuit(circuit: &str, amplitudes: Vec<Complex64>) -> PyResult<Vec<Complex64>> {
    let gs = gates::parse_circuit(circuit).map_err(py_err)?;
    let (out, _) = gates::apply_circuit(&gs, &register(amplitudes)?).map_err(py_err)?;
    Ok(out.amplitudes().to_vec())
}

/// Runs the same circuit as timed coupling windows on physical oscillators.
#[pyfunction]
#[pyo3(signature = (circuit, amplitudes, coupling=1.0, carrier=10.0))]
fn execute_on_oscillators(
    circuit: &str,
    amplitudes: Vec<Complex64>,
    coupling: f64,
    carrier: f64,
) -> PyResult<Vec<Complex64>> {
    let gs = gates::parse_circuit(circuit).map_err(py_err)?;
    let s = register(amplitudes)?;
    let sched = gates::schedule_for_circuit(&gs, s.n_qubits(), coupling).map_err(py_err)?;
    let cfg = ScheduleConfig {
        carrier,
        ..ScheduleConfig::default()
    };
    gates::execute_schedule(&sched, &s, &cfg)
        .map(|r| r.amplitudes().to_vec())
        .map_err(py_err)
}

/// Matrix of a single gate on its own targets, e.g. `"sqisw(0, 1)"`.
#[pyfunction]
fn gate_matrix(gate: &str) -> PyResult<Vec<Vec<Complex64>>> {
    let g: gates::Gate = gate.parse().map_err(py_err)?;
    let m = g.matrix();
    Ok(m.row_iter().map(|r| r.iter().copied().collect()).collect())
}

/// The seven intermediate states of the CNOT decomposition for a basis label.
#[pyfunction]
fn cnot_via_decomposition(label: &str) -> PyResult<Vec<Vec<Complex64>>> {
    let s = RegisterState::from_label(label).map_err(py_err)?;
    let (_, steps) = gates::cnot_via_decomposition(&s).map_err(py_err)?;
    Ok(steps.into_iter().map(|r| r.amplitudes().to_vec()).collect())
}

/// `(entropy, concurrence)` of a pure two-qubit state.
#[pyfunction]
fn entanglement(amplitudes: Vec<Complex64>) -> PyResult<(f64, f64)> {
    let e = gates::entanglement_measures(&register(amplitudes)?).map_err(py_err)?;
    Ok((e.entropy, e.concurrence))
}

/// Runs a scenario given as config text; returns the JSON report.
/// With `out_dir`, the CSV, SVG and JSON outputs are written there too.
#[pyfunction]
#[pyo3(signature = (config, out_dir=None))]
fn run_scenario(config: &str, out_dir: Option<&str>) -> PyResult<String> {
    let cfg = ScenarioConfig::parse(config).map_err(py_err)?;
    let run = runner::run_scenario(&cfg).map_err(py_err)?;
    if let Some(dir) = out_dir {
        let dir = std::path::Path::new(dir);
        std::fs::create_dir_all(dir).map_err(|e| py_err(e.into()))?;
        let o = &cfg.output;
        if let Some(f) = &o.csv {
            output::emit_csv(&run.trajectories, dir.join(f)).map_err(py_err)?;
        }
        if let Some(f) = &o.svg {
            output::emit_plot(&run.trajectories, &run.report, dir.join(f)).map_err(py_err)?;
        }
        if let Some(f) = &o.report {
            output::write_report(&run.report, dir.join(f)).map_err(py_err)?;
        }
    }
    output::report_json(&run.report).map_err(py_err)
}

#[pymodule]
fn qosc(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Hamiltonian>()?;
    m.add("NumericalError", m.py().get_type::<NumericalError>())?;
    m.add_function(wrap_pyfunction!(evolve_tdse, m)?)?;
    m.add_function(wrap_pyfunction!(evolve_exact, m)?)?;
    m.add_function(wrap_pyfunction!(evolve_rca, m)?)?;
    m.add_function(wrap_pyfunction!(evolve_doubled, m)?)?;
    m.add_function(wrap_pyfunction!(zener_probability, m)?)?;
    m.add_function(wrap_pyfunction!(eigenvalues_two_level, m)?)?;
    m.add_function(wrap_pyfunction!(exact_eigenfrequencies, m)?)?;
    m.add_function(wrap_pyfunction!(rca_eigenfrequencies, m)?)?;
    m.add_function(wrap_pyfunction!(apply_circuit, m)?)?;
    m.add_function(wrap_pyfunction!(execute_on_oscillators, m)?)?;
    m.add_function(wrap_pyfunction!(gate_matrix, m)?)?;
    m.add_function(wrap_pyfunction!(cnot_via_decomposition, m)?)?;
    m.add_function(wrap_pyfunction!(entanglement, m)?)?;
    m.add_function(wrap_pyfunction!(run_scenario, m)?)?;
    Ok(())
}
