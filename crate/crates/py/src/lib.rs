//! Python bindings: phase, transport hierarchy, series residuals, Berry
//! phase and the config-driven runner.

use std::path::Path;

use num_complex::Complex64;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use wkb_core::berry::{self, StateLoop};
use wkb_core::cli;
use wkb_core::series::{self, ResidualReport};
use wkb_core::{
    AmplitudeField, InitialProfile, PotentialSpec, SpaceTimeGrid, TransportOptions, WkbError,
};

fn py_err(e: WkbError) -> PyErr {
    match e {
        WkbError::Tolerance(_)
        | WkbError::Numeric(_)
        | WkbError::Consistency(_)
        | WkbError::Io(_) => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

#[pyclass(name = "Grid", frozen, from_py_object)]
#[derive(Clone)]
struct PyGrid(SpaceTimeGrid);

#[pymethods]
impl PyGrid {
    #[new]
    fn new(x_lo: f64, x_hi: f64, nx: usize, t_hi: f64, nt: usize) -> PyResult<Self> {
        SpaceTimeGrid::new(x_lo, x_hi, nx, t_hi, nt)
            .map(PyGrid)
            .map_err(py_err)
    }

    fn xs(&self) -> Vec<f64> {
        self.0.xs()
    }

    fn ts(&self) -> Vec<f64> {
        self.0.ts()
    }

    #[getter]
    fn shape(&self) -> (usize, usize) {
        self.0.shape()
    }

    fn __repr__(&self) -> String {
        let g = self.0;
        format!(
            "Grid(x=[{}, {}] nx={}, t=[0, {}] nt={})",
            g.x_lo, g.x_hi, g.nx, g.t_hi, g.nt
        )
    }
}

fn potential(
    name: &str,
    kappa: f64,
    coeffs: Option<Vec<f64>>,
    table: Option<(Vec<f64>, Vec<f64>)>,
) -> PyResult<PotentialSpec> {
    match name {
        "free" => Ok(PotentialSpec::Free),
        "harmonic" => Ok(PotentialSpec::Harmonic { kappa }),
        "polynomial" => PotentialSpec::polynomial(
            coeffs.ok_or_else(|| PyValueError::new_err("polynomial potential needs coeffs"))?,
        )
        .map_err(py_err),
        "tabulated" => {
            let (xs, vs) = table
                .ok_or_else(|| PyValueError::new_err("tabulated potential needs table=(xs, vs)"))?;
            PotentialSpec::tabulated(xs, vs).map_err(py_err)
        }
        other => Err(PyValueError::new_err(format!(
            "unknown potential {other:?} (free, harmonic, polynomial, tabulated)"
        ))),
    }
}

/// Classical phase S = W(x) - beta t on a grid.
#[pyclass(name = "Phase", frozen)]
struct PyPhase(wkb_core::PhaseField);

#[pymethods]
impl PyPhase {
    #[new]
    #[pyo3(signature = (grid, potential_name="harmonic", beta=1.0, mass=1.0, kappa=1.0, coeffs=None, table=None, anchor=None, margin=0.05))]
    #[allow(clippy::too_many_arguments)]
    fn new(
        grid: &PyGrid,
        potential_name: &str,
        beta: f64,
        mass: f64,
        kappa: f64,
        coeffs: Option<Vec<f64>>,
        table: Option<(Vec<f64>, Vec<f64>)>,
        anchor: Option<f64>,
        margin: f64,
    ) -> PyResult<Self> {
        let spec = potential(potential_name, kappa, coeffs, table)?;
        wkb_core::build_phase(&spec, mass, beta, &grid.0, anchor, margin)
            .map(PyPhase)
            .map_err(py_err)
    }

    fn hj_residual(&self) -> f64 {
        wkb_core::hj_residual(&self.0, self.0.spec())
    }

    fn s_x(&self, x: f64) -> PyResult<f64> {
        self.0.s_x(x).map_err(py_err)
    }

    fn time_of_flight(&self, x: f64) -> PyResult<f64> {
        self.0.time_of_flight(x).map_err(py_err)
    }

    #[getter]
    fn window(&self) -> (f64, f64) {
        let w = self.0.window();
        (w.lo, w.hi)
    }
}

/// One coefficient a_k on the report grid; `values()[i][n]` is a_k(x_i, t_n).
#[pyclass(name = "Amplitude", frozen)]
struct PyAmplitude(AmplitudeField);

#[pymethods]
impl PyAmplitude {
    #[getter]
    fn order(&self) -> usize {
        self.0.order
    }

    fn values(&self) -> Vec<Vec<f64>> {
        self.0
            .values()
            .outer_iter()
            .map(|row| row.to_vec())
            .collect()
    }

    fn max_abs(&self) -> f64 {
        self.0.max_abs()
    }
}

fn profile(name: &str, center: f64, width: f64, value: f64) -> PyResult<InitialProfile> {
    match name {
        "gaussian" => InitialProfile::gaussian(center, width).map_err(py_err),
        "constant" => Ok(InitialProfile::Constant(value)),
        other => Err(PyValueError::new_err(format!(
            "unknown profile {other:?} (gaussian, constant)"
        ))),
    }
}

/// Solve the transport hierarchy for orders 0..=order.
#[pyfunction]
#[pyo3(signature = (phase, grid, order, profile_name="gaussian", center=0.0, width=1.0, value=1.0))]
fn solve(
    phase: &PyPhase,
    grid: &PyGrid,
    order: usize,
    profile_name: &str,
    center: f64,
    width: f64,
    value: f64,
) -> PyResult<Vec<PyAmplitude>> {
    let prof = profile(profile_name, center, width, value)?;
    let h = wkb_core::solve_hierarchy(&phase.0, &prof, &grid.0, order, TransportOptions::default())
        .map_err(py_err)?;
    Ok(h.report_fields().into_iter().map(PyAmplitude).collect())
}

/// Residual scaling of the assembled series over a decreasing hbar list.
#[pyclass(name = "ResidualReport", frozen)]
struct PyReport(ResidualReport);

#[pymethods]
impl PyReport {
    #[getter]
    fn order(&self) -> usize {
        self.0.order
    }

    /// Fitted exponent of RMS |L Psi| in hbar; None for an exact solution.
    #[getter]
    fn slope(&self) -> Option<f64> {
        self.0.slope()
    }

    #[getter]
    fn identity_errors(&self) -> Vec<f64> {
        self.0.entries.iter().map(|e| e.identity_error).collect()
    }

    #[getter]
    fn residual_rms(&self) -> Vec<f64> {
        self.0.entries.iter().map(|e| e.rms).collect()
    }

    #[getter]
    fn transport_residuals(&self) -> Vec<f64> {
        self.0.transport_residuals.clone()
    }
}

#[pyfunction]
fn order_sweep(
    phase: &PyPhase,
    amplitudes: Vec<PyRef<'_, PyAmplitude>>,
    hbars: Vec<f64>,
) -> PyResult<PyReport> {
    let fields: Vec<AmplitudeField> = amplitudes.iter().map(|a| a.0.clone()).collect();
    series::order_sweep_from_fields(
        &phase.0,
        &fields,
        &hbars,
        TransportOptions::default().diff_order,
    )
    .map(PyReport)
    .map_err(py_err)
}

/// Assembled Psi at one hbar, as rows of complex numbers.
#[pyfunction]
fn psi(
    phase: &PyPhase,
    amplitudes: Vec<PyRef<'_, PyAmplitude>>,
    hbar: f64,
) -> PyResult<Vec<Vec<Complex64>>> {
    let fields: Vec<AmplitudeField> = amplitudes.iter().map(|a| a.0.clone()).collect();
    let w = series::assemble_psi(&phase.0, &fields, hbar).map_err(py_err)?;
    Ok(w.psi_field().outer_iter().map(|row| row.to_vec()).collect())
}

/// Discrete Berry phase of a closed loop of states, wrapped to (-pi, pi].
#[pyfunction]
fn berry_phase(states: Vec<Vec<Complex64>>) -> PyResult<f64> {
    let lp = StateLoop::new(states).map_err(py_err)?;
    berry::discrete_berry_phase(&lp).map_err(py_err)
}

/// Ground states of the two-level Hamiltonian around a cone of half-angle theta.
#[pyfunction]
fn two_level_loop(theta: f64, states: usize) -> PyResult<Vec<Vec<Complex64>>> {
    let lp = berry::sample_two_level_loop(theta, states).map_err(py_err)?;
    Ok(lp.states().to_vec())
}

/// Execute a JSON config into `out`; returns the process exit code.
#[pyfunction]
fn run_config(py: Python<'_>, config_json: &str, out: &str) -> PyResult<i32> {
    let cfg = match cli::parse_config(config_json) {
        Ok(c) => c,
        Err(e) => return Err(py_err(e)),
    };
    let out = Path::new(out).to_path_buf();
    Ok(py.detach(|| cli::run(&cfg, &out, false)).exit_code())
}

/// Re-verify a finished run; returns a one-line summary.
#[pyfunction]
fn check(py: Python<'_>, out: &str) -> PyResult<String> {
    let out = Path::new(out).to_path_buf();
    py.detach(|| cli::check(&out)).map_err(py_err)
}

#[pymodule]
fn wkb(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyGrid>()?;
    m.add_class::<PyPhase>()?;
    m.add_class::<PyAmplitude>()?;
    m.add_class::<PyReport>()?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add_function(wrap_pyfunction!(order_sweep, m)?)?;
    m.add_function(wrap_pyfunction!(psi, m)?)?;
    m.add_function(wrap_pyfunction!(berry_phase, m)?)?;
    m.add_function(wrap_pyfunction!(two_level_loop, m)?)?;
    m.add_function(wrap_pyfunction!(run_config, m)?)?;
    m.add_function(wrap_pyfunction!(check, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
