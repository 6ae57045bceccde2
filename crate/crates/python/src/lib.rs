//! Python bindings. Quantities are SI throughout; angles in radians.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use levitorque_core::dynamics::{simulate_pulse as core_pulse, Outcome, PulseSchedule, PulseSetup};
use levitorque_core::lifshitz::{
    AngularHarmonics, CasimirResult, CasimirSolver as CoreSolver, CasimirTable, FTildeForm, QuadratureSpec,
    RodGeometry,
};
use levitorque_core::materials::{catalog, MaterialSet};
use levitorque_core::patch::{self as core_patch, AverageMode, PatchAveraging, PatchConfig};
use levitorque_core::sensing::{self as core_sensing, Environment, Illumination};
use levitorque_core::trap::{self as core_trap, Polarizability, TrapConfig};
use levitorque_core::Error;

fn py_err(e: Error) -> PyErr {
    match e.root_cause() {
        Error::Domain(_) | Error::InvalidParameter(_) | Error::UnknownMaterial(_) => PyValueError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn rod_geometry(length: Option<f64>, radius: Option<f64>, density: Option<f64>) -> PyResult<RodGeometry> {
    let base = RodGeometry::default_silica();
    RodGeometry::new(length.unwrap_or(base.length), radius.unwrap_or(base.radius), density.unwrap_or(base.density))
        .map_err(py_err)
}

fn json_to_py<'py, T: serde::Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

#[pyclass(name = "CasimirResult", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyCasimirResult(CasimirResult);

#[pymethods]
impl PyCasimirResult {
    #[getter]
    fn d(&self) -> f64 {
        self.0.d
    }
    #[getter]
    fn theta(&self) -> f64 {
        self.0.theta
    }
    #[getter]
    fn temperature(&self) -> f64 {
        self.0.temperature
    }
    /// J/m
    #[getter]
    fn g_per_length(&self) -> f64 {
        self.0.g_per_length
    }
    #[getter]
    fn free_energy(&self) -> f64 {
        self.0.free_energy
    }
    #[getter]
    fn force(&self) -> f64 {
        self.0.force
    }
    #[getter]
    fn torque(&self) -> f64 {
        self.0.torque
    }
    #[getter]
    fn n_terms(&self) -> usize {
        self.0.n_terms
    }
    #[getter]
    fn est_rel_error(&self) -> f64 {
        self.0.est_rel_error
    }

    fn __repr__(&self) -> String {
        format!(
            "CasimirResult(d={:e}, theta={}, T={}, force={:e}, torque={:e})",
            self.0.d, self.0.theta, self.0.temperature, self.0.force, self.0.torque
        )
    }
}

/// `g(θ) = g0 + g_cos·cos2θ + g_sin·sin2θ` and the matching force harmonics.
#[pyclass(name = "AngularHarmonics", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyHarmonics(AngularHarmonics);

#[pymethods]
impl PyHarmonics {
    #[getter]
    fn g0(&self) -> f64 {
        self.0.g0
    }
    #[getter]
    fn g_cos(&self) -> f64 {
        self.0.g_cos
    }
    #[getter]
    fn g_sin(&self) -> f64 {
        self.0.g_sin
    }
    fn torque(&self, theta: f64) -> f64 {
        self.0.torque(theta)
    }
    fn force(&self, theta: f64) -> f64 {
        self.0.force(theta)
    }
    fn torque_amplitude(&self) -> f64 {
        self.0.torque_amplitude()
    }
}

#[pyclass(name = "CasimirSolver", frozen)]
struct PySolver(CoreSolver);

#[pymethods]
impl PySolver {
    /// `form` is "extraordinary" (default) or "ordinary_root".
    #[new]
    #[pyo3(signature = (plate="batio3", rod="silica", gap="vacuum", length=None, radius=None, density=None, max_terms=None, form="extraordinary"))]
    #[allow(clippy::too_many_arguments)]
    fn new(
        plate: &str,
        rod: &str,
        gap: &str,
        length: Option<f64>,
        radius: Option<f64>,
        density: Option<f64>,
        max_terms: Option<usize>,
        form: &str,
    ) -> PyResult<Self> {
        let materials = MaterialSet {
            plate: catalog::plate(plate).map_err(py_err)?,
            rod: catalog::rod(rod).map_err(py_err)?,
            gap: catalog::gap(gap).map_err(py_err)?,
        };
        let mut quad = QuadratureSpec::default();
        if let Some(n) = max_terms {
            quad.max_terms = n;
        }
        let form = match form {
            "extraordinary" => FTildeForm::Extraordinary,
            "ordinary_root" => FTildeForm::OrdinaryRoot,
            other => return Err(PyValueError::new_err(format!("unknown form `{other}`"))),
        };
        let solver = CoreSolver::new(materials, rod_geometry(length, radius, density)?, quad).map_err(py_err)?;
        Ok(PySolver(solver.with_form(form)))
    }

    #[pyo3(signature = (d, theta, temperature=300.0))]
    fn evaluate(&self, py: Python<'_>, d: f64, theta: f64, temperature: f64) -> PyResult<PyCasimirResult> {
        py.detach(|| self.0.evaluate(d, theta, temperature)).map(PyCasimirResult).map_err(py_err)
    }

    #[pyo3(signature = (d, theta, temperature=300.0))]
    fn torque(&self, py: Python<'_>, d: f64, theta: f64, temperature: f64) -> PyResult<f64> {
        Ok(self.evaluate(py, d, theta, temperature)?.0.torque)
    }

    #[pyo3(signature = (d, theta, temperature=300.0))]
    fn force(&self, py: Python<'_>, d: f64, theta: f64, temperature: f64) -> PyResult<f64> {
        Ok(self.evaluate(py, d, theta, temperature)?.0.force)
    }

    #[pyo3(signature = (d, temperature=300.0))]
    fn harmonics(&self, py: Python<'_>, d: f64, temperature: f64) -> PyResult<PyHarmonics> {
        py.detach(|| self.0.angular_harmonics(d, temperature)).map(PyHarmonics).map_err(py_err)
    }

    /// Evaluates every `(d, theta)` pair of the outer product in parallel.
    #[pyo3(signature = (d, theta, temperature=300.0))]
    fn sweep(&self, py: Python<'_>, d: Vec<f64>, theta: Vec<f64>, temperature: f64) -> PyResult<Vec<PyCasimirResult>> {
        use levitorque_core::lifshitz::{sweep, SweepPoint};
        let points: Vec<SweepPoint> = d
            .iter()
            .flat_map(|&d| theta.iter().map(move |&theta| SweepPoint { d, theta, temperature }))
            .collect();
        let rows = py.detach(|| sweep(&self.0, &points)).map_err(py_err)?;
        Ok(rows.into_iter().map(PyCasimirResult).collect())
    }
}

#[pyclass(name = "Trap", frozen)]
struct PyTrap {
    cfg: TrapConfig,
    rod: RodGeometry,
    pol: Polarizability,
}

#[pymethods]
impl PyTrap {
    #[new]
    #[pyo3(signature = (power=0.1, wavelength=1064e-9, waist=400e-9, center_distance=266e-9, rod="silica"))]
    fn new(power: f64, wavelength: f64, waist: f64, center_distance: f64, rod: &str) -> PyResult<Self> {
        let cfg = TrapConfig { power, wavelength, waist, center_distance, ..TrapConfig::default() };
        cfg.validate().map_err(py_err)?;
        let geom = RodGeometry::default_silica();
        let pol = core_trap::polarizability(&geom, catalog::rod(rod).map_err(py_err)?.eps_optical).map_err(py_err)?;
        Ok(PyTrap { cfg, rod: geom, pol })
    }

    /// J
    fn potential(&self, d: f64) -> f64 {
        core_trap::trap_potential(d, &self.cfg, &self.pol)
    }

    fn force(&self, d: f64) -> f64 {
        core_trap::optical_force(d, &self.cfg, &self.pol)
    }

    /// Well depth in J.
    fn depth(&self) -> f64 {
        core_trap::trap_depth(&self.cfg, &self.pol)
    }

    fn equilibrium(&self) -> PyResult<f64> {
        core_trap::equilibrium(&self.cfg, &self.pol).map_err(py_err)
    }

    /// dict with omega_z, omega_r, d_eq, k_z, k_phi.
    fn frequencies<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        let f = core_trap::trap_frequencies(&self.cfg, &self.rod, &self.pol).map_err(py_err)?;
        json_to_py(py, &f)
    }

    #[getter]
    fn peak_intensity(&self) -> f64 {
        self.cfg.peak_intensity()
    }
}

/// Torque and force noise floors at one pressure, for an averaging time `dt`.
#[pyfunction]
#[pyo3(signature = (pressure_torr, temperature=300.0, dt=1.0, power=0.1))]
fn sensitivity<'py>(py: Python<'py>, pressure_torr: f64, temperature: f64, dt: f64, power: f64) -> PyResult<Bound<'py, PyAny>> {
    let mut env = Environment::air_torr(pressure_torr);
    env.temperature = temperature;
    env.validate().map_err(py_err)?;
    let cfg = TrapConfig { power, ..TrapConfig::default() };
    let rod = RodGeometry::default_silica();
    let pol = core_trap::polarizability(&rod, catalog::silica().eps_optical).map_err(py_err)?;
    let light = Illumination { intensity: cfg.peak_intensity(), wavelength: cfg.wavelength };
    json_to_py(py, &core_sensing::sensitivity(&rod, &env, &light, &pol, dt))
}

/// Runs the on/off/feedback pulse at the default geometry and returns the
/// trajectory columns plus a summary of the off window.
#[pyfunction]
#[pyo3(signature = (seed=None, pressure_torr=1e-7, plate="batio3", table_nodes=60))]
fn simulate_pulse<'py>(
    py: Python<'py>,
    seed: Option<u64>,
    pressure_torr: f64,
    plate: &str,
    table_nodes: usize,
) -> PyResult<Bound<'py, PyDict>> {
    let setup = PulseSetup {
        schedule: PulseSchedule::default(),
        trap: TrapConfig::default(),
        rod: RodGeometry::default_silica(),
        eps_optical: catalog::silica().eps_optical,
        env: Environment::air_torr(pressure_torr),
        record_every: 10,
    };
    let materials = MaterialSet::with_plate(plate).map_err(py_err)?;
    let run = py
        .detach(|| {
            let solver = CoreSolver::new(materials, setup.rod, QuadratureSpec::default())?;
            let table = CasimirTable::build(&solver, 100e-9, 600e-9, table_nodes, setup.env.temperature)?;
            core_pulse(&setup, &table, seed)
        })
        .map_err(py_err)?;
    let out = PyDict::new(py);
    let col = |f: fn(&levitorque_core::dynamics::TrajectoryPoint) -> f64| run.trajectory.iter().map(f).collect::<Vec<_>>();
    out.set_item("t", col(|p| p.t))?;
    out.set_item("d", col(|p| p.d))?;
    out.set_item("v", col(|p| p.v))?;
    out.set_item("theta", col(|p| p.theta))?;
    out.set_item("omega", col(|p| p.omega))?;
    out.set_item("phase", run.trajectory.iter().map(|p| p.phase.label()).collect::<Vec<_>>())?;
    out.set_item("d_eq", run.initial.d)?;
    out.set_item("off_fall", run.off_fall())?;
    out.set_item("off_angle_gain", run.off_angle_gain())?;
    out.set_item("off_mean_torque", run.off_mean_torque)?;
    out.set_item("off_initial_acceleration", run.off_initial_acceleration)?;
    match run.outcome {
        Outcome::Completed => out.set_item("capture", py.None())?,
        Outcome::SurfaceCapture { t, d } => out.set_item("capture", (t, d))?,
    }
    Ok(out)
}

/// Electric field `[Ex, Ey, Ez]` of a Gaussian potential patch of radius `r0` and amplitude `v0`.
#[pyfunction]
#[pyo3(signature = (x, y, z, r0=1e-6, v0=0.1))]
fn patch_field(x: f64, y: f64, z: f64, r0: f64, v0: f64) -> PyResult<[f64; 3]> {
    let cfg = PatchConfig { r0, v0 };
    cfg.validate().map_err(py_err)?;
    core_patch::patch_field(x, y, z, &cfg).map_err(py_err)
}

#[pyfunction]
#[pyo3(signature = (x, y, z, r0=1e-6, v0=0.1))]
fn patch_potential(x: f64, y: f64, z: f64, r0: f64, v0: f64) -> PyResult<f64> {
    let cfg = PatchConfig { r0, v0 };
    cfg.validate().map_err(py_err)?;
    core_patch::patch_potential(x.hypot(y), z, &cfg).map_err(py_err)
}

/// Largest averaged patch torque for each measurement count; `mode` is "1d" or "2d".
#[pyfunction]
#[pyo3(signature = (n, mode="1d"))]
fn patch_suppression(py: Python<'_>, n: Vec<usize>, mode: &str) -> PyResult<Vec<(usize, f64)>> {
    let mode = match mode {
        "1d" => AverageMode::OneD,
        "2d" => AverageMode::TwoD,
        other => return Err(PyValueError::new_err(format!("unknown mode `{other}`"))),
    };
    let setup = PatchAveraging::default();
    let pol = core_trap::polarizability(&RodGeometry::default_silica(), catalog::silica().eps_static()).map_err(py_err)?;
    let rows = py.detach(|| core_patch::suppression_curve(&n, mode, &setup, &pol)).map_err(py_err)?;
    Ok(rows.into_iter().map(|r| (r.n, r.max_avg_torque)).collect())
}

/// Built-in dielectric parameters as plain dicts.
#[pyfunction]
fn materials(py: Python<'_>) -> PyResult<Bound<'_, PyAny>> {
    let plates = catalog::PLATES.iter().map(|p| catalog::plate(p)).collect::<Result<Vec<_>, _>>().map_err(py_err)?;
    let dump = serde_json::json!({ "plates": plates, "rods": [catalog::silica()], "gaps": [catalog::vacuum()] });
    json_to_py(py, &dump)
}

#[pymodule]
fn levitorque(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PySolver>()?;
    m.add_class::<PyCasimirResult>()?;
    m.add_class::<PyHarmonics>()?;
    m.add_class::<PyTrap>()?;
    m.add_function(wrap_pyfunction!(sensitivity, m)?)?;
    m.add_function(wrap_pyfunction!(simulate_pulse, m)?)?;
    m.add_function(wrap_pyfunction!(patch_field, m)?)?;
    m.add_function(wrap_pyfunction!(patch_potential, m)?)?;
    m.add_function(wrap_pyfunction!(patch_suppression, m)?)?;
    m.add_function(wrap_pyfunction!(materials, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
