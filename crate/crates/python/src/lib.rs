//! Python module `leo_swarm`: scenarios, Monte Carlo runs and the
//! beamforming primitives of the `leo-swarm` crate.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex64;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use leo_swarm::beamforming::{self, BeamformingMatrix, Normalization};
use leo_swarm::channel::noise_power;
use leo_swarm::config::PRESETS;
use leo_swarm::simulation::{self, Simulator};
use leo_swarm::{ChannelMatrix, Mode, ReflectorAntenna, RunResults, ScenarioConfig};

fn py_err(e: leo_swarm::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn parse_mode(s: &str) -> PyResult<Mode> {
    s.parse().map_err(py_err)
}

fn to_matrix(rows: Vec<Vec<Complex64>>, what: &str) -> PyResult<DMatrix<Complex64>> {
    let n_rows = rows.len();
    let n_cols = rows.first().map_or(0, Vec::len);
    if n_rows == 0 || n_cols == 0 || rows.iter().any(|r| r.len() != n_cols) {
        return Err(PyValueError::new_err(format!("{what} must be a non-empty rectangular list of rows")));
    }
    Ok(DMatrix::from_fn(n_rows, n_cols, |i, j| rows[i][j]))
}

fn from_matrix(m: &DMatrix<Complex64>) -> Vec<Vec<Complex64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

/// A fully resolved scenario.
#[pyclass(name = "Scenario", module = "leo_swarm", from_py_object)]
#[derive(Clone)]
struct PyScenario {
    inner: ScenarioConfig,
}

#[pymethods]
impl PyScenario {
    #[new]
    #[pyo3(signature = (preset = "set-a-600", *, iterations = None, seed = None, rho = None, mode = None, workers = None))]
    fn new(
        preset: &str,
        iterations: Option<u64>,
        seed: Option<u64>,
        rho: Option<f64>,
        mode: Option<&str>,
        workers: Option<usize>,
    ) -> PyResult<Self> {
        let mut c = ScenarioConfig::preset(preset).map_err(py_err)?;
        if let Some(v) = iterations {
            c.iterations = v;
        }
        if let Some(v) = seed {
            c.seed = v;
        }
        if let Some(v) = rho {
            c.rho = v;
        }
        if let Some(m) = mode {
            c.normalization = parse_mode(m)?;
        }
        if let Some(v) = workers {
            c.workers = v;
        }
        c.validate().map_err(py_err)?;
        Ok(Self { inner: c })
    }

    #[staticmethod]
    fn from_toml(text: &str) -> PyResult<Self> {
        Ok(Self { inner: ScenarioConfig::from_toml_str(text).map_err(py_err)? })
    }

    fn to_toml(&self) -> String {
        self.inner.to_toml_string()
    }

    #[getter]
    fn iterations(&self) -> u64 {
        self.inner.iterations
    }

    #[getter]
    fn seed(&self) -> u64 {
        self.inner.seed
    }

    #[getter]
    fn rho(&self) -> f64 {
        self.inner.rho
    }

    #[getter]
    fn mode(&self) -> &'static str {
        self.inner.normalization.as_str()
    }

    #[getter]
    fn altitude_m(&self) -> f64 {
        self.inner.altitude_m
    }

    #[getter]
    fn antenna_set(&self) -> &'static str {
        self.inner.antenna_set.as_str()
    }

    /// Half-power half-beamwidth, rad.
    fn theta_3db(&self) -> PyResult<f64> {
        self.inner.reflector().and_then(|a| a.solve_theta_3db()).map_err(py_err)
    }

    /// Receiver noise power over one carrier, W.
    fn noise_power(&self) -> f64 {
        noise_power(&self.inner.link_params())
    }

    /// Per-satellite transmit power `P_t`, W.
    fn transmit_power(&self) -> f64 {
        self.inner.power_budget.transmit_power(&self.inner.link_params())
    }

    /// Runs the Monte Carlo campaign. All modes share the same drops.
    #[pyo3(signature = (modes = None))]
    fn run(&self, py: Python<'_>, modes: Option<Vec<String>>) -> PyResult<BTreeMap<String, PyRunResult>> {
        let modes = match modes {
            Some(list) => list.iter().map(|m| parse_mode(m)).collect::<PyResult<Vec<_>>>()?,
            None => vec![self.inner.normalization],
        };
        let config = self.inner.clone();
        let runs = py
            .detach(move || Simulator::new(&config).and_then(|s| s.run_modes(&modes)))
            .map_err(py_err)?;
        Ok(runs
            .into_iter()
            .map(|(m, r)| (m.as_str().to_string(), PyRunResult { inner: r }))
            .collect())
    }

    fn __repr__(&self) -> String {
        format!(
            "Scenario(set={}, altitude_km={}, mode={}, iterations={}, seed={})",
            self.inner.antenna_set.as_str(),
            self.inner.altitude_m / 1e3,
            self.inner.normalization,
            self.inner.iterations,
            self.inner.seed
        )
    }
}

/// Samples and statistics of one normalisation mode.
#[pyclass(name = "RunResult", module = "leo_swarm", frozen)]
struct PyRunResult {
    inner: RunResults,
}

#[pymethods]
impl PyRunResult {
    #[getter]
    fn mode(&self) -> &'static str {
        self.inner.mode.as_str()
    }

    #[getter]
    fn sinr_db(&self) -> Vec<f64> {
        self.inner.samples.iter().map(|s| s.sinr_db).collect()
    }

    #[getter]
    fn se(&self) -> Vec<f64> {
        self.inner.samples.iter().map(|s| s.se).collect()
    }

    /// Per-sample capacity, bit/s.
    #[getter]
    fn capacity(&self) -> Vec<f64> {
        self.inner.samples.iter().map(|s| s.capacity).collect()
    }

    #[getter]
    fn avg_capacity(&self) -> f64 {
        self.inner.avg_capacity
    }

    #[getter]
    fn per_satellite_power(&self) -> f64 {
        self.inner.per_satellite_power
    }

    #[getter]
    fn satellite_powers(&self) -> Vec<Vec<f64>> {
        self.inner.satellite_powers.clone()
    }

    #[getter]
    fn redraws(&self) -> u64 {
        self.inner.redraws
    }

    /// SINR in dB at probability `p` of the empirical CDF.
    fn percentile(&self, p: f64) -> PyResult<f64> {
        if !(0.0..=1.0).contains(&p) {
            return Err(PyValueError::new_err("p must lie in [0, 1]"));
        }
        Ok(self.inner.sinr_db_percentile(p))
    }

    fn iteration_mean_se(&self) -> Vec<f64> {
        self.inner.iteration_mean_se()
    }

    fn __len__(&self) -> usize {
        self.inner.samples.len()
    }

    fn __repr__(&self) -> String {
        format!(
            "RunResult(mode={}, samples={}, avg_capacity={:.1} kbit/s)",
            self.inner.mode,
            self.inner.samples.len(),
            self.inner.avg_capacity / 1e3
        )
    }
}

#[pyfunction]
fn presets() -> Vec<&'static str> {
    PRESETS.to_vec()
}

/// Reflector gain in dBi at off-boresight angle `theta` (rad).
#[pyfunction]
fn reflector_gain(theta: f64, diameter: f64, max_gain_dbi: f64, wavelength: f64) -> PyResult<f64> {
    ReflectorAntenna::new(diameter, max_gain_dbi, wavelength)
        .and_then(|a| a.reflector_gain(theta))
        .map_err(py_err)
}

#[pyfunction]
fn theta_3db(diameter: f64, max_gain_dbi: f64, wavelength: f64) -> PyResult<f64> {
    ReflectorAntenna::new(diameter, max_gain_dbi, wavelength)
        .and_then(|a| a.solve_theta_3db())
        .map_err(py_err)
}

/// Unnormalised MMSE precoder for the `users x satellites` channel `h`.
#[pyfunction]
fn mmse(h: Vec<Vec<Complex64>>, p_t: f64, noise_power: f64) -> PyResult<Vec<Vec<Complex64>>> {
    let h = ChannelMatrix::new(to_matrix(h, "h")?, noise_power).map_err(py_err)?;
    let w = beamforming::mmse_matrix(&h, p_t).map_err(py_err)?;
    Ok(from_matrix(&w.entries))
}

/// Precoder for `mode` (`pac`, `mpc` or `baseline`).
#[pyfunction]
fn precoder(h: Vec<Vec<Complex64>>, p_t: f64, noise_power: f64, mode: &str) -> PyResult<Vec<Vec<Complex64>>> {
    let h = ChannelMatrix::new(to_matrix(h, "h")?, noise_power).map_err(py_err)?;
    let w = beamforming::precoder(&h, p_t, parse_mode(mode)?).map_err(py_err)?;
    Ok(from_matrix(&w.entries))
}

/// SINR of every beam for channel `h` and precoder `w` at total power `tx_power`.
#[pyfunction]
fn sinr(h: Vec<Vec<Complex64>>, w: Vec<Vec<Complex64>>, tx_power: f64, noise_power: f64) -> PyResult<Vec<f64>> {
    let h = ChannelMatrix::new(to_matrix(h, "h")?, noise_power).map_err(py_err)?;
    let w = to_matrix(w, "w")?;
    if w.nrows() != h.n_satellites() || w.ncols() != h.n_users() {
        return Err(PyValueError::new_err("w must be satellites x beams, matching h"));
    }
    let w = BeamformingMatrix { entries: w, normalization: Normalization::Raw };
    Ok(simulation::sinr_all(&h, &w, tx_power))
}

#[pyfunction]
fn shannon_se(gamma: f64) -> f64 {
    simulation::shannon_se(gamma)
}

#[pymodule]
#[pyo3(name = "leo_swarm")]
fn leo_swarm_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyScenario>()?;
    m.add_class::<PyRunResult>()?;
    m.add_function(wrap_pyfunction!(presets, m)?)?;
    m.add_function(wrap_pyfunction!(reflector_gain, m)?)?;
    m.add_function(wrap_pyfunction!(theta_3db, m)?)?;
    m.add_function(wrap_pyfunction!(mmse, m)?)?;
    m.add_function(wrap_pyfunction!(precoder, m)?)?;
    m.add_function(wrap_pyfunction!(sinr, m)?)?;
    m.add_function(wrap_pyfunction!(shannon_se, m)?)?;
    Ok(())
}
