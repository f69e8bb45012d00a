//! Python bindings: parameters and closed-form spectra, point clouds,
//! estimators, measure oracles and the dictionary report.
//!
//! Structured results (dimension tables, reports, witnesses) are returned as
//! plain dicts. Errors map to `ValueError`, `OSError`, or the module's
//! `WindowError`, `OracleError` and `CapExceededError`.

use pyo3::create_exception;
use pyo3::exceptions::{PyOSError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;
use serde::de::DeserializeOwned;
use serde::Serialize;

use aslab::estimators::{
    assouad_dimension_estimate, assouad_spectrum_estimate, box_dimension_estimate,
    lower_dimension_estimate, lower_spectrum_estimate, measure_spectrum_estimate, DepthGrid,
    EstimateReport, EstimatorOptions, GridIndex,
};
use aslab::formulas::{
    default_theta_grid, general_spectrum_bounds, julia_dims, kleinian_dims, kleinian_measure_box,
    phase_transition_form, sullivan_dictionary_report, Mode, Params, SpectrumProfile, Target,
};
use aslab::generators::{
    decreasing_sequence, generate_preset, inverted_lattice, julia_preset_tags,
    kleinian_preset_tags, Preset, PresetOptions,
};
use aslab::Error;

create_exception!(
    aslab,
    WindowError,
    PyRuntimeError,
    "The scale window cannot support the estimate."
);
create_exception!(
    aslab,
    OracleError,
    PyRuntimeError,
    "A measure oracle cannot answer the query."
);
create_exception!(
    aslab,
    CapExceededError,
    PyRuntimeError,
    "Generation hit the point cap."
);

fn py_err(e: Error) -> PyErr {
    let msg = e.to_string();
    match e {
        Error::Window(_) => WindowError::new_err(msg),
        Error::Oracle(_) => OracleError::new_err(msg),
        Error::CapExceeded { .. } => CapExceededError::new_err(msg),
        Error::Io(_) => PyOSError::new_err(msg),
        _ => PyValueError::new_err(msg),
    }
}

fn to_py<'py, T: Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyValueError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

fn from_py<T: DeserializeOwned + Default>(
    py: Python<'_>,
    kwargs: Option<&Bound<'_, PyDict>>,
) -> PyResult<T> {
    let Some(kwargs) = kwargs else {
        return Ok(T::default());
    };
    let text: String = py
        .import("json")?
        .call_method1("dumps", (kwargs,))?
        .extract()?;
    serde_json::from_str(&text).map_err(|e| PyValueError::new_err(format!("bad options: {e}")))
}

fn parse_name<T: DeserializeOwned>(what: &str, name: &str) -> PyResult<T> {
    serde_json::from_value(serde_json::Value::String(name.to_string()))
        .map_err(|_| PyValueError::new_err(format!("unknown {what} '{name}'")))
}

/// Closed-form spectrum `θ ↦ dim^θ` with its endpoints.
#[pyclass(name = "Spectrum", module = "aslab", frozen)]
struct PySpectrum {
    inner: SpectrumProfile,
}

#[pymethods]
impl PySpectrum {
    fn __call__(&self, theta: f64) -> PyResult<f64> {
        self.inner.value(theta).map_err(py_err)
    }

    fn value(&self, theta: f64) -> PyResult<f64> {
        self.inner.value(theta).map_err(py_err)
    }

    fn values(&self, thetas: Vec<f64>) -> PyResult<Vec<f64>> {
        thetas
            .iter()
            .map(|&t| self.inner.value(t).map_err(py_err))
            .collect()
    }

    #[getter]
    fn mode(&self) -> &'static str {
        match self.inner.mode {
            Mode::Assouad => "assouad",
            Mode::Lower => "lower",
        }
    }

    #[getter]
    fn target(&self) -> &'static str {
        match self.inner.target {
            Target::Set => "set",
            Target::Measure => "measure",
        }
    }

    #[getter]
    fn box_dim(&self) -> f64 {
        self.inner.box_dim
    }

    #[getter]
    fn assouad_dim(&self) -> f64 {
        self.inner.assouad_dim
    }

    #[getter]
    fn lower_dim(&self) -> f64 {
        self.inner.lower_dim
    }

    #[getter]
    fn limit_at_zero(&self) -> f64 {
        self.inner.limit_at_zero()
    }

    #[getter]
    fn limit_at_one(&self) -> f64 {
        self.inner.limit_at_one()
    }

    /// `None` for a constant spectrum.
    #[getter]
    fn phase_transition(&self) -> Option<f64> {
        self.inner.phase_transition()
    }

    fn is_constant(&self) -> bool {
        self.inner.is_constant()
    }

    fn __repr__(&self) -> String {
        format!(
            "Spectrum({} {}, box={}, limit={})",
            self.target(),
            self.mode(),
            self.inner.limit_at_zero(),
            self.inner.limit_at_one()
        )
    }
}

fn spectrum_of(params: Params, target: &str, mode: &str) -> PyResult<PySpectrum> {
    let target: Target = parse_name("target", target)?;
    let mode: Mode = parse_name("mode", mode)?;
    Ok(PySpectrum {
        inner: params.profile(target, mode),
    })
}

/// Geometrically finite Kleinian group data: Poincaré exponent and cusp ranks.
#[pyclass(name = "KleinianParams", module = "aslab", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyKleinian {
    inner: aslab::formulas::KleinianParams,
}

#[pymethods]
impl PyKleinian {
    #[new]
    fn new(delta: f64, k_min: u32, k_max: u32) -> PyResult<Self> {
        aslab::formulas::KleinianParams::new(delta, k_min, k_max)
            .map(|inner| Self { inner })
            .map_err(py_err)
    }

    #[getter]
    fn delta(&self) -> f64 {
        self.inner.delta()
    }

    #[getter]
    fn k_min(&self) -> u32 {
        self.inner.k_min()
    }

    #[getter]
    fn k_max(&self) -> u32 {
        self.inner.k_max()
    }

    /// Assouad and lower dimensions of the limit set and of μ, plus δ.
    fn dims<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &kleinian_dims(&self.inner))
    }

    fn measure_box(&self) -> f64 {
        kleinian_measure_box(&self.inner)
    }

    #[pyo3(signature = (target = "set", mode = "assouad"))]
    fn spectrum(&self, target: &str, mode: &str) -> PyResult<PySpectrum> {
        spectrum_of(Params::Kleinian(self.inner), target, mode)
    }

    fn __repr__(&self) -> String {
        format!(
            "KleinianParams(delta={}, k_min={}, k_max={})",
            self.inner.delta(),
            self.inner.k_min(),
            self.inner.k_max()
        )
    }
}

/// Parabolic rational map data: Hausdorff dimension h and petal numbers.
#[pyclass(name = "JuliaParams", module = "aslab", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyJulia {
    inner: aslab::formulas::JuliaParams,
}

#[pymethods]
impl PyJulia {
    #[new]
    #[pyo3(signature = (h, p_min = 1, p_max = 1))]
    fn new(h: f64, p_min: u32, p_max: u32) -> PyResult<Self> {
        aslab::formulas::JuliaParams::new(h, p_min, p_max)
            .map(|inner| Self { inner })
            .map_err(py_err)
    }

    #[getter]
    fn h(&self) -> f64 {
        self.inner.h()
    }

    #[getter]
    fn p_min(&self) -> u32 {
        self.inner.p_min()
    }

    #[getter]
    fn p_max(&self) -> u32 {
        self.inner.p_max()
    }

    /// Assouad and lower dimensions of J and of m, plus the box dimension of m.
    fn dims<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &julia_dims(&self.inner))
    }

    #[pyo3(signature = (target = "set", mode = "assouad"))]
    fn spectrum(&self, target: &str, mode: &str) -> PyResult<PySpectrum> {
        spectrum_of(Params::Julia(self.inner), target, mode)
    }

    fn __repr__(&self) -> String {
        format!(
            "JuliaParams(h={}, p_min={}, p_max={})",
            self.inner.h(),
            self.inner.p_min(),
            self.inner.p_max()
        )
    }
}

/// One estimate with its witnessing ball and the regression rows.
#[pyclass(name = "Estimate", module = "aslab", frozen)]
struct PyEstimate {
    inner: EstimateReport,
}

#[pymethods]
impl PyEstimate {
    #[getter]
    fn kind(&self) -> &'static str {
        self.inner.kind.name()
    }

    #[getter]
    fn theta(&self) -> Option<f64> {
        self.inner.theta
    }

    #[getter]
    fn value(&self) -> f64 {
        self.inner.value
    }

    #[getter]
    fn raw_value(&self) -> f64 {
        self.inner.raw_value
    }

    #[getter]
    fn half_width(&self) -> f64 {
        self.inner.half_width
    }

    #[getter]
    fn witness<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &self.inner.witness)
    }

    /// The full report as a dict.
    fn to_dict<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &self.inner)
    }

    fn __float__(&self) -> f64 {
        self.inner.value
    }

    fn __repr__(&self) -> String {
        match self.inner.theta {
            Some(t) => format!(
                "Estimate({}, theta={t}, value={:.4} ± {:.4})",
                self.inner.kind.name(),
                self.inner.value,
                self.inner.half_width
            ),
            None => format!(
                "Estimate({}, value={:.4} ± {:.4})",
                self.inner.kind.name(),
                self.inner.value,
                self.inner.half_width
            ),
        }
    }
}

/// A finite point cloud with its resolution `eps_min`.
#[pyclass(name = "PointCloud", module = "aslab", frozen)]
struct PyCloud {
    inner: aslab::generators::PointCloud,
    cap_exceeded: bool,
}

impl PyCloud {
    fn wrap(inner: aslab::generators::PointCloud) -> Self {
        Self {
            inner,
            cap_exceeded: false,
        }
    }
}

#[pymethods]
impl PyCloud {
    /// Builds a cloud from a list of points (each a list of coordinates).
    #[new]
    #[pyo3(signature = (points, eps_min, provenance = "python"))]
    fn new(points: Vec<Vec<f64>>, eps_min: f64, provenance: &str) -> PyResult<Self> {
        let dim = points.first().map_or(0, Vec::len);
        if points.iter().any(|p| p.len() != dim) {
            return Err(PyValueError::new_err("points have differing dimensions"));
        }
        let coords = points.into_iter().flatten().collect();
        aslab::generators::PointCloud::new(dim, coords, eps_min, provenance)
            .map(Self::wrap)
            .map_err(py_err)
    }

    /// Runs a named preset; keyword arguments override its options
    /// (`n`, `depth`, `iterations`, `seeds`, `eps_proj`, `resolution`, `cap`, `seed`, ...).
    #[staticmethod]
    #[pyo3(signature = (preset, **options))]
    fn generate(
        py: Python<'_>,
        preset: &str,
        options: Option<&Bound<'_, PyDict>>,
    ) -> PyResult<Self> {
        let preset: Preset = preset.parse().map_err(py_err)?;
        let opts: PresetOptions = from_py(py, options)?;
        let g = py
            .detach(|| generate_preset(preset, &opts))
            .map_err(py_err)?;
        Ok(Self {
            inner: g.cloud,
            cap_exceeded: g.cap_exceeded,
        })
    }

    /// `{n^{-1/p} : 1 <= n <= N} ∪ {0}`.
    #[staticmethod]
    fn decreasing_sequence(p: f64, n: usize) -> PyResult<Self> {
        decreasing_sequence(p, n).map(Self::wrap).map_err(py_err)
    }

    /// `{v/|v|² : v ∈ Z^k, 0 < |v| <= N} ∪ {0}`.
    #[staticmethod]
    fn inverted_lattice(k: usize, n: usize) -> PyResult<Self> {
        inverted_lattice(k, n).map(Self::wrap).map_err(py_err)
    }

    /// Reads a CSV or binary cloud file.
    #[staticmethod]
    fn load(path: std::path::PathBuf) -> PyResult<Self> {
        aslab::generators::PointCloud::load(path)
            .map(Self::wrap)
            .map_err(py_err)
    }

    fn save_csv(&self, path: std::path::PathBuf) -> PyResult<()> {
        self.inner.save_csv(path).map_err(py_err)
    }

    fn save_binary(&self, path: std::path::PathBuf) -> PyResult<()> {
        self.inner.save_binary(path).map_err(py_err)
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    #[getter]
    fn eps_min(&self) -> f64 {
        self.inner.eps_min()
    }

    #[getter]
    fn provenance(&self) -> &str {
        self.inner.provenance()
    }

    #[getter]
    fn cap_exceeded(&self) -> bool {
        self.cap_exceeded
    }

    fn point(&self, i: usize) -> PyResult<Vec<f64>> {
        if i >= self.inner.len() {
            return Err(pyo3::exceptions::PyIndexError::new_err(format!(
                "point {i} out of range"
            )));
        }
        Ok(self.inner.point(i).to_vec())
    }

    fn points(&self) -> Vec<Vec<f64>> {
        self.inner.points().map(<[f64]>::to_vec).collect()
    }

    fn __repr__(&self) -> String {
        format!(
            "PointCloud({} points, dim={}, eps_min={:e})",
            self.inner.len(),
            self.inner.dim(),
            self.inner.eps_min()
        )
    }
}

/// Box-counting estimators over a dyadic index of one cloud. Keyword
/// arguments set estimator options (`safety`, `seed`, `min_ratio_levels`, ...).
#[pyclass(name = "Estimator", module = "aslab", frozen)]
struct PyEstimator {
    index: GridIndex,
    opts: EstimatorOptions,
}

#[pymethods]
impl PyEstimator {
    #[new]
    #[pyo3(signature = (cloud, **options))]
    fn new(py: Python<'_>, cloud: &PyCloud, options: Option<&Bound<'_, PyDict>>) -> PyResult<Self> {
        let opts: EstimatorOptions = from_py(py, options)?;
        let index = py.detach(|| GridIndex::new(&cloud.inner)).map_err(py_err)?;
        Ok(Self { index, opts })
    }

    /// `(r_min, r_max)` of the scale window in use.
    fn window(&self) -> PyResult<(f64, f64)> {
        let w = self.opts.window_for(&self.index).map_err(py_err)?;
        Ok((w.r_min, w.r_max))
    }

    fn box_dimension(&self, py: Python<'_>) -> PyResult<PyEstimate> {
        self.run(py, box_dimension_estimate)
    }

    fn assouad_spectrum(&self, py: Python<'_>, theta: f64) -> PyResult<PyEstimate> {
        self.run(py, |i, o| assouad_spectrum_estimate(i, theta, o))
    }

    fn lower_spectrum(&self, py: Python<'_>, theta: f64) -> PyResult<PyEstimate> {
        self.run(py, |i, o| lower_spectrum_estimate(i, theta, o))
    }

    fn assouad_dimension(&self, py: Python<'_>) -> PyResult<PyEstimate> {
        self.run(py, assouad_dimension_estimate)
    }

    fn lower_dimension(&self, py: Python<'_>) -> PyResult<PyEstimate> {
        self.run(py, lower_dimension_estimate)
    }
}

impl PyEstimator {
    fn run<F>(&self, py: Python<'_>, f: F) -> PyResult<PyEstimate>
    where
        F: FnOnce(&GridIndex, &EstimatorOptions) -> aslab::Result<EstimateReport> + Send,
    {
        py.detach(|| f(&self.index, &self.opts))
            .map(|inner| PyEstimate { inner })
            .map_err(py_err)
    }
}

/// Synthetic measure oracle built from the global measure formulae, with the
/// standard tag presets for the given parameters.
#[pyclass(name = "MeasureOracle", module = "aslab", frozen)]
struct PyOracle {
    inner: aslab::generators::MeasureOracle,
}

#[pymethods]
impl PyOracle {
    #[staticmethod]
    fn kleinian(params: &PyKleinian) -> PyResult<Self> {
        let p = params.inner;
        aslab::generators::MeasureOracle::synthetic_kleinian(p, kleinian_preset_tags(&p))
            .map(|inner| Self { inner })
            .map_err(py_err)
    }

    #[staticmethod]
    fn julia(params: &PyJulia) -> PyResult<Self> {
        let p = params.inner;
        aslab::generators::MeasureOracle::synthetic_julia(p, julia_preset_tags(&p))
            .map(|inner| Self { inner })
            .map_err(py_err)
    }

    /// Tag names, in evaluation order.
    fn tags(&self) -> Vec<String> {
        self.inner.tags().iter().map(|t| t.name.clone()).collect()
    }

    /// Natural log of the mass of the ball of radius `r` along tag `tag`.
    fn log_mass(&self, tag: usize, r: f64) -> PyResult<f64> {
        if tag >= self.inner.tags().len() {
            return Err(PyValueError::new_err(format!("no tag {tag}")));
        }
        self.inner.log_mass(tag, r).map_err(py_err)
    }

    #[pyo3(signature = (theta, mode = "assouad"))]
    fn measure_spectrum(&self, py: Python<'_>, theta: f64, mode: &str) -> PyResult<PyEstimate> {
        let mode: Mode = parse_name("mode", mode)?;
        let grid = DepthGrid::for_oracle(&self.inner);
        py.detach(|| measure_spectrum_estimate(&self.inner, theta, None, &grid, mode))
            .map(|inner| PyEstimate { inner })
            .map_err(py_err)
    }
}

/// The 33-point θ grid `0.03, 0.06, ..., 0.99`.
#[pyfunction(name = "default_theta_grid")]
fn py_default_theta_grid() -> Vec<f64> {
    default_theta_grid()
}

/// `min{box + (1−ρ)θ/((1−θ)ρ)(A − box), A}`.
#[pyfunction(name = "phase_transition_form")]
fn py_phase_transition_form(box_dim: f64, assouad: f64, rho: f64, theta: f64) -> PyResult<f64> {
    phase_transition_form(box_dim, assouad, rho, theta).map_err(py_err)
}

/// `(box, min{assouad, box/(1−θ)})`.
#[pyfunction(name = "general_spectrum_bounds")]
fn py_general_spectrum_bounds(box_dim: f64, assouad: f64, theta: f64) -> PyResult<(f64, f64)> {
    general_spectrum_bounds(box_dim, assouad, theta).map_err(py_err)
}

/// Valid parameter tuples including every branch seam.
#[pyfunction(name = "parameter_sweep")]
#[pyo3(signature = (n, seed = 0))]
fn py_parameter_sweep(n: usize, seed: u64) -> (Vec<PyKleinian>, Vec<PyJulia>) {
    let (k, j) = aslab::harness::parameter_sweep(n, seed);
    (
        k.into_iter().map(|inner| PyKleinian { inner }).collect(),
        j.into_iter().map(|inner| PyJulia { inner }).collect(),
    )
}

/// Dictionary entries and non-entries checked over parameter tuples.
#[pyfunction(name = "sullivan_dictionary_report")]
#[pyo3(signature = (kleinian, julia, thetas = None))]
fn py_dictionary_report<'py>(
    py: Python<'py>,
    kleinian: Vec<PyRef<'py, PyKleinian>>,
    julia: Vec<PyRef<'py, PyJulia>>,
    thetas: Option<Vec<f64>>,
) -> PyResult<Bound<'py, PyAny>> {
    let k: Vec<_> = kleinian.iter().map(|p| p.inner).collect();
    let j: Vec<_> = julia.iter().map(|p| p.inner).collect();
    let thetas = thetas.unwrap_or_else(default_theta_grid);
    let report = sullivan_dictionary_report(&k, &j, &thetas);
    let mut value =
        serde_json::to_value(&report).map_err(|e| PyValueError::new_err(e.to_string()))?;
    value["violations"] = report.violations().into();
    to_py(py, &value)
}

/// Runs the reduced-scale self-test and returns its report.
#[pyfunction(name = "selftest")]
fn py_selftest<'py>(py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
    let report = py.detach(|| aslab::harness::run_selftest(None));
    to_py(py, &report)
}

#[pymodule]
#[pyo3(name = "aslab")]
fn aslab_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_class::<PySpectrum>()?;
    m.add_class::<PyKleinian>()?;
    m.add_class::<PyJulia>()?;
    m.add_class::<PyEstimate>()?;
    m.add_class::<PyCloud>()?;
    m.add_class::<PyEstimator>()?;
    m.add_class::<PyOracle>()?;
    m.add_function(wrap_pyfunction!(py_default_theta_grid, m)?)?;
    m.add_function(wrap_pyfunction!(py_phase_transition_form, m)?)?;
    m.add_function(wrap_pyfunction!(py_general_spectrum_bounds, m)?)?;
    m.add_function(wrap_pyfunction!(py_parameter_sweep, m)?)?;
    m.add_function(wrap_pyfunction!(py_dictionary_report, m)?)?;
    m.add_function(wrap_pyfunction!(py_selftest, m)?)?;
    let py = m.py();
    m.add("WindowError", py.get_type::<WindowError>())?;
    m.add("OracleError", py.get_type::<OracleError>())?;
    m.add("CapExceededError", py.get_type::<CapExceededError>())?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_parse() {
        assert_eq!(parse_name::<Mode>("mode", "lower").unwrap(), Mode::Lower);
        assert_eq!(
            parse_name::<Target>("target", "measure").unwrap(),
            Target::Measure
        );
        assert!(parse_name::<Mode>("mode", "upper").is_err());
    }

    #[test]
    fn spectrum_wrapper_matches_core() {
        let k = PyKleinian::new(0.6, 1, 1).unwrap();
        let s = k.spectrum("set", "assouad").unwrap();
        assert!((s.value(0.25).unwrap() - (0.6 + 0.4 / 3.0)).abs() < 1e-12);
        assert_eq!(s.phase_transition(), Some(0.5));
        assert!(s.value(1.0).is_err());
        assert!(PyJulia::new(0.5, 1, 2).is_err());
    }
}
