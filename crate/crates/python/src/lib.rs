//! Python bindings: `import linsan`.

use pyo3::exceptions::{PyKeyError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use linsan_core as core;
use linsan_core::{Alpha, Alphabet, Dist, DistortionMatrix, Error, Family, LogBase};

fn to_py(e: Error) -> PyErr {
    match e {
        Error::UnknownLabel(_) => PyKeyError::new_err(e.to_string()),
        Error::LpInfeasible(_) | Error::Lp(_) => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn base(name: &str) -> PyResult<LogBase> {
    name.parse().map_err(PyValueError::new_err)
}

fn alpha(v: f64) -> PyResult<Alpha> {
    Alpha::new(v).map_err(to_py)
}

fn markov_from(j: &core::JointDistribution, rows: Vec<Vec<f64>>) -> PyResult<core::MarkovMechanism> {
    core::MarkovMechanism::from_rows(j.x_alphabet().clone(), rows).map_err(to_py)
}

/// Joint law of a secret `S` and a record `X`.
#[pyclass(name = "JointDistribution", module = "linsan", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyJoint {
    inner: core::JointDistribution,
}

#[pymethods]
impl PyJoint {
    /// From a full joint matrix `p[s][x]`.
    #[staticmethod]
    fn from_joint(s_labels: Vec<String>, x_labels: Vec<String>, p: Vec<Vec<f64>>) -> PyResult<Self> {
        let s = Alphabet::new(s_labels).map_err(to_py)?;
        let x = Alphabet::new(x_labels).map_err(to_py)?;
        let inner = core::JointDistribution::from_joint(s, x, p).map_err(to_py)?;
        Ok(PyJoint { inner })
    }

    /// From conditional rows `P_{X|S}` and a prior `P_S`.
    #[staticmethod]
    fn from_conditional(
        s_labels: Vec<String>,
        x_labels: Vec<String>,
        conditional: Vec<Vec<f64>>,
        p_s: Vec<f64>,
    ) -> PyResult<Self> {
        let s = Alphabet::new(s_labels).map_err(to_py)?;
        let x = Alphabet::new(x_labels).map_err(to_py)?;
        let prior = Dist::new(p_s).map_err(to_py)?;
        let inner = core::JointDistribution::from_conditional(s, x, &conditional, &prior).map_err(to_py)?;
        Ok(PyJoint { inner })
    }

    /// Parses any supported text format; `format` is "joint", "conditional" or "records".
    #[staticmethod]
    #[pyo3(signature = (text, format=None))]
    fn from_text(text: &str, format: Option<&str>) -> PyResult<Self> {
        let format = format
            .map(|f| f.parse::<core::formats::InputFormat>().map_err(PyValueError::new_err))
            .transpose()?;
        let inner = core::formats::load_joint(text, format).map_err(to_py)?;
        Ok(PyJoint { inner })
    }

    /// The built-in two-secret, four-symbol dataset.
    #[staticmethod]
    fn demo() -> Self {
        PyJoint { inner: core::demo::joint() }
    }

    #[getter]
    fn s_labels(&self) -> Vec<String> {
        self.inner.s_alphabet().labels().to_vec()
    }

    #[getter]
    fn x_labels(&self) -> Vec<String> {
        self.inner.x_alphabet().labels().to_vec()
    }

    #[getter]
    fn matrix(&self) -> Vec<Vec<f64>> {
        self.inner.matrix().clone()
    }

    #[getter]
    fn marginal_s(&self) -> Vec<f64> {
        self.inner.marginal_s().values().to_vec()
    }

    #[getter]
    fn marginal_x(&self) -> Vec<f64> {
        self.inner.marginal_x().values().to_vec()
    }

    /// Rows `P_{X|S}(.|s)`.
    fn conditional(&self) -> Vec<Vec<f64>> {
        self.inner.cond_x_given_s()
    }

    #[pyo3(signature = (base="bits"))]
    fn ldp(&self, base: &str) -> PyResult<f64> {
        Ok(core::ldp_in(&core::SoftChannel::original(&self.inner), self::base(base)?))
    }

    /// `(value, (y_label, s_label) or None)`.
    #[pyo3(signature = (base="bits"))]
    fn log_lift(&self, base: &str) -> PyResult<(f64, Option<(String, String)>)> {
        let ll = core::log_lift_in(&core::SoftChannel::original(&self.inner), self.inner.marginal_s(), self::base(base)?);
        Ok((ll.value, self.witness(ll.witness)))
    }

    fn to_csv(&self) -> String {
        core::formats::write_joint(&self.inner)
    }

    fn __repr__(&self) -> String {
        format!(
            "JointDistribution(s={:?}, x={:?})",
            self.inner.s_alphabet().labels(),
            self.inner.x_alphabet().labels()
        )
    }
}

impl PyJoint {
    fn witness(&self, w: Option<(usize, usize)>) -> Option<(String, String)> {
        w.map(|(y, s)| {
            (
                self.inner.x_alphabet().label(y).to_string(),
                self.inner.s_alphabet().label(s).to_string(),
            )
        })
    }
}

/// A randomization `P_{Y|S,X}`, indexed `[s][x_in][y]`.
#[pyclass(name = "Mechanism", module = "linsan", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyMechanism {
    inner: core::Mechanism,
}

#[pymethods]
impl PyMechanism {
    #[new]
    fn new(s_labels: Vec<String>, x_labels: Vec<String>, tensor: Vec<Vec<Vec<f64>>>) -> PyResult<Self> {
        let s = Alphabet::new(s_labels).map_err(to_py)?;
        let x = Alphabet::new(x_labels).map_err(to_py)?;
        Ok(PyMechanism { inner: core::Mechanism::from_tensor(s, x, tensor).map_err(to_py)? })
    }

    /// Reads the mechanism CSV written by `to_csv` or the command-line tool.
    #[staticmethod]
    fn from_csv(text: &str) -> PyResult<Self> {
        Ok(PyMechanism { inner: core::formats::parse_mechanism(text).map_err(to_py)?.mechanism })
    }

    #[getter]
    fn tensor(&self) -> Vec<Vec<Vec<f64>>> {
        self.inner.tensor().to_vec()
    }

    #[getter]
    fn s_labels(&self) -> Vec<String> {
        self.inner.s_alphabet().labels().to_vec()
    }

    #[getter]
    fn x_labels(&self) -> Vec<String> {
        self.inner.x_alphabet().labels().to_vec()
    }

    /// `P(y | s, x_in)` by label.
    fn prob(&self, y: &str, s: &str, x_in: &str) -> PyResult<f64> {
        let xs = self.inner.x_alphabet();
        let si = self.inner.s_alphabet().require(s).map_err(to_py)?;
        Ok(self.inner.prob(xs.require(y).map_err(to_py)?, si, xs.require(x_in).map_err(to_py)?))
    }

    #[pyo3(signature = (alpha, family, input_sha256=""))]
    fn to_csv(&self, alpha: f64, family: &str, input_sha256: &str) -> PyResult<String> {
        let family: Family = family.parse().map_err(PyValueError::new_err)?;
        let meta = core::formats::MechanismMeta::new(alpha, family, input_sha256);
        Ok(core::formats::write_mechanism(&self.inner, &meta))
    }
}

/// Rows `P_{Y|S}(.|s)` of the reduced channel.
#[pyfunction]
fn linear_reduce(j: &PyJoint, alpha: f64) -> PyResult<Vec<Vec<f64>>> {
    Ok(core::linear_reduce(&j.inner, self::alpha(alpha)?).rows().clone())
}

/// `(ldp, log_lift)` of the reduced channel.
#[pyfunction]
#[pyo3(signature = (j, alpha, base="bits"))]
fn reduced_privacy(j: &PyJoint, alpha: f64, base: &str) -> PyResult<(f64, f64)> {
    let r = core::PrivacyReport::of_reduction(&j.inner, self::alpha(alpha)?, self::base(base)?);
    Ok((r.ldp, r.log_lift))
}

/// Rows `P_{Y|X}(.|x)` of the S-blind mechanism.
#[pyfunction]
fn markov_mechanism(j: &PyJoint, alpha: f64) -> PyResult<Vec<Vec<f64>>> {
    let m = core::markov_mechanism(j.inner.x_alphabet(), j.inner.marginal_x(), self::alpha(alpha)?).map_err(to_py)?;
    Ok(m.rows().clone())
}

#[pyfunction]
fn tv_optimal_mechanism(j: &PyJoint, alpha: f64) -> PyResult<PyMechanism> {
    Ok(PyMechanism { inner: core::tv_optimal_mechanism(&j.inner, self::alpha(alpha)?) })
}

#[pyfunction]
fn distortion_optimal_mechanism(j: &PyJoint, alpha: f64, distortion: Vec<Vec<f64>>) -> PyResult<PyMechanism> {
    let d = DistortionMatrix::new(distortion).map_err(to_py)?;
    let inner = core::distortion_optimal_mechanism(&j.inner, self::alpha(alpha)?, &d).map_err(to_py)?;
    Ok(PyMechanism { inner })
}

/// Rows `P_{Y|X}(.|x)` obtained by averaging the mechanism over `P_{S|X}`.
#[pyfunction]
fn induced_channel(m: &PyMechanism, j: &PyJoint) -> PyResult<Vec<Vec<f64>>> {
    Ok(core::induced_channel(&m.inner, &j.inner).map_err(to_py)?.rows().clone())
}

/// Residuals of the realization check plus an overall `passes` flag.
#[pyfunction]
fn verify_realization<'py>(py: Python<'py>, m: &PyMechanism, j: &PyJoint, alpha: f64) -> PyResult<Bound<'py, PyDict>> {
    let r = core::verify_realization(&m.inner, &j.inner, self::alpha(alpha)?).map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("constraint_residual", r.constraint_residual)?;
    d.set_item("stochastic_residual", r.stochastic_residual)?;
    d.set_item("min_entry", r.min_entry)?;
    d.set_item("passes", r.passes())?;
    Ok(d)
}

/// `(half, full)` total variation of a channel `P_{Y|X}` to the identity.
#[pyfunction]
fn dtv(j: &PyJoint, channel: Vec<Vec<f64>>) -> PyResult<(f64, f64)> {
    Ok(core::dtv(&markov_from(&j.inner, channel)?, j.inner.marginal_x()))
}

#[pyfunction]
#[pyo3(signature = (j, channel, base="bits"))]
fn mutual_information(j: &PyJoint, channel: Vec<Vec<f64>>, base: &str) -> PyResult<f64> {
    let m = markov_from(&j.inner, channel)?;
    Ok(core::mutual_information(&m, j.inner.marginal_x(), self::base(base)?))
}

#[pyfunction]
#[pyo3(signature = (p, base="bits"))]
fn entropy(p: Vec<f64>, base: &str) -> PyResult<f64> {
    Ok(core::entropy(&Dist::new(p).map_err(to_py)?, self::base(base)?))
}

/// One dict per `(family, alpha)`; `grid` is a list of floats or a grid string.
#[pyfunction]
#[pyo3(signature = (j, grid, families=None, distortion=None, base="bits"))]
fn sweep<'py>(
    py: Python<'py>,
    j: &PyJoint,
    grid: Bound<'py, PyAny>,
    families: Option<Vec<String>>,
    distortion: Option<Vec<Vec<f64>>>,
    base: &str,
) -> PyResult<Vec<Bound<'py, PyDict>>> {
    let grid = match grid.extract::<String>() {
        Ok(spec) => core::parse_grid(&spec).map_err(to_py)?,
        Err(_) => grid.extract::<Vec<f64>>()?.into_iter().map(self::alpha).collect::<PyResult<_>>()?,
    };
    let d = distortion.map(DistortionMatrix::new).transpose().map_err(to_py)?;
    let families: Vec<Family> = match families {
        Some(f) => f.iter().map(|s| s.parse().map_err(PyValueError::new_err)).collect::<PyResult<_>>()?,
        None if d.is_some() => Family::ALL.to_vec(),
        None => vec![Family::Markov, Family::NonmarkovTv],
    };
    let base = self::base(base)?;
    let inner = j.inner.clone();
    let points = py
        .detach(move || core::sweep(&inner, &grid, &families, d.as_ref(), base))
        .map_err(to_py)?;
    points
        .into_iter()
        .map(|p| {
            let d = PyDict::new(py);
            d.set_item("alpha", p.alpha)?;
            d.set_item("ldp_y", p.ldp_y)?;
            d.set_item("loglift_y", p.loglift_y)?;
            d.set_item("ldp_approx", p.ldp_approx)?;
            d.set_item("loglift_approx", p.loglift_approx)?;
            d.set_item("dtv_half", p.dtv_half)?;
            d.set_item("dtv_full", p.dtv_full)?;
            d.set_item("expected_distortion", p.expected_distortion)?;
            d.set_item("mi", p.mi)?;
            d.set_item("utility_loss", p.utility_loss)?;
            d.set_item("family", p.family.to_string())?;
            Ok(d)
        })
        .collect()
}

/// Draws one output label per `(s, x)` record with a seeded generator.
#[pyfunction]
fn sanitize(m: &PyMechanism, records: Vec<(String, String)>, seed: u64) -> PyResult<Vec<String>> {
    let records: Vec<core::Record> = records.into_iter().map(|(s, x)| core::Record::new(s, x)).collect();
    core::SanitizerState::new(m.inner.clone(), seed).sanitize(&records).map_err(to_py)
}

#[pymodule]
fn linsan(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyJoint>()?;
    m.add_class::<PyMechanism>()?;
    m.add_function(wrap_pyfunction!(linear_reduce, m)?)?;
    m.add_function(wrap_pyfunction!(reduced_privacy, m)?)?;
    m.add_function(wrap_pyfunction!(markov_mechanism, m)?)?;
    m.add_function(wrap_pyfunction!(tv_optimal_mechanism, m)?)?;
    m.add_function(wrap_pyfunction!(distortion_optimal_mechanism, m)?)?;
    m.add_function(wrap_pyfunction!(induced_channel, m)?)?;
    m.add_function(wrap_pyfunction!(verify_realization, m)?)?;
    m.add_function(wrap_pyfunction!(dtv, m)?)?;
    m.add_function(wrap_pyfunction!(mutual_information, m)?)?;
    m.add_function(wrap_pyfunction!(entropy, m)?)?;
    m.add_function(wrap_pyfunction!(sweep, m)?)?;
    m.add_function(wrap_pyfunction!(sanitize, m)?)?;
    m.add("RNG", core::sanitize::RNG_ID)?;
    Ok(())
}
