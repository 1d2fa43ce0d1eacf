//! Python bindings: κ-trigonometry, the built-in spaces and the experiment runner.
//!
//! Points cross the boundary as `(r, phi)` tuples. Infinite coefficients
//! come back as `float("inf")`.

use alexandrov::cli::{execute, parse_config, report_json, validate};
use alexandrov::model_trig::{self, CdParams, Extended, Kappa, TriangleSides, Vertex};
use alexandrov::{Space, SpacePoint};
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

fn err<E: std::fmt::Display>(e: E) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn extended(x: Extended) -> f64 {
    match x {
        Extended::Finite(v) => v,
        Extended::PosInfinity => f64::INFINITY,
    }
}

fn cd(k: f64, n: f64) -> PyResult<CdParams> {
    CdParams::new(k, n).map_err(err)
}

#[pyfunction]
fn sn(kappa: f64, t: f64) -> f64 {
    model_trig::sn(Kappa(kappa), t)
}

#[pyfunction]
fn cs(kappa: f64, t: f64) -> f64 {
    model_trig::cs(Kappa(kappa), t)
}

/// Side opposite an angle `theta` between sides `b` and `c`.
#[pyfunction]
fn model_side(kappa: f64, b: f64, c: f64, theta: f64) -> PyResult<f64> {
    model_trig::model_side(Kappa(kappa), b, c, theta).map_err(err)
}

/// Angle at `vertex` ("p", "q" or "r") of the model triangle with sides |pq|, |qr|, |rp|.
#[pyfunction]
#[pyo3(signature = (kappa, pq, qr, rp, vertex = "p"))]
fn comparison_angle(kappa: f64, pq: f64, qr: f64, rp: f64, vertex: &str) -> PyResult<f64> {
    let v = match vertex {
        "p" | "P" => Vertex::P,
        "q" | "Q" => Vertex::Q,
        "r" | "R" => Vertex::R,
        other => {
            return Err(PyValueError::new_err(format!(
                "vertex must be p, q or r, got {other:?}"
            )))
        }
    };
    let sides = TriangleSides::new(Kappa(kappa), pq, qr, rp).map_err(err)?;
    model_trig::comparison_angle(Kappa(kappa), sides, v).map_err(err)
}

#[pyfunction]
fn sigma(k: f64, n: f64, t: f64, theta: f64) -> PyResult<f64> {
    Ok(extended(model_trig::sigma(cd(k, n)?, t, theta)))
}

#[pyfunction]
fn tau(k: f64, n: f64, t: f64, theta: f64) -> PyResult<f64> {
    Ok(extended(model_trig::tau(cd(k, n)?, t, theta)))
}

#[pyfunction]
fn bg_profile(k: f64, n: f64, r: f64) -> PyResult<f64> {
    model_trig::bg_profile(cd(k, n)?, r).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (k, n, big_r, eps = 1e-3))]
fn c_coeff(k: f64, n: f64, big_r: f64, eps: f64) -> PyResult<f64> {
    model_trig::c_coeff(cd(k, n)?, big_r, eps).map_err(err)
}

/// A model plane, Euclidean cone or spherical cone.
#[pyclass(name = "Space", frozen)]
struct PySpace(Space);

impl PySpace {
    fn pt(&self, x: (f64, f64)) -> PyResult<SpacePoint> {
        self.0.point(x.0, x.1).map_err(err)
    }
}

fn tuple(p: SpacePoint) -> (f64, f64) {
    (p.r, p.phi)
}

#[pymethods]
impl PySpace {
    #[staticmethod]
    fn model_plane(kappa: f64) -> PyResult<Self> {
        Space::model_plane(kappa).map(PySpace).map_err(err)
    }

    #[staticmethod]
    fn euclidean_cone(theta_total: f64) -> PyResult<Self> {
        Space::euclidean_cone(theta_total).map(PySpace).map_err(err)
    }

    #[staticmethod]
    fn spherical_cone(theta_total: f64) -> PyResult<Self> {
        Space::spherical_cone(theta_total).map(PySpace).map_err(err)
    }

    #[getter]
    fn theta_total(&self) -> f64 {
        self.0.theta_total()
    }

    #[getter]
    fn max_radius(&self) -> f64 {
        self.0.max_radius()
    }

    /// Lower curvature bound of the space.
    #[getter]
    fn curvature_bound(&self) -> f64 {
        self.0.curvature_lower_bound().0
    }

    fn point(&self, r: f64, phi: f64) -> PyResult<(f64, f64)> {
        self.pt((r, phi)).map(tuple)
    }

    fn dist(&self, x: (f64, f64), y: (f64, f64)) -> PyResult<f64> {
        self.0.distance(&self.pt(x)?, &self.pt(y)?).map_err(err)
    }

    fn exp(&self, x: (f64, f64), direction: f64, t: f64) -> PyResult<(f64, f64)> {
        self.0
            .exp(&self.pt(x)?, direction, t)
            .map(tuple)
            .map_err(err)
    }

    fn geodesic_point(&self, x: (f64, f64), y: (f64, f64), t: f64) -> PyResult<(f64, f64)> {
        self.0
            .geodesic_point(&self.pt(x)?, &self.pt(y)?, t)
            .map(tuple)
            .map_err(err)
    }

    #[pyo3(signature = (x, r, tol = 1e-10))]
    fn ball_volume(&self, x: (f64, f64), r: f64, tol: f64) -> PyResult<f64> {
        self.0.ball_volume(&self.pt(x)?, r, tol).map_err(err)
    }

    fn __repr__(&self) -> String {
        match self.0 {
            Space::ModelPlane { kappa } => format!("Space.model_plane({kappa})"),
            Space::EuclideanCone { theta_total } => format!("Space.euclidean_cone({theta_total})"),
            Space::SphericalCone { theta_total } => format!("Space.spherical_cone({theta_total})"),
        }
    }
}

/// `(field, message)` pairs; empty when the config is valid.
#[pyfunction]
fn validate_config(text: &str) -> Vec<(String, String)> {
    validate(text)
        .into_iter()
        .map(|d| (d.field, d.message))
        .collect()
}

/// Runs an experiment config in memory and returns the JSON report as a dict.
#[pyfunction]
fn run_experiment(py: Python<'_>, config: &str) -> PyResult<Py<PyAny>> {
    let cfg = parse_config(config).map_err(|d| {
        let lines: Vec<String> = d.iter().map(ToString::to_string).collect();
        PyValueError::new_err(lines.join("\n"))
    })?;
    let text = py
        .detach(|| execute(&cfg).map(|out| report_json(&cfg, &out)))
        .map_err(err)?;
    Ok(py.import("json")?.call_method1("loads", (text,))?.unbind())
}

#[pymodule]
fn alexandrov_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PySpace>()?;
    m.add_function(wrap_pyfunction!(sn, m)?)?;
    m.add_function(wrap_pyfunction!(cs, m)?)?;
    m.add_function(wrap_pyfunction!(model_side, m)?)?;
    m.add_function(wrap_pyfunction!(comparison_angle, m)?)?;
    m.add_function(wrap_pyfunction!(sigma, m)?)?;
    m.add_function(wrap_pyfunction!(tau, m)?)?;
    m.add_function(wrap_pyfunction!(bg_profile, m)?)?;
    m.add_function(wrap_pyfunction!(c_coeff, m)?)?;
    m.add_function(wrap_pyfunction!(validate_config, m)?)?;
    m.add_function(wrap_pyfunction!(run_experiment, m)?)?;
    Ok(())
}
