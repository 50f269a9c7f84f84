//! Python bindings: the eigenvalue solver, coefficient tables, feedback
//! laws, switched-system certificates, the V1 envelope, and the closed-loop
//! runner, exposed as plain functions plus a `Controller` class.

use ksic_core::coeffs;
use ksic_core::config::ExperimentConfig;
use ksic_core::control::{self, ControllerParams, PhaseSchedule};
use ksic_core::gronwall::{v1_envelope_bound, EnvelopeParams};
use ksic_core::runner::{self, RunOutcome, VerifyLevel};
use ksic_core::spectrum::{self, EigenProblem, Regime};
use ksic_core::switched::{self, CertificateReport, SwitchedParams};
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn value_err<E: std::fmt::Display>(e: E) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn runtime_err<E: std::fmt::Display>(e: E) -> PyErr {
    PyRuntimeError::new_err(e.to_string())
}

/// Smallest eigenvalue of the clamped problem z_xxxx + lambda z_xx = delta z
/// on [a, b].
#[pyfunction]
#[pyo3(signature = (lambda_, a=0.0, b=1.0, tol=1e-8))]
fn solve_delta_o(py: Python<'_>, lambda_: f64, a: f64, b: f64, tol: f64) -> PyResult<Py<PyDict>> {
    let problem = EigenProblem::new(lambda_, a, b).map_err(value_err)?;
    let r = spectrum::solve_delta_o(&problem, tol).map_err(runtime_err)?;
    let out = PyDict::new(py);
    out.set_item("delta_o", r.delta_o)?;
    out.set_item(
        "regime",
        match r.regime {
            Regime::OscillatoryBranch => "oscillatory",
            Regime::MixedBranch => "mixed",
        },
    )?;
    out.set_item("bracket", (r.bracket.0, r.bracket.1))?;
    out.set_item("residual", r.residual)?;
    Ok(out.into())
}

/// Finite-difference verification oracle for the same problem.
#[pyfunction]
#[pyo3(signature = (lambda_, a=0.0, b=1.0, n=2000))]
fn fd_eigen_oracle(lambda_: f64, a: f64, b: f64, n: usize) -> PyResult<f64> {
    let problem = EigenProblem::new(lambda_, a, b).map_err(value_err)?;
    spectrum::fd_eigen_oracle(&problem, n).map_err(runtime_err)
}

/// Boundary coefficient tables (a_zi, b_zi, c_zi) for i in {1,2,3} on [a, b].
#[pyfunction]
fn czi_table(py: Python<'_>, a: f64, b: f64) -> PyResult<Py<PyDict>> {
    if !(b > a) {
        return Err(PyValueError::new_err("need b > a"));
    }
    let t = coeffs::czi_table(a, b);
    let out = PyDict::new(py);
    for (name, form) in [("c1", t.c1), ("c2", t.c2), ("c3", t.c3)] {
        let f = PyDict::new(py);
        f.set_item("a", form.a)?;
        f.set_item("b", form.b)?;
        f.set_item("c", form.c)?;
        out.set_item(name, f)?;
    }
    Ok(out.into())
}

/// Split constants (delta1, delta2) = ((|d| - 2d)/3, (4|d| - 2d)/3).
#[pyfunction]
fn delta_split(delta: f64) -> (f64, f64) {
    let s = coeffs::delta_split(delta);
    (s.delta1, s.delta2)
}

/// Bridge cubic evaluation: (value, dx, dxx) at x.
#[pyfunction]
fn bridge_eval(za: f64, zb: f64, a: f64, b: f64, x: f64) -> PyResult<(f64, f64, f64)> {
    if !(b > a) {
        return Err(PyValueError::new_err("need b > a"));
    }
    let k = coeffs::bridge_poly(za, zb, a, b);
    Ok((k.value(x), k.dx(x), k.dxx(x)))
}

/// Positive root of beta^3 - 6 beta - 3 = 0 (latched-law slope).
#[pyfunction]
fn kappa2_beta() -> f64 {
    control::kappa2_beta()
}

/// Linearization offset b_o of the cubic comparison system.
#[pyfunction]
fn linearization_offset(delta1: f64, alpha2: f64) -> PyResult<f64> {
    if !(alpha2 > 0.0) {
        return Err(PyValueError::new_err("alpha2 must be positive"));
    }
    Ok(switched::linearization_offset(delta1, alpha2))
}

/// Dwell-time decay certificate (beta, ln kappa) for the switched pair.
#[pyfunction]
fn decay_certificate(
    py: Python<'_>,
    alpha1: f64,
    alpha2: f64,
    delta1: f64,
    delta2: f64,
    tbar1: f64,
    tbar2: f64,
) -> PyResult<Py<PyDict>> {
    let sched = PhaseSchedule::new(tbar1, tbar2).map_err(value_err)?;
    let params = SwitchedParams::new(alpha1, alpha2, delta1, delta2);
    match switched::decay_certificate(&params, &sched).map_err(value_err)? {
        CertificateReport::Decay { conditions_ok, rate_beta, overshoot_kappa, overshoot_kappa_ln } => {
            let out = PyDict::new(py);
            out.set_item("conditions_ok", conditions_ok)?;
            out.set_item("rate_beta", rate_beta)?;
            out.set_item("overshoot_kappa", overshoot_kappa)?;
            out.set_item("overshoot_kappa_ln", overshoot_kappa_ln)?;
            Ok(out.into())
        }
        _ => unreachable!(),
    }
}

/// Exact switched-pair trajectory [(t, V1, V2), ...].
#[pyfunction]
#[pyo3(signature = (v1, v2, alpha1, alpha2, delta1, delta2, tbar1, tbar2, periods=10, samples=10))]
#[allow(clippy::too_many_arguments)]
fn simulate_sigma3(
    v1: f64,
    v2: f64,
    alpha1: f64,
    alpha2: f64,
    delta1: f64,
    delta2: f64,
    tbar1: f64,
    tbar2: f64,
    periods: usize,
    samples: usize,
) -> PyResult<Vec<(f64, f64, f64)>> {
    let sched = PhaseSchedule::new(tbar1, tbar2).map_err(value_err)?;
    let params = SwitchedParams::new(alpha1, alpha2, delta1, delta2);
    Ok(switched::simulate_sigma3(v1, v2, &params, &sched, periods, samples))
}

/// Margin of the one-sided energy bound for a uniformly sampled function
/// with zero end slopes (nonnegative whenever delta is admissible).
#[pyfunction]
fn energy_bound_margin(values: Vec<f64>, a: f64, b: f64, lambda1: f64, delta: f64) -> PyResult<f64> {
    let z = coeffs::SampledFn::new(a, b, values).map_err(value_err)?;
    coeffs::energy_bound_margin(&z, lambda1, delta).map_err(runtime_err)
}

/// Windowed V1 bound from a piecewise-linear interface signal; returns the
/// bound sampled as [(t, bound), ...].
#[pyfunction]
#[pyo3(signature = (t0, dt, u2_values, v1_0, delta1, delta2, c, p_bound, n_panels=1024))]
#[allow(clippy::too_many_arguments)]
fn windowed_v1_bound(
    t0: f64,
    dt: f64,
    u2_values: Vec<f64>,
    v1_0: f64,
    delta1: f64,
    delta2: f64,
    c: f64,
    p_bound: f64,
    n_panels: usize,
) -> PyResult<Vec<(f64, f64)>> {
    if u2_values.len() < 2 || !(dt > 0.0) {
        return Err(PyValueError::new_err("need at least two samples and dt > 0"));
    }
    let u2 = ksic_core::gronwall::PiecewiseLinear::new(t0, dt, u2_values);
    let horizon = u2.t_end() - t0;
    let data = ksic_core::gronwall::GronwallData { t0, horizon, u2, delta1, delta2, c_coef: c, p_bound };
    let b = ksic_core::gronwall::windowed_v1_bound(&data, v1_0, n_panels);
    Ok(b.ts.into_iter().zip(b.bounds).collect())
}

/// Worst-case envelope propagation of the latched-controller comparison
/// system; returns a dict with the trajectory and recursion constants.
#[pyfunction]
#[pyo3(signature = (v1, v2, alpha1, alpha2, delta1, delta2, c, p_bound, tbar1, tbar2, periods=20))]
#[allow(clippy::too_many_arguments)]
fn simulate_sigma4(
    py: Python<'_>,
    v1: f64,
    v2: f64,
    alpha1: f64,
    alpha2: f64,
    delta1: f64,
    delta2: f64,
    c: f64,
    p_bound: f64,
    tbar1: f64,
    tbar2: f64,
    periods: usize,
) -> PyResult<Py<PyDict>> {
    let sched = PhaseSchedule::new(tbar1, tbar2).map_err(value_err)?;
    let params = SwitchedParams::new(alpha1, alpha2, delta1, delta2);
    let env = EnvelopeParams { delta1, delta2, c_coef: c, p_bound };
    let r = switched::simulate_sigma4(v1, v2, &params, &env, &sched, periods).map_err(value_err)?;
    let out = PyDict::new(py);
    out.set_item("trajectory", r.trajectory)?;
    out.set_item("b_o", r.b_o)?;
    out.set_item("q", r.q)?;
    out.set_item("p", r.p)?;
    out.set_item("limit", r.limit)?;
    out.set_item("residual_bound", r.residual_bound)?;
    out.set_item("recursion_violations", r.recursion_violations)?;
    Ok(out.into())
}

/// Closed V1 envelope over a measurement-free window.
#[pyfunction]
#[pyo3(signature = (horizon, v1_0, latched, delta1, delta2, c, p_bound))]
fn envelope(
    py: Python<'_>,
    horizon: f64,
    v1_0: f64,
    latched: f64,
    delta1: f64,
    delta2: f64,
    c: f64,
    p_bound: f64,
) -> PyResult<Py<PyDict>> {
    let params = EnvelopeParams { delta1, delta2, c_coef: c, p_bound };
    let r = v1_envelope_bound(horizon, v1_0, latched, &params);
    let out = PyDict::new(py);
    out.set_item("v1_envelope", r.v1_envelope)?;
    out.set_item("m1", r.m1)?;
    out.set_item("m2", r.m2)?;
    out.set_item("abar", r.abar)?;
    out.set_item("beta1", r.beta1)?;
    out.set_item("m1_limit_from_g2", r.m1_limit_from_g2)?;
    out.set_item("m1_limit_quoted", r.m1_limit_quoted)?;
    Ok(out.into())
}

/// All derived controller constants plus the three feedback laws.
#[pyclass]
struct Controller {
    params: ControllerParams,
}

#[pymethods]
impl Controller {
    #[new]
    #[pyo3(signature = (lambda1, y, l, alpha1, alpha2, delta=None))]
    fn new(lambda1: f64, y: f64, l: f64, alpha1: f64, alpha2: f64, delta: Option<f64>) -> PyResult<Self> {
        let params = ControllerParams::derive(lambda1, y, l, alpha1, alpha2, delta).map_err(value_err)?;
        Ok(Controller { params })
    }

    /// Boundary value at x = 0 during a [0, Y] measurement window.
    fn kappa1(&self, v1: f64, wxxx0: f64) -> PyResult<f64> {
        control::kappa1(v1, wxxx0, &self.params).map_err(runtime_err)
    }

    /// Boundary value at x = L (controller 1, [Y, L] window).
    fn kappa3(&self, v2: f64, vxxxl: f64) -> PyResult<f64> {
        control::kappa3(v2, vxxxl, &self.params).map_err(runtime_err)
    }

    /// Shared boundary value at x = 0 and x = Y (controller 2), from the
    /// latched magnitude alpha2^(1/3) V2(t_2k).
    fn kappa2(&self, latched: f64, vxxxy: f64) -> f64 {
        control::kappa2(latched, vxxxy, &self.params)
    }

    /// Branch threshold of the x = 0 law.
    fn l1(&self, v1: f64) -> f64 {
        control::l1(v1, &self.params)
    }

    /// Branch threshold of the x = L law.
    fn l3(&self, v2: f64) -> f64 {
        control::l3(v2, &self.params)
    }

    #[getter]
    fn delta(&self) -> f64 {
        self.params.delta
    }
    #[getter]
    fn delta1(&self) -> f64 {
        self.params.delta1
    }
    #[getter]
    fn delta2(&self) -> f64 {
        self.params.delta2
    }
    #[getter]
    fn b_coef(&self) -> f64 {
        self.params.b_coef
    }
    #[getter]
    fn c_coef(&self) -> f64 {
        self.params.c_coef
    }
    #[getter]
    fn p_bound(&self) -> f64 {
        self.params.p_bound
    }
    #[getter]
    fn l1_strengthened(&self) -> bool {
        self.params.l1_strengthened
    }
}

/// Run a closed-loop experiment from a JSON config string; returns a summary
/// dict (outcome, final/max W, recorded periods, envelope check).
#[pyfunction]
fn run_closed_loop(py: Python<'_>, config_json: &str) -> PyResult<Py<PyDict>> {
    let cfg: ExperimentConfig = serde_json::from_str(config_json).map_err(value_err)?;
    let out = runner::run_closed_loop(&cfg).map_err(runtime_err)?;
    let d = PyDict::new(py);
    match out.outcome {
        RunOutcome::Completed => {
            d.set_item("outcome", "completed")?;
        }
        RunOutcome::BlownUp { t } => {
            d.set_item("outcome", "blown_up")?;
            d.set_item("blowup_t", t)?;
        }
    }
    d.set_item("config_sha256", &out.config_hash)?;
    d.set_item("final_w", out.final_w())?;
    d.set_item("max_w", out.max_w())?;
    d.set_item("period_marks", out.period_marks.clone())?;
    d.set_item("cfl_warnings", out.cfl_warnings)?;
    if let Some(check) = out.envelope_check {
        let e = PyDict::new(py);
        e.set_item("windows", check.windows)?;
        e.set_item("violations", check.violations)?;
        e.set_item("max_ratio", check.max_ratio)?;
        d.set_item("envelope_check", e)?;
    }
    Ok(d.into())
}

/// Run the property-check suite ("fast" or "full"); returns
/// (passed, report_text).
#[pyfunction]
#[pyo3(signature = (level="fast"))]
fn verify(level: &str) -> PyResult<(bool, String)> {
    let level = match level {
        "fast" => VerifyLevel::Fast,
        "full" => VerifyLevel::Full,
        other => return Err(PyValueError::new_err(format!("level must be fast or full, got {other}"))),
    };
    let report = runner::run_verification_suite(level);
    Ok((report.passed(), runner::format_report(&report)))
}

#[pymodule]
fn ksic_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(solve_delta_o, m)?)?;
    m.add_function(wrap_pyfunction!(fd_eigen_oracle, m)?)?;
    m.add_function(wrap_pyfunction!(czi_table, m)?)?;
    m.add_function(wrap_pyfunction!(delta_split, m)?)?;
    m.add_function(wrap_pyfunction!(bridge_eval, m)?)?;
    m.add_function(wrap_pyfunction!(kappa2_beta, m)?)?;
    m.add_function(wrap_pyfunction!(linearization_offset, m)?)?;
    m.add_function(wrap_pyfunction!(decay_certificate, m)?)?;
    m.add_function(wrap_pyfunction!(simulate_sigma3, m)?)?;
    m.add_function(wrap_pyfunction!(simulate_sigma4, m)?)?;
    m.add_function(wrap_pyfunction!(energy_bound_margin, m)?)?;
    m.add_function(wrap_pyfunction!(windowed_v1_bound, m)?)?;
    m.add_function(wrap_pyfunction!(envelope, m)?)?;
    m.add_function(wrap_pyfunction!(run_closed_loop, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    m.add_class::<Controller>()?;
    Ok(())
}
