//! Python bindings: margins, witness checks, schedule certificates and the CLI commands.

use std::collections::BTreeMap;

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use madcantor::arith::{ExactReal, QuadraticSurd, Theta, parse_rational_literal, rational_to_string};
use madcantor::cantor::{bv4_check as bv4, dim_lower_bound as dim, CantorSchedule};
use madcantor::cli;
use madcantor::oracle;

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn real(s: &str) -> PyResult<ExactReal> {
    s.parse().map_err(value_err)
}

fn loads<'py>(py: Python<'py>, text: &str) -> PyResult<Bound<'py, PyAny>> {
    py.import("json")?.call_method1("loads", (text,))
}

/// Certified rational lower bound for inf q‖qθ‖, as "p/q".
#[pyfunction]
fn c_lower_bound(theta: &str) -> PyResult<String> {
    let s: QuadraticSurd = theta.parse().map_err(value_err)?;
    Ok(rational_to_string(Theta::new(s).c_lb()))
}

/// min over q ≤ N of f(q)·q·‖qα‖·‖qβ‖ as a dict with margin bounds and argmin.
#[pyfunction]
fn point_margin<'py>(py: Python<'py>, alpha: &str, beta: &str, n: u64) -> PyResult<Bound<'py, PyAny>> {
    if n == 0 {
        return Err(PyValueError::new_err("N must be positive"));
    }
    let m = oracle::point_margin(&real(alpha)?, &real(beta)?, n);
    loads(py, &serde_json::to_string(&m.to_json()).map_err(value_err)?)
}

#[pyfunction]
fn line_margin<'py>(py: Python<'py>, alpha: &str, beta: &str, a_max: u64, b_max: u64) -> PyResult<Bound<'py, PyAny>> {
    if a_max == 0 || b_max == 0 {
        return Err(PyValueError::new_err("Amax and Bmax must be positive"));
    }
    let m = oracle::line_margin(&real(alpha)?, &real(beta)?, a_max, b_max);
    loads(py, &serde_json::to_string(&m.to_json()).map_err(value_err)?)
}

#[pyfunction]
#[pyo3(signature = (theta, lo, hi, c, n=1_000_000, a_max=1000, b_max=1000))]
fn verify_witness<'py>(
    py: Python<'py>,
    theta: &str,
    lo: &str,
    hi: &str,
    c: &str,
    n: u64,
    a_max: u64,
    b_max: u64,
) -> PyResult<Bound<'py, PyAny>> {
    let s: QuadraticSurd = theta.parse().map_err(value_err)?;
    let rat = |x: &str| parse_rational_literal(x).map_err(value_err);
    let rep = oracle::verify_witness(&s, &rat(lo)?, &rat(hi)?, &rat(c)?, n, a_max, b_max);
    loads(py, &serde_json::to_string(&rep).map_err(value_err)?)
}

/// (all_pass, max_ratio) for the growing schedule with base R over n_min..=n_max.
#[pyfunction]
fn bv4_check(r: u64, n_min: u64, n_max: u64) -> PyResult<(bool, f64)> {
    let cert = bv4(&CantorSchedule::growing(r), n_min, n_max, Default::default()).map_err(value_err)?;
    Ok((cert.all_pass, cert.max_ratio))
}

/// Enclosure of inf over n ≤ n_max of 1 − ln 2 / ln R_n for the growing schedule.
#[pyfunction]
fn dim_lower_bound(r: u64, n_max: u64) -> (f64, f64, bool) {
    let d = dim(&CantorSchedule::growing(r), n_max);
    (d.inf_lo, d.inf_hi, d.monotone)
}

/// Runs a CLI command with the given settings; returns (exit code, output text).
/// Errors carry the CLI exit code in their message.
#[pyfunction]
fn run_command(command: &str, config: BTreeMap<String, String>) -> PyResult<(i32, String)> {
    let mut flags: Vec<(String, String)> = config.into_iter().collect();
    flags.retain(|(k, _)| k != "output");
    let cfg = cli::resolve(command, &[], &flags).map_err(|e| value_err(format!("[exit {}] {}", e.code, e)))?;
    let out = match command {
        "params" => cli::cmd_params(&cfg),
        "construct" => cli::cmd_construct(&cfg),
        "verify" => cli::cmd_verify(&cfg),
        "scan" => cli::cmd_scan(&cfg),
        "check-schedule" => cli::cmd_check_schedule(&cfg),
        "duality" => cli::cmd_duality(&cfg),
        other => return Err(PyValueError::new_err(format!("unknown command {other}"))),
    };
    match out {
        Ok(o) => Ok((o.code, o.text)),
        Err(e) => Err(PyRuntimeError::new_err(format!("[exit {}] {}", e.code, e))),
    }
}

#[pymodule]
#[pyo3(name = "madcantor")]
fn madcantor_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", cli::VERSION)?;
    m.add_function(wrap_pyfunction!(c_lower_bound, m)?)?;
    m.add_function(wrap_pyfunction!(point_margin, m)?)?;
    m.add_function(wrap_pyfunction!(line_margin, m)?)?;
    m.add_function(wrap_pyfunction!(verify_witness, m)?)?;
    m.add_function(wrap_pyfunction!(bv4_check, m)?)?;
    m.add_function(wrap_pyfunction!(dim_lower_bound, m)?)?;
    m.add_function(wrap_pyfunction!(run_command, m)?)?;
    Ok(())
}
