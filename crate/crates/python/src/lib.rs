//! Python bindings: thin wrappers over the solver library returning plain
//! lists/dicts so no Python-side dependencies are needed.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use shiftfem::{
    build_fespace, convergence_study, frozen_problem, make_weight, solve_stationary,
    validate_weight as validate_weight_rs, MeshConfig, MeshFamily, ProblemSpec, StudyConfig,
    StudyKind, WeightKind,
};

fn err<E: std::fmt::Display>(e: E) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn parse_family(family: &str) -> PyResult<MeshFamily> {
    match family {
        "shishkin" => Ok(MeshFamily::Shishkin),
        "bakhvalov-s" | "bakhvalov_s" => Ok(MeshFamily::BakhvalovS),
        "duran" => Ok(MeshFamily::Duran),
        other => Err(err(format!("unknown mesh family {other:?}"))),
    }
}

fn parse_weight(weight: &str) -> PyResult<WeightKind> {
    match weight {
        "energy" => Ok(WeightKind::Energy),
        "balanced" => Ok(WeightKind::Balanced),
        other => Err(err(format!("unknown weight {other:?}"))),
    }
}

fn mesh_config(
    family: &str,
    n: usize,
    epsilon: f64,
    sigma: f64,
    alpha: f64,
    h_grading: Option<f64>,
) -> PyResult<MeshConfig> {
    Ok(match parse_family(family)? {
        MeshFamily::Duran => MeshConfig::duran(
            h_grading.ok_or_else(|| err("duran family requires h_grading"))?,
            epsilon,
        ),
        fam => MeshConfig::stype(fam, n, sigma, alpha, epsilon),
    })
}

/// Node coordinates of a layer-adapted mesh.
#[pyfunction]
#[pyo3(signature = (family, n, epsilon, sigma=2.0, alpha=1.0, h_grading=None))]
fn mesh_nodes(
    family: &str,
    n: usize,
    epsilon: f64,
    sigma: f64,
    alpha: f64,
    h_grading: Option<f64>,
) -> PyResult<Vec<f64>> {
    let mesh = mesh_config(family, n, epsilon, sigma, alpha, h_grading)?.build().map_err(err)?;
    Ok(mesh.nodes().to_vec())
}

/// Check the weight-function conditions; returns a dict with the report.
#[pyfunction]
#[pyo3(signature = (weight, epsilon, alpha, n_samples=1000))]
fn validate_weight(
    py: Python<'_>,
    weight: &str,
    epsilon: f64,
    alpha: f64,
    n_samples: usize,
) -> PyResult<Py<PyDict>> {
    let w = make_weight(parse_weight(weight)?, epsilon, alpha);
    let report = validate_weight_rs(&w, n_samples);
    let d = PyDict::new(py);
    d.set_item("min_value", report.min_value)?;
    d.set_item("max_derivative_ratio", report.max_derivative_ratio)?;
    d.set_item("integral", report.integral)?;
    d.set_item("pass", report.pass)?;
    Ok(d.into())
}

fn example_problem(epsilon: f64, phi: &str) -> PyResult<ProblemSpec> {
    match phi {
        "zero" => Ok(ProblemSpec::reference_example(epsilon, |_| 0.0)),
        "quadratic" => Ok(ProblemSpec::reference_example(epsilon, |s| 3.0 * s * s)),
        other => Err(err(format!("unknown history profile {other:?}"))),
    }
}

/// Solve the built-in stationary problem; returns (x, u) sample arrays.
#[pyfunction]
#[pyo3(signature = (n, k=1, epsilon=1e-4, weight="energy", phi="zero", samples_per_cell=2))]
fn solve_stationary_example(
    n: usize,
    k: usize,
    epsilon: f64,
    weight: &str,
    phi: &str,
    samples_per_cell: usize,
) -> PyResult<(Vec<f64>, Vec<f64>)> {
    let problem = example_problem(epsilon, phi)?;
    let mc = mesh_config("shishkin", n, epsilon, (k + 1) as f64, problem.alpha, None)?;
    let space = build_fespace(mc.build().map_err(err)?, k).map_err(err)?;
    let w = make_weight(parse_weight(weight)?, epsilon, problem.alpha);
    let coeffs = frozen_problem(&problem, 0.0);
    let sol = solve_stationary(&space, &coeffs, &w).map_err(err)?;
    let mut xs = Vec::new();
    let mut us = Vec::new();
    let mesh = &sol.field.space.mesh;
    for c in 0..mesh.n_cells() {
        let (xl, xr) = mesh.cell(c);
        let m = k + samples_per_cell;
        for i in 0..m {
            let x = xl + (xr - xl) * i as f64 / m as f64;
            xs.push(x);
            us.push(sol.field.value(x));
        }
    }
    xs.push(2.0);
    us.push(sol.field.value(2.0));
    Ok((xs, us))
}

/// Run a convergence study on the built-in problem; returns a dict of
/// column lists (n, err_l2, err_energy, l2_rates, energy_rates).
#[pyfunction]
#[pyo3(signature = (kind, n_values, k=1, epsilon=1e-4, weight="energy", phi="zero",
                    family="shishkin"))]
#[allow(clippy::too_many_arguments)]
fn study(
    py: Python<'_>,
    kind: &str,
    n_values: Vec<usize>,
    k: usize,
    epsilon: f64,
    weight: &str,
    phi: &str,
    family: &str,
) -> PyResult<Py<PyDict>> {
    let kind = match kind {
        "interpolation" => StudyKind::Interpolation,
        "stationary" => StudyKind::Stationary,
        "parabolic" => StudyKind::Parabolic,
        other => return Err(err(format!("unknown study kind {other:?}"))),
    };
    let problem = example_problem(epsilon, phi)?;
    let mut cfg = StudyConfig::new(kind, parse_family(family)?, n_values, k);
    cfg.weight = parse_weight(weight)?;
    let report = convergence_study(&problem, &cfg).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("n", report.rows.iter().map(|r| r.n).collect::<Vec<_>>())?;
    d.set_item("err_l2", report.rows.iter().map(|r| r.err_l2).collect::<Vec<_>>())?;
    d.set_item("err_energy", report.rows.iter().map(|r| r.err_energy).collect::<Vec<_>>())?;
    d.set_item("l2_rates", report.l2_rates())?;
    d.set_item("energy_rates", report.energy_rates())?;
    d.set_item("csv", report.to_csv())?;
    Ok(d.into())
}

#[pymodule]
fn shiftfem_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(mesh_nodes, m)?)?;
    m.add_function(wrap_pyfunction!(validate_weight, m)?)?;
    m.add_function(wrap_pyfunction!(solve_stationary_example, m)?)?;
    m.add_function(wrap_pyfunction!(study, m)?)?;
    Ok(())
}
