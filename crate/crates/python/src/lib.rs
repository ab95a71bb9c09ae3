//! Python bindings: measures, node generators, quadrature rules and studies.

use num_complex::Complex64;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use quadgen::{Error, NodeSet};

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Domain { .. }
        | Error::InvalidMeasure(_)
        | Error::InvalidParameter(_)
        | Error::NotInLattice { .. }
        | Error::DuplicateNodes(_)
        | Error::InsufficientData(_)
        | Error::Json(_) => PyValueError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

/// Equilibrium measure `(1 - a) sigma~ + a lambda_0` for a rational `a`
/// given as `"p/q"`, with `sigma` a single real mass `zeta` or a list of
/// `(re, im)` masses.
#[pyclass(name = "EquilibriumMeasure", module = "quadgen", frozen)]
#[derive(Clone)]
struct PyEquilibriumMeasure {
    inner: quadgen::EquilibriumMeasure,
}

#[pymethods]
impl PyEquilibriumMeasure {
    #[new]
    #[pyo3(signature = (a = "1", zeta = None, masses = None))]
    fn new(a: &str, zeta: Option<f64>, masses: Option<Vec<(f64, f64)>>) -> PyResult<Self> {
        let a = quadgen::parse_fraction(a).map_err(to_py)?;
        let sigma = match (zeta, masses) {
            (Some(_), Some(_)) => {
                return Err(PyValueError::new_err("give zeta or masses, not both"))
            }
            (Some(z), None) => Some(quadgen::DiscreteMeasure::point_mass(z)),
            (None, Some(m)) => Some(quadgen::DiscreteMeasure::new(
                m.into_iter()
                    .map(|(re, im)| Complex64::new(re, im))
                    .collect(),
            )),
            (None, None) => None,
        }
        .transpose()
        .map_err(to_py)?;
        let inner = quadgen::EquilibriumMeasure::from_parts(a, sigma).map_err(to_py)?;
        Ok(Self { inner })
    }

    #[getter]
    fn a(&self) -> String {
        self.inner.a().to_string()
    }

    fn density(&self, x: f64) -> PyResult<f64> {
        self.inner.density(x).map_err(to_py)
    }

    /// `nu([x, 1])`.
    fn cdf(&self, x: f64) -> PyResult<f64> {
        self.inner.cdf(x).map_err(to_py)
    }

    fn potential(&self, x: f64) -> PyResult<f64> {
        self.inner.potential_on_interval(x).map_err(to_py)
    }

    fn balayage_density(&self, x: f64) -> PyResult<f64> {
        match self.inner.balayage() {
            Some(b) => b.density(x).map_err(to_py),
            None => Err(PyValueError::new_err("measure has no source masses")),
        }
    }

    /// Phase `pi nu([x, 1])`.
    fn phase(&self, x: f64) -> PyResult<f64> {
        quadgen::PhaseFunction::new(self.inner.clone())
            .value(x)
            .map_err(to_py)
    }

    fn __repr__(&self) -> String {
        match self.inner.source() {
            Some(s) => format!(
                "EquilibriumMeasure(a={}, masses={:?})",
                self.inner.a(),
                s.to_spec()
            ),
            None => format!("EquilibriumMeasure(a={})", self.inner.a()),
        }
    }
}

/// An `n`-point rule for the arcsine measure on `[-1, 1]`.
#[pyclass(name = "QuadratureRule", module = "quadgen", frozen)]
struct PyQuadratureRule {
    inner: quadgen::QuadratureRule,
}

#[pymethods]
impl PyQuadratureRule {
    #[new]
    #[pyo3(signature = (nodes, weights, m = None))]
    fn new(nodes: Vec<f64>, weights: Vec<f64>, m: Option<i64>) -> PyResult<Self> {
        let m = m.unwrap_or(nodes.len() as i64 - 1);
        let inner =
            quadgen::QuadratureRule::new(nodes, weights, m, quadgen::RuleMeta::new("python"))
                .map_err(to_py)?;
        Ok(Self { inner })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(Self {
            inner: quadgen::QuadratureRule::from_json(text).map_err(to_py)?,
        })
    }

    #[getter]
    fn nodes(&self) -> Vec<f64> {
        self.inner.nodes().to_vec()
    }

    #[getter]
    fn weights(&self) -> Vec<f64> {
        self.inner.weights().to_vec()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    /// `sum_j w_j f(x_j)` for a Python callable `f`.
    fn apply(&self, f: &Bound<'_, PyAny>) -> PyResult<f64> {
        self.inner.try_apply(|x| f.call1((x,))?.extract::<f64>())
    }

    #[pyo3(signature = (tol = None))]
    fn exactness_degree(&self, tol: Option<f64>) -> i64 {
        self.inner.exactness_degree(tol)
    }

    /// `(sum |w|, min w, number of negative weights)`.
    fn polya_statistics(&self) -> (f64, f64, usize) {
        let s = self.inner.polya_statistics();
        (s.sum_abs, s.min_weight, s.num_negative)
    }

    fn to_json(&self) -> PyResult<String> {
        self.inner.to_json().map_err(to_py)
    }

    fn __repr__(&self) -> String {
        format!(
            "QuadratureRule(n={}, m={})",
            self.inner.len(),
            self.inner.nominal_exactness()
        )
    }
}

#[pyfunction]
fn phase_nodes(em: &PyEquilibriumMeasure, n: usize) -> PyResult<Vec<f64>> {
    let pf = quadgen::PhaseFunction::new(em.inner.clone());
    Ok(quadgen::phase_nodes(&pf, n).map_err(to_py)?.to_vec())
}

#[pyfunction]
#[pyo3(signature = (a, zeta, n, amplitude = 0.0, ell = 1.0))]
fn closed_form_nodes(a: &str, zeta: f64, n: usize, amplitude: f64, ell: f64) -> PyResult<Vec<f64>> {
    let family = quadgen::parse_fraction(a)
        .and_then(quadgen::ClosedFormFamily::from_a)
        .map_err(to_py)?;
    Ok(quadgen::closed_form_nodes(family, zeta, n, amplitude, ell)
        .map_err(to_py)?
        .to_vec())
}

/// Interpolatory weights and the condition estimate of the moment system.
#[pyfunction]
fn interpolatory_weights(nodes: Vec<f64>) -> PyResult<(Vec<f64>, f64)> {
    let iw = quadgen::interpolatory_weights(&NodeSet::from_f64(nodes)).map_err(to_py)?;
    Ok((iw.weights, iw.condition_estimate))
}

/// Interpolatory rule on the phase nodes of `em`.
#[pyfunction]
fn interpolatory_rule(em: &PyEquilibriumMeasure, n: usize) -> PyResult<PyQuadratureRule> {
    let pf = quadgen::PhaseFunction::new(em.inner.clone());
    let x = quadgen::phase_nodes(&pf, n).map_err(to_py)?;
    let meta = quadgen::RuleMeta::for_measure("phase-generic", &em.inner);
    let (inner, _) = quadgen::interpolatory_rule(&x, meta).map_err(to_py)?;
    Ok(PyQuadratureRule { inner })
}

/// Gaussian rule of `dlambda_0 / q` times `q`, for `n` on the integrality lattice.
#[pyfunction]
fn varying_rule(em: &PyEquilibriumMeasure, n: usize) -> PyResult<PyQuadratureRule> {
    let pp = quadgen::PositivePolynomial::for_degree(&em.inner, n).map_err(to_py)?;
    let opts = quadgen::StieltjesOptions::from_env().map_err(to_py)?;
    let inner = quadgen::varying_measure_weights(&pp, n, &opts).map_err(to_py)?;
    Ok(PyQuadratureRule { inner })
}

/// `(max deviation, budget, admissible)` of `nodes` against the phase of `em`.
#[pyfunction]
#[pyo3(signature = (nodes, em, amplitude = 0.0, ell = 1.0))]
fn admissibility_check(
    nodes: Vec<f64>,
    em: &PyEquilibriumMeasure,
    amplitude: f64,
    ell: f64,
) -> PyResult<(f64, f64, bool)> {
    let pf = quadgen::PhaseFunction::new(em.inner.clone());
    let n = nodes.len();
    let r = quadgen::admissibility_check(&nodes, &pf, amplitude, ell, n).map_err(to_py)?;
    Ok((r.max_deviation, r.budget, r.admissible))
}

#[pyfunction]
fn weak_star_distance(nodes: Vec<f64>, em: &PyEquilibriumMeasure) -> PyResult<f64> {
    quadgen::weak_star_distance(&nodes, &em.inner).map_err(to_py)
}

/// Convergence study on phase nodes; returns the report as JSON.
#[pyfunction]
fn run_study(em: &PyEquilibriumMeasure, n_values: Vec<usize>) -> PyResult<String> {
    let scheme = quadgen::NodeScheme::phase(em.inner.clone());
    let report = quadgen::run_study(&scheme, &n_values, &quadgen::Integrand::standard_set());
    report.to_json().map_err(to_py)
}

/// `(n, max |x - y|)` pairs between orthogonal-polynomial zeros and phase nodes.
#[pyfunction]
fn compare_asymptotics(
    em: &PyEquilibriumMeasure,
    n_values: Vec<usize>,
) -> PyResult<Vec<(usize, f64)>> {
    let opts = quadgen::StieltjesOptions::from_env().map_err(to_py)?;
    let rep = quadgen::compare_asymptotics(&em.inner, &n_values, &opts).map_err(to_py)?;
    Ok(rep.records.iter().map(|r| (r.n, r.d_n)).collect())
}

#[pymodule]
#[pyo3(name = "quadgen")]
fn quadgen_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyEquilibriumMeasure>()?;
    m.add_class::<PyQuadratureRule>()?;
    m.add_function(wrap_pyfunction!(phase_nodes, m)?)?;
    m.add_function(wrap_pyfunction!(closed_form_nodes, m)?)?;
    m.add_function(wrap_pyfunction!(interpolatory_weights, m)?)?;
    m.add_function(wrap_pyfunction!(interpolatory_rule, m)?)?;
    m.add_function(wrap_pyfunction!(varying_rule, m)?)?;
    m.add_function(wrap_pyfunction!(admissibility_check, m)?)?;
    m.add_function(wrap_pyfunction!(weak_star_distance, m)?)?;
    m.add_function(wrap_pyfunction!(run_study, m)?)?;
    m.add_function(wrap_pyfunction!(compare_asymptotics, m)?)?;
    Ok(())
}
