//! Python bindings. Reports come back as plain dicts and lists; rows of
//! samples as lists of float lists.

use hcopula::diagnostics::{
    hellinger_affinity as affinity, hellinger_series as series, l2_concentration_check as l2_check,
    martingale_run as martingale, second_moment_preservation as moments,
    uniform_integrability_probe as ui_probe,
};
use hcopula::families::{check_consistency_with_order, check_uniform_margins_with_order};
use hcopula::{
    chain_cdf, chain_density, sample_nu as nu, sample_uniform_chain as uniform_chain, CdfMethod,
    ChainCopulaFamily, CopulaFamily, CorrelationRule, CovarianceRule, GaussianCovarianceFamily,
    GaussianPair, MarginalLaw, MarginalTail, PairwiseCopula, ProductMeasureSpec, SampleBatch,
    VarianceRule,
};
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

fn value_error(e: hcopula::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn to_py<T: serde::Serialize>(py: Python<'_>, value: &T) -> PyResult<Py<PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyValueError::new_err(e.to_string()))?;
    Ok(py.import("json")?.call_method1("loads", (text,))?.unbind())
}

fn rows(batch: &SampleBatch) -> Vec<Vec<f64>> {
    batch.rows().map(<[f64]>::to_vec).collect()
}

/// Bivariate Gaussian copula with correlation `rho`, `|rho| <= 0.999`.
#[pyclass(name = "GaussianPair", frozen)]
struct PyGaussianPair {
    inner: GaussianPair,
}

#[pymethods]
impl PyGaussianPair {
    #[new]
    fn new(rho: f64) -> PyResult<Self> {
        Ok(Self {
            inner: GaussianPair::new(rho).map_err(value_error)?,
        })
    }

    #[getter]
    fn rho(&self) -> f64 {
        self.inner.rho()
    }

    fn density(&self, u: f64, v: f64) -> PyResult<f64> {
        self.inner.density(u, v).map_err(value_error)
    }

    /// `P(V <= v | U = u)`
    fn conditional_cdf(&self, v: f64, u: f64) -> PyResult<f64> {
        self.inner.conditional_cdf(v, u).map_err(value_error)
    }

    fn conditional_quantile(&self, p: f64, u: f64) -> PyResult<f64> {
        self.inner.conditional_quantile(p, u).map_err(value_error)
    }

    #[pyo3(signature = (order = 64))]
    fn hellinger_affinity(&self, order: usize) -> PyResult<f64> {
        affinity(&self.inner, order).map_err(value_error)
    }

    fn __repr__(&self) -> String {
        format!("GaussianPair(rho={})", self.inner.rho())
    }
}

/// Chain copula family `c_k = prod phi_j(u_j, u_{j+1})`.
#[pyclass(name = "ChainFamily", frozen)]
struct PyChainFamily {
    inner: ChainCopulaFamily,
}

impl PyChainFamily {
    fn from_rule(rule: hcopula::Result<CorrelationRule>) -> PyResult<Self> {
        let rule = rule.map_err(value_error)?;
        Ok(Self {
            inner: ChainCopulaFamily::gaussian(rule).map_err(value_error)?,
        })
    }
}

#[pymethods]
impl PyChainFamily {
    #[staticmethod]
    fn independence() -> Self {
        Self {
            inner: ChainCopulaFamily::independence(),
        }
    }

    /// Gaussian links with `rho_k = a * k^(-p)`.
    #[staticmethod]
    fn gaussian_power(a: f64, p: f64) -> PyResult<Self> {
        Self::from_rule(CorrelationRule::power(a, p))
    }

    /// Gaussian links with `rho_k = a * q^k`.
    #[staticmethod]
    fn gaussian_geometric(a: f64, q: f64) -> PyResult<Self> {
        Self::from_rule(CorrelationRule::geometric(a, q))
    }

    /// Gaussian links with the listed correlations, independence after.
    #[staticmethod]
    fn gaussian_explicit(values: Vec<f64>) -> PyResult<Self> {
        Self::from_rule(CorrelationRule::explicit(values))
    }

    /// Correlation of link `j` (between coordinates `j` and `j + 1`).
    fn link_correlation(&self, j: usize) -> Option<f64> {
        self.inner.link_correlation(j)
    }

    fn density(&self, u: Vec<f64>) -> PyResult<f64> {
        chain_density(&self.inner, &u).map_err(value_error)
    }

    /// `C_k(u)` by quadrature, `k <= 5`.
    #[pyo3(signature = (u, order = 64))]
    fn cdf(&self, py: Python<'_>, u: Vec<f64>, order: usize) -> PyResult<f64> {
        let fam = &self.inner;
        py.detach(|| chain_cdf(fam, &u, CdfMethod::Quadrature { order }))
            .map(|e| e.value)
            .map_err(value_error)
    }

    /// Monte Carlo `C_k(u)`; returns `(value, standard_error)`.
    fn cdf_monte_carlo(
        &self,
        py: Python<'_>,
        u: Vec<f64>,
        n: usize,
        seed: u64,
    ) -> PyResult<(f64, f64)> {
        let fam = &self.inner;
        let e = py
            .detach(|| chain_cdf(fam, &u, CdfMethod::MonteCarlo { n, seed }))
            .map_err(value_error)?;
        Ok((e.value, e.standard_error.unwrap_or(0.0)))
    }

    #[pyo3(signature = (k, tolerance = 1e-6, probe_points = 32, order = 64))]
    fn check_consistency(
        &self,
        py: Python<'_>,
        k: usize,
        tolerance: f64,
        probe_points: usize,
        order: usize,
    ) -> PyResult<Py<PyAny>> {
        let fam = &self.inner;
        let r = py
            .detach(|| check_consistency_with_order(fam, k, tolerance, probe_points, order))
            .map_err(value_error)?;
        to_py(py, &r)
    }

    #[pyo3(signature = (k, j, tolerance = 1e-6, order = 64))]
    fn check_uniform_margins(
        &self,
        py: Python<'_>,
        k: usize,
        j: usize,
        tolerance: f64,
        order: usize,
    ) -> PyResult<Py<PyAny>> {
        let fam = &self.inner;
        let r = py
            .detach(|| check_uniform_margins_with_order(fam, k, j, tolerance, order))
            .map_err(value_error)?;
        to_py(py, &r)
    }

    fn __repr__(&self) -> String {
        format!("ChainFamily({})", self.inner.describe())
    }
}

/// Product of one-dimensional continuous laws, one per coordinate.
#[pyclass(name = "ProductMeasure", frozen)]
struct PyProductMeasure {
    inner: ProductMeasureSpec,
}

impl PyProductMeasure {
    fn normal(mean: f64, variance: VarianceRule) -> PyResult<Self> {
        Ok(Self {
            inner: ProductMeasureSpec::new(Vec::new(), MarginalTail::Normal { mean, variance })
                .map_err(value_error)?,
        })
    }

    fn repeat(law: MarginalLaw) -> PyResult<Self> {
        law.validate().map_err(value_error)?;
        Ok(Self {
            inner: ProductMeasureSpec::iid(law),
        })
    }
}

#[pymethods]
impl PyProductMeasure {
    #[staticmethod]
    fn standard_normal() -> Self {
        Self {
            inner: ProductMeasureSpec::standard_normal(),
        }
    }

    /// `N(mean, variance)` in every coordinate.
    #[staticmethod]
    #[pyo3(signature = (variance, mean = 0.0))]
    fn normal_constant(variance: f64, mean: f64) -> PyResult<Self> {
        Self::normal(mean, VarianceRule::Constant { value: variance })
    }

    /// `N(mean, scale * k^(-exponent))`.
    #[staticmethod]
    #[pyo3(signature = (scale, exponent, mean = 0.0))]
    fn normal_power(scale: f64, exponent: f64, mean: f64) -> PyResult<Self> {
        Self::normal(mean, VarianceRule::Power { scale, exponent })
    }

    /// `N(mean, scale * ratio^k)`.
    #[staticmethod]
    #[pyo3(signature = (scale, ratio, mean = 0.0))]
    fn normal_geometric(scale: f64, ratio: f64, mean: f64) -> PyResult<Self> {
        Self::normal(mean, VarianceRule::Geometric { scale, ratio })
    }

    #[staticmethod]
    fn uniform(low: f64, high: f64) -> PyResult<Self> {
        Self::repeat(MarginalLaw::Uniform { low, high })
    }

    #[staticmethod]
    fn exponential(rate: f64) -> PyResult<Self> {
        Self::repeat(MarginalLaw::Exponential { rate })
    }

    #[staticmethod]
    fn logistic(location: f64, scale: f64) -> PyResult<Self> {
        Self::repeat(MarginalLaw::Logistic { location, scale })
    }

    /// Law of coordinate `k` (1-based) as a dict.
    fn marginal(&self, py: Python<'_>, k: usize) -> PyResult<Py<PyAny>> {
        if k == 0 {
            return Err(PyValueError::new_err("coordinates are numbered from 1"));
        }
        to_py(py, &self.inner.marginal(k))
    }

    fn __repr__(&self) -> String {
        format!("ProductMeasure({:?})", self.inner.tail())
    }
}

/// `n` draws of the first `k` coordinates of the pushforward measure.
#[pyfunction]
fn sample_nu(
    py: Python<'_>,
    family: PyRef<'_, PyChainFamily>,
    measure: PyRef<'_, PyProductMeasure>,
    k: usize,
    n: usize,
    seed: u64,
) -> PyResult<Vec<Vec<f64>>> {
    let (fam, spec) = (&family.inner, &measure.inner);
    let batch = py
        .detach(|| nu(fam, spec, k, n, seed))
        .map_err(value_error)?;
    Ok(rows(&batch))
}

/// `n` draws from the copula `C_k` itself.
#[pyfunction]
fn sample_uniform_chain(
    py: Python<'_>,
    family: PyRef<'_, PyChainFamily>,
    k: usize,
    n: usize,
    seed: u64,
) -> PyResult<Vec<Vec<f64>>> {
    let fam = &family.inner;
    let batch = py
        .detach(|| uniform_chain(fam, k, seed, n))
        .map_err(value_error)?;
    Ok(rows(&batch))
}

#[pyfunction]
#[pyo3(signature = (family, terms, order = 64))]
fn hellinger_series(
    py: Python<'_>,
    family: PyRef<'_, PyChainFamily>,
    terms: usize,
    order: usize,
) -> PyResult<Py<PyAny>> {
    let fam = &family.inner;
    let s = py
        .detach(|| series(fam, terms, order))
        .map_err(value_error)?;
    to_py(py, &s)
}

/// `l^2` concentration verdict. Without a chain family the copula is the
/// one of the canonical Gaussian cylindrical measure (`Q = Id`).
#[pyfunction]
#[pyo3(signature = (measure, truncation, family = None))]
fn l2_concentration_check(
    py: Python<'_>,
    measure: PyRef<'_, PyProductMeasure>,
    truncation: usize,
    family: Option<PyRef<'_, PyChainFamily>>,
) -> PyResult<Py<PyAny>> {
    let fam = match family {
        Some(f) => CopulaFamily::Chain(f.inner.clone()),
        None => CopulaFamily::GaussianCovariance(
            GaussianCovarianceFamily::new(CovarianceRule::Identity {}).map_err(value_error)?,
        ),
    };
    to_py(py, &l2_check(&measure.inner, &fam, truncation))
}

#[pyfunction]
fn martingale_run(
    py: Python<'_>,
    measure: PyRef<'_, PyProductMeasure>,
    family: PyRef<'_, PyChainFamily>,
    depth: usize,
    n: usize,
    seed: u64,
) -> PyResult<Py<PyAny>> {
    let (fam, spec) = (&family.inner, &measure.inner);
    let s = py
        .detach(|| martingale(spec, fam, depth, n, seed))
        .map_err(value_error)?;
    to_py(py, &s)
}

#[pyfunction]
fn second_moment_preservation(
    py: Python<'_>,
    measure: PyRef<'_, PyProductMeasure>,
    family: PyRef<'_, PyChainFamily>,
    truncation: usize,
    n: usize,
    seed: u64,
) -> PyResult<Py<PyAny>> {
    let (fam, spec) = (&family.inner, &measure.inner);
    let r = py
        .detach(|| moments(spec, fam, truncation, n, seed))
        .map_err(value_error)?;
    to_py(py, &r)
}

#[pyfunction]
fn uniform_integrability_probe(
    py: Python<'_>,
    family: PyRef<'_, PyChainFamily>,
    r_values: Vec<f64>,
    k_values: Vec<usize>,
    n: usize,
    seed: u64,
) -> PyResult<Py<PyAny>> {
    let fam = &family.inner;
    let p = py
        .detach(|| ui_probe(fam, &r_values, &k_values, n, seed))
        .map_err(value_error)?;
    to_py(py, &p)
}

/// Empirical copula of `rows` on the grid `{0, 1/m, ..., 1}^k`, `k <= 3`.
/// Returns a dict with `m`, `k`, `sample_count` and flat row-major
/// `values` (last axis fastest).
#[pyfunction]
fn empirical_copula(py: Python<'_>, rows: Vec<Vec<f64>>, m: usize) -> PyResult<Py<PyAny>> {
    let k = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != k) {
        return Err(PyValueError::new_err("rows must all have the same length"));
    }
    let batch = SampleBatch::new(k, rows.concat()).map_err(value_error)?;
    let grid = py
        .detach(|| hcopula::empirical_copula(&batch, m))
        .map_err(value_error)?;
    to_py(py, &grid)
}

#[pymodule]
fn hcopula_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyGaussianPair>()?;
    m.add_class::<PyChainFamily>()?;
    m.add_class::<PyProductMeasure>()?;
    m.add_function(wrap_pyfunction!(sample_nu, m)?)?;
    m.add_function(wrap_pyfunction!(sample_uniform_chain, m)?)?;
    m.add_function(wrap_pyfunction!(hellinger_series, m)?)?;
    m.add_function(wrap_pyfunction!(l2_concentration_check, m)?)?;
    m.add_function(wrap_pyfunction!(martingale_run, m)?)?;
    m.add_function(wrap_pyfunction!(second_moment_preservation, m)?)?;
    m.add_function(wrap_pyfunction!(uniform_integrability_probe, m)?)?;
    m.add_function(wrap_pyfunction!(empirical_copula, m)?)?;
    Ok(())
}
