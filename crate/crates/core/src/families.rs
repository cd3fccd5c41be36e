//! Consistent copula families `(C_k)`.
//!
//! Two constructions are provided. A [`ChainCopulaFamily`] glues bivariate
//! densities into `c_k(u) = phi_1(u_1, u_2) ... phi_{k-1}(u_{k-1}, u_k)`, a
//! Markov chain on the unit interval with uniform margins. A
//! [`GaussianCovarianceFamily`] reads the copulas off the finite-dimensional
//! Gaussian laws of a covariance operator `Q`.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{
    gauss_legendre, normal_quantile_raw, open_unit, par_collect, std_normal_pdf, stream_rng,
    MonteCarloEstimate, QuadratureRule, DEFAULT_ORDER, GAUSSIAN_HALF_WIDTH,
};
use crate::pair_copulas::{
    check_correlation, GaussianPair, Independence, SharedPair, MAX_ABS_CORRELATION,
};
use crate::sampler::sample_uniform_chain;

/// Highest dimension for which `C_k` is evaluated by tensor quadrature.
pub const MAX_QUADRATURE_DIM: usize = 5;

/// Correlation sequence `rho_1, rho_2, ...` for Gaussian chain links.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CorrelationRule {
    /// Listed values, then zero.
    Explicit { values: Vec<f64> },
    /// `rho_k = a * k^(-p)`
    Power { a: f64, p: f64 },
    /// `rho_k = a * q^k`
    Geometric { a: f64, q: f64 },
}

/// Answer of [`is_square_summable`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Summability {
    Yes,
    No,
    Unknown,
}

impl CorrelationRule {
    pub fn explicit(values: Vec<f64>) -> Result<Self> {
        let rule = CorrelationRule::Explicit { values };
        rule.validate()?;
        Ok(rule)
    }

    pub fn power(a: f64, p: f64) -> Result<Self> {
        let rule = CorrelationRule::Power { a, p };
        rule.validate()?;
        Ok(rule)
    }

    pub fn geometric(a: f64, q: f64) -> Result<Self> {
        let rule = CorrelationRule::Geometric { a, q };
        rule.validate()?;
        Ok(rule)
    }

    /// Checks that every generated value lies in `[-0.999, 0.999]`.
    pub fn validate(&self) -> Result<()> {
        match self {
            CorrelationRule::Explicit { values } => {
                for (i, &r) in values.iter().enumerate() {
                    check_correlation(r).map_err(|_| {
                        Error::Domain(format!(
                            "values[{i}] = {r} outside [-{MAX_ABS_CORRELATION}, {MAX_ABS_CORRELATION}]"
                        ))
                    })?;
                }
            }
            CorrelationRule::Power { a, p } => {
                if !p.is_finite() || *p < 0.0 {
                    return Err(Error::Domain(format!("p = {p} must be finite and >= 0")));
                }
                check_correlation(*a).map_err(|_| {
                    Error::Domain(format!("a = {a} gives rho_1 outside [-0.999, 0.999]"))
                })?;
            }
            CorrelationRule::Geometric { a, q } => {
                if !(*q > 0.0 && *q < 1.0) {
                    return Err(Error::Domain(format!("q = {q} must lie in (0, 1)")));
                }
                if !a.is_finite() || (a * q).abs() > MAX_ABS_CORRELATION {
                    return Err(Error::Domain(format!(
                        "a = {a} gives rho_1 = {} outside [-0.999, 0.999]",
                        a * q
                    )));
                }
            }
        }
        Ok(())
    }

    /// `rho_k` for `k >= 1`.
    pub fn rho(&self, k: usize) -> f64 {
        debug_assert!(k >= 1);
        match self {
            CorrelationRule::Explicit { values } => values.get(k - 1).copied().unwrap_or(0.0),
            CorrelationRule::Power { a, p } => a * (k as f64).powf(-p),
            CorrelationRule::Geometric { a, q } => a * q.powi(k as i32),
        }
    }

    /// True when every `rho_k` is zero from some index on.
    pub fn eventually_zero(&self) -> bool {
        match self {
            CorrelationRule::Explicit { .. } => true,
            CorrelationRule::Power { a, .. } | CorrelationRule::Geometric { a, .. } => *a == 0.0,
        }
    }
}

/// Decides `sum_k rho_k^2 < infinity` from the form of the rule.
pub fn is_square_summable(rule: &CorrelationRule) -> Summability {
    match rule {
        // Finitely many nonzero terms.
        CorrelationRule::Explicit { .. } => Summability::Yes,
        CorrelationRule::Power { a, p } => {
            if *a == 0.0 || *p > 0.5 {
                Summability::Yes
            } else {
                Summability::No
            }
        }
        CorrelationRule::Geometric { .. } => Summability::Yes,
    }
}

/// Generator for the links of a chain past its explicit prefix.
#[derive(Clone)]
pub enum ChainTail {
    Independence,
    Gaussian(CorrelationRule),
    /// The same link at every index.
    Repeat(SharedPair),
    /// Arbitrary index-dependent links. Convergence questions about such
    /// tails can only be answered heuristically.
    Custom(Arc<dyn Fn(usize) -> SharedPair + Send + Sync>),
}

impl fmt::Debug for ChainTail {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ChainTail::Independence => f.write_str("Independence"),
            ChainTail::Gaussian(rule) => f.debug_tuple("Gaussian").field(rule).finish(),
            ChainTail::Repeat(pair) => f.debug_tuple("Repeat").field(pair).finish(),
            ChainTail::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

/// The chain family: link `j` joins coordinates `j` and `j + 1`.
#[derive(Debug, Clone)]
pub struct ChainCopulaFamily {
    prefix: Vec<SharedPair>,
    tail: ChainTail,
}

impl ChainCopulaFamily {
    pub fn new(prefix: Vec<SharedPair>, tail: ChainTail) -> Result<Self> {
        if let ChainTail::Gaussian(rule) = &tail {
            rule.validate()?;
        }
        Ok(Self { prefix, tail })
    }

    pub fn independence() -> Self {
        Self {
            prefix: Vec::new(),
            tail: ChainTail::Independence,
        }
    }

    pub fn gaussian(rule: CorrelationRule) -> Result<Self> {
        Self::new(Vec::new(), ChainTail::Gaussian(rule))
    }

    pub fn prefix(&self) -> &[SharedPair] {
        &self.prefix
    }

    pub fn tail(&self) -> &ChainTail {
        &self.tail
    }

    /// Link `j >= 1`.
    pub fn pair(&self, j: usize) -> SharedPair {
        assert!(j >= 1, "links are indexed from 1");
        if let Some(p) = self.prefix.get(j - 1) {
            return Arc::clone(p);
        }
        match &self.tail {
            ChainTail::Independence => Arc::new(Independence),
            ChainTail::Gaussian(rule) => {
                let rho = rule.rho(j);
                if rho == 0.0 {
                    Arc::new(Independence)
                } else {
                    // validated at construction
                    Arc::new(GaussianPair::new(rho).expect("validated correlation rule"))
                }
            }
            ChainTail::Repeat(p) => Arc::clone(p),
            ChainTail::Custom(f) => f(j),
        }
    }

    /// Links `1..k`, i.e. everything needed for the first `k` coordinates.
    pub fn pairs(&self, k: usize) -> Vec<SharedPair> {
        (1..k).map(|j| self.pair(j)).collect()
    }

    /// Correlation of link `j` when it is Gaussian or independent.
    pub fn link_correlation(&self, j: usize) -> Option<f64> {
        if j <= self.prefix.len() {
            return None;
        }
        match &self.tail {
            ChainTail::Independence => Some(0.0),
            ChainTail::Gaussian(rule) => Some(rule.rho(j)),
            _ => None,
        }
    }

    /// True when all links past some index are the independence copula.
    pub fn has_independent_tail(&self) -> bool {
        match &self.tail {
            ChainTail::Independence => true,
            ChainTail::Gaussian(rule) => rule.eventually_zero(),
            ChainTail::Repeat(p) => p.is_independence(),
            ChainTail::Custom(_) => false,
        }
    }

    pub fn describe(&self) -> String {
        let tail = match &self.tail {
            ChainTail::Independence => "independence".to_string(),
            ChainTail::Gaussian(rule) => format!("gaussian {rule:?}"),
            ChainTail::Repeat(p) => format!("repeat {}", p.describe()),
            ChainTail::Custom(_) => "custom".to_string(),
        };
        if self.prefix.is_empty() {
            tail
        } else {
            let head: Vec<String> = self.prefix.iter().map(|p| p.describe()).collect();
            format!("[{}] then {tail}", head.join(", "))
        }
    }
}

/// `c_k(u) = prod_j phi_j(u_j, u_{j+1})`. For `k = 1` the density is 1.
pub fn chain_density(family: &ChainCopulaFamily, u: &[f64]) -> Result<f64> {
    if u.is_empty() {
        return Err(Error::InvalidArgument(
            "density needs at least one coordinate".into(),
        ));
    }
    for (i, &x) in u.iter().enumerate() {
        if !(x > 0.0 && x < 1.0) {
            return Err(Error::Domain(format!("u[{i}] = {x} must lie in (0, 1)")));
        }
    }
    let mut value = 1.0;
    for (j, w) in u.windows(2).enumerate() {
        value *= family.pair(j + 1).density(w[0], w[1])?;
    }
    Ok(value)
}

/// How to evaluate `C_k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CdfMethod {
    /// Tensor Gauss-Legendre in normal scores, `order` nodes per axis.
    Quadrature { order: usize },
    /// Fraction of `n` chain samples in the box.
    MonteCarlo { n: usize, seed: u64 },
}

impl Default for CdfMethod {
    fn default() -> Self {
        CdfMethod::Quadrature {
            order: DEFAULT_ORDER,
        }
    }
}

/// A copula value, with a standard error when it was estimated by sampling.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CdfEstimate {
    pub value: f64,
    pub standard_error: Option<f64>,
    pub sample_count: Option<usize>,
}

impl CdfEstimate {
    fn exact(value: f64) -> Self {
        Self {
            value,
            standard_error: None,
            sample_count: None,
        }
    }

    fn from_mc(e: MonteCarloEstimate) -> Self {
        Self {
            value: e.mean,
            standard_error: Some(e.standard_error),
            sample_count: Some(e.sample_count),
        }
    }
}

/// Groundedness and normalisation shortcuts shared by both families.
fn trivial_cdf(u: &[f64]) -> Result<Option<f64>> {
    if u.is_empty() {
        return Err(Error::InvalidArgument(
            "copula needs at least one coordinate".into(),
        ));
    }
    for (i, &x) in u.iter().enumerate() {
        if !(0.0..=1.0).contains(&x) {
            return Err(Error::Domain(format!("u[{i}] = {x} must lie in [0, 1]")));
        }
    }
    if u.contains(&0.0) {
        return Ok(Some(0.0));
    }
    if u.iter().all(|&x| x == 1.0) {
        return Ok(Some(1.0));
    }
    if u.len() == 1 {
        return Ok(Some(u[0]));
    }
    Ok(None)
}

/// `C_k(u)` for the chain family.
pub fn chain_cdf(family: &ChainCopulaFamily, u: &[f64], method: CdfMethod) -> Result<CdfEstimate> {
    if let Some(v) = trivial_cdf(u)? {
        return Ok(CdfEstimate::exact(v));
    }
    match method {
        CdfMethod::Quadrature { order } => {
            chain_cdf_quadrature(family, u, order).map(CdfEstimate::exact)
        }
        CdfMethod::MonteCarlo { n, seed } => {
            let k = u.len();
            let batch = sample_uniform_chain(family, k, seed, n)?;
            let hits: Vec<f64> = batch
                .rows()
                .map(|row| {
                    if row.iter().zip(u).all(|(x, b)| x <= b) {
                        1.0
                    } else {
                        0.0
                    }
                })
                .collect();
            MonteCarloEstimate::from_values(&hits).map(CdfEstimate::from_mc)
        }
    }
}

/// Integration axis for a coordinate bounded above by `u` in normal scores.
fn box_axis(u: f64, order: usize) -> Result<QuadratureRule> {
    let upper = if u >= 1.0 {
        GAUSSIAN_HALF_WIDTH
    } else {
        normal_quantile_raw(u).min(GAUSSIAN_HALF_WIDTH)
    };
    let lower = (-GAUSSIAN_HALF_WIDTH).min(upper - 2.0);
    gauss_legendre(order, lower, upper)
}

/// Integrates the chain density over `[0, u_1] x ... x [0, u_k]`.
///
/// The integrand factorises along the chain, so the tensor sum is computed
/// as a sequence of matrix-vector products from the last axis back to the
/// first. The result is identical to the full tensor sum.
fn chain_cdf_quadrature(family: &ChainCopulaFamily, u: &[f64], order: usize) -> Result<f64> {
    let k = u.len();
    if k > MAX_QUADRATURE_DIM {
        return Err(Error::DimensionTooLarge {
            requested: k,
            max: MAX_QUADRATURE_DIM,
        });
    }
    let axes = u
        .iter()
        .map(|&b| box_axis(b, order))
        .collect::<Result<Vec<_>>>()?;
    let pairs = family.pairs(k);
    if pairs.iter().all(|p| p.is_independence()) {
        return Ok(u.iter().product());
    }

    // message[l] = integral over coordinates after j given coordinate j at node l
    let mut message = vec![1.0; axes[k - 1].len()];
    for j in (0..k - 1).rev() {
        let here = &axes[j];
        let next = &axes[j + 1];
        let weights: Vec<f64> = next
            .iter()
            .zip(&message)
            .map(|((y, w), m)| w * std_normal_pdf(y) * m)
            .collect();
        let pair = &pairs[j];
        let mut out = Vec::with_capacity(here.len());
        for &x in here.nodes() {
            let mut acc = 0.0;
            for (&y, &w) in next.nodes().iter().zip(&weights) {
                let d = pair.density_normal_scores(x, y)?;
                if !d.is_finite() {
                    return Err(Error::Evaluation {
                        u: x,
                        v: y,
                        value: d,
                    });
                }
                acc += w * d;
            }
            out.push(acc);
        }
        message = out;
    }
    let total: f64 = axes[0]
        .iter()
        .zip(&message)
        .map(|((x, w), m)| w * std_normal_pdf(x) * m)
        .sum();
    Ok(total.clamp(0.0, 1.0))
}

/// Result of a consistency or margin check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckReport {
    pub check: String,
    pub k: usize,
    pub j: Option<usize>,
    pub probe_points: usize,
    pub max_deviation: f64,
    pub tolerance: f64,
    pub passed: bool,
}

/// Deterministic probe points in `(0, 1)^k`.
fn probe_points(k: usize, count: usize) -> Vec<Vec<f64>> {
    (0..count as u64)
        .map(|i| {
            let mut rng = stream_rng(0x00c0_9a1a, i);
            (0..k).map(|_| 0.02 + 0.96 * open_unit(&mut rng)).collect()
        })
        .collect()
}

/// Max over probe points of `|C_{k+1}(u, 1) - C_k(u)|`.
pub fn check_consistency(
    family: &ChainCopulaFamily,
    k: usize,
    tolerance: f64,
    probe_points_count: usize,
) -> Result<CheckReport> {
    check_consistency_with_order(family, k, tolerance, probe_points_count, DEFAULT_ORDER)
}

pub fn check_consistency_with_order(
    family: &ChainCopulaFamily,
    k: usize,
    tolerance: f64,
    probe_points_count: usize,
    order: usize,
) -> Result<CheckReport> {
    if k == 0 || k + 1 > MAX_QUADRATURE_DIM {
        return Err(Error::DimensionTooLarge {
            requested: k + 1,
            max: MAX_QUADRATURE_DIM,
        });
    }
    let method = CdfMethod::Quadrature { order };
    let probes = probe_points(k, probe_points_count);
    let deviations = par_collect(probe_points_count, |i| -> Result<f64> {
        let u = &probes[i];
        let mut extended = u.clone();
        extended.push(1.0);
        // Force the quadrature path even where the shortcut would apply.
        let lhs = chain_cdf_quadrature(family, &extended, order)?;
        let rhs = if k == 1 {
            u[0]
        } else {
            chain_cdf(family, u, method)?.value
        };
        Ok((lhs - rhs).abs())
    });
    let max_deviation = deviations
        .into_iter()
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    Ok(CheckReport {
        check: "consistency".into(),
        k,
        j: None,
        probe_points: probe_points_count,
        max_deviation,
        tolerance,
        passed: max_deviation <= tolerance,
    })
}

/// Max over a grid of `u_j` of `|C_k(1, ..., u_j, ..., 1) - u_j|`.
pub fn check_uniform_margins(
    family: &ChainCopulaFamily,
    k: usize,
    j: usize,
    tolerance: f64,
) -> Result<CheckReport> {
    check_uniform_margins_with_order(family, k, j, tolerance, DEFAULT_ORDER)
}

pub fn check_uniform_margins_with_order(
    family: &ChainCopulaFamily,
    k: usize,
    j: usize,
    tolerance: f64,
    order: usize,
) -> Result<CheckReport> {
    if k > MAX_QUADRATURE_DIM {
        return Err(Error::DimensionTooLarge {
            requested: k,
            max: MAX_QUADRATURE_DIM,
        });
    }
    if j == 0 || j > k {
        return Err(Error::InvalidArgument(format!(
            "margin index {j} not in 1..={k}"
        )));
    }
    const GRID: usize = 32;
    let mut max_deviation: f64 = 0.0;
    for i in 1..GRID {
        let t = i as f64 / GRID as f64;
        let mut u = vec![1.0; k];
        u[j - 1] = t;
        let value = if k == 1 {
            t
        } else {
            chain_cdf_quadrature(family, &u, order)?
        };
        max_deviation = max_deviation.max((value - t).abs());
    }
    Ok(CheckReport {
        check: "uniform_margin".into(),
        k,
        j: Some(j),
        probe_points: GRID - 1,
        max_deviation,
        tolerance,
        passed: max_deviation <= tolerance,
    })
}

/// Covariance operator in coordinates, `(m, n) -> <Q e_m, e_n>`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CovarianceRule {
    /// `Q = Id`; the canonical Gaussian cylindrical measure.
    Identity {},
    /// Leading block given explicitly, identity beyond it.
    Explicit { matrix: Vec<Vec<f64>> },
    /// `<Q e_m, e_n> = rho^|m - n|`
    Ar1 { rho: f64 },
}

/// Copulas of the finite-dimensional projections of a centred Gaussian
/// cylindrical measure.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianCovarianceFamily {
    rule: CovarianceRule,
}

impl GaussianCovarianceFamily {
    pub fn new(rule: CovarianceRule) -> Result<Self> {
        match &rule {
            CovarianceRule::Identity {} => {}
            CovarianceRule::Explicit { matrix } => {
                let n = matrix.len();
                for (i, row) in matrix.iter().enumerate() {
                    if row.len() != n {
                        return Err(Error::InvalidArgument(format!(
                            "covariance row {i} has {} entries, expected {n}",
                            row.len()
                        )));
                    }
                    if !(row[i] > 0.0 && row[i].is_finite()) {
                        return Err(Error::InvalidArgument(format!(
                            "covariance diagonal entry {i} must be positive, got {}",
                            row[i]
                        )));
                    }
                    for (j, &v) in row.iter().enumerate() {
                        if !v.is_finite() || (v - matrix[j][i]).abs() > 1e-12 * v.abs().max(1.0) {
                            return Err(Error::InvalidArgument(format!(
                                "covariance is not symmetric at ({i}, {j})"
                            )));
                        }
                    }
                }
            }
            CovarianceRule::Ar1 { rho } => {
                if rho.is_nan() || rho.abs() >= 1.0 {
                    return Err(Error::Domain(format!(
                        "ar1 correlation {rho} must lie in (-1, 1)"
                    )));
                }
            }
        }
        Ok(Self { rule })
    }

    pub fn identity() -> Self {
        Self {
            rule: CovarianceRule::Identity {},
        }
    }

    pub fn rule(&self) -> &CovarianceRule {
        &self.rule
    }

    /// `<Q e_m, e_n>` with 1-based indices.
    pub fn covariance(&self, m: usize, n: usize) -> f64 {
        match &self.rule {
            CovarianceRule::Identity {} => f64::from(m == n),
            CovarianceRule::Explicit { matrix } => {
                let d = matrix.len();
                if m <= d && n <= d {
                    matrix[m - 1][n - 1]
                } else {
                    f64::from(m == n)
                }
            }
            CovarianceRule::Ar1 { rho } => rho.powi((m as i64 - n as i64).unsigned_abs() as i32),
        }
    }

    /// True when coordinates decouple past some index.
    pub fn has_independent_tail(&self) -> bool {
        match &self.rule {
            CovarianceRule::Identity {} | CovarianceRule::Explicit { .. } => true,
            CovarianceRule::Ar1 { rho } => *rho == 0.0,
        }
    }

    /// Row-major lower Cholesky factor of the leading `k x k` correlation
    /// block. Pivots in `[-1e-12, 1e-12]` are lifted to `1e-12`; anything
    /// more negative is rejected.
    pub fn correlation_cholesky(&self, k: usize) -> Result<Vec<f64>> {
        const JITTER: f64 = 1e-12;
        let sd: Vec<f64> = (1..=k).map(|i| self.covariance(i, i).sqrt()).collect();
        let mut l = vec![0.0; k * k];
        for i in 0..k {
            for j in 0..=i {
                let corr = self.covariance(i + 1, j + 1) / (sd[i] * sd[j]);
                let dot: f64 = (0..j).map(|m| l[i * k + m] * l[j * k + m]).sum();
                if i == j {
                    let mut pivot = corr - dot;
                    if pivot < -JITTER {
                        return Err(Error::NotPositiveDefinite(k));
                    }
                    pivot = pivot.max(JITTER);
                    l[i * k + i] = pivot.sqrt();
                } else {
                    l[i * k + j] = (corr - dot) / l[j * k + j];
                }
            }
        }
        Ok(l)
    }
}

/// `C_k(u) = F_{1..k}(F_1^{-1}(u_1), ..., F_k^{-1}(u_k))`, estimated as the
/// Gaussian orthant probability at the standardised quantiles.
pub fn gaussian_covariance_cdf(
    family: &GaussianCovarianceFamily,
    u: &[f64],
    n: usize,
    seed: u64,
) -> Result<CdfEstimate> {
    if let Some(v) = trivial_cdf(u)? {
        return Ok(CdfEstimate::exact(v));
    }
    let k = u.len();
    let l = family.correlation_cholesky(k)?;
    let bounds: Vec<f64> = u.iter().map(|&x| normal_quantile_raw(x)).collect();
    let hits = par_collect(n, |i| {
        let mut rng = stream_rng(seed, i as u64);
        let eps: Vec<f64> = (0..k)
            .map(|_| normal_quantile_raw(open_unit(&mut rng)))
            .collect();
        let inside = (0..k).all(|r| {
            let z: f64 = (0..=r).map(|c| l[r * k + c] * eps[c]).sum();
            z <= bounds[r]
        });
        if inside {
            1.0
        } else {
            0.0
        }
    });
    MonteCarloEstimate::from_values(&hits).map(CdfEstimate::from_mc)
}

/// Either kind of consistent family.
#[derive(Debug, Clone)]
pub enum CopulaFamily {
    Chain(ChainCopulaFamily),
    GaussianCovariance(GaussianCovarianceFamily),
}

impl CopulaFamily {
    pub fn has_independent_tail(&self) -> bool {
        match self {
            CopulaFamily::Chain(f) => f.has_independent_tail(),
            CopulaFamily::GaussianCovariance(f) => f.has_independent_tail(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{integrate_2d, std_normal_quantile};
    use crate::pair_copulas::PairwiseCopula;

    #[derive(Debug)]
    struct DoubledKernel;

    impl PairwiseCopula for DoubledKernel {
        fn density(&self, _u: f64, _v: f64) -> Result<f64> {
            Ok(2.0)
        }
        fn conditional_cdf(&self, v: f64, _u: f64) -> Result<f64> {
            Ok(v)
        }
        fn conditional_quantile(&self, p: f64, _u: f64) -> Result<f64> {
            Ok(p)
        }
        fn describe(&self) -> String {
            "doubled".into()
        }
    }

    fn gaussian(values: &[f64]) -> ChainCopulaFamily {
        ChainCopulaFamily::gaussian(CorrelationRule::explicit(values.to_vec()).unwrap()).unwrap()
    }

    #[test]
    fn rule_values_and_validation() {
        let p = CorrelationRule::power(0.5, 1.0).unwrap();
        assert_eq!(p.rho(1), 0.5);
        assert_eq!(p.rho(4), 0.125);
        let g = CorrelationRule::geometric(0.8, 0.5).unwrap();
        assert!((g.rho(2) - 0.2).abs() < 1e-15);
        let e = CorrelationRule::explicit(vec![0.3, -0.2]).unwrap();
        assert_eq!(e.rho(2), -0.2);
        assert_eq!(e.rho(3), 0.0);
        assert!(CorrelationRule::power(1.2, 1.0).is_err());
        assert!(CorrelationRule::power(0.5, -1.0).is_err());
        assert!(CorrelationRule::geometric(0.5, 1.0).is_err());
        assert!(CorrelationRule::geometric(1.5, 0.9).is_err());
        let err = CorrelationRule::explicit(vec![0.1, 1.2]).unwrap_err();
        assert!(err.to_string().contains("values[1]"));
    }

    #[test]
    fn square_summability() {
        assert_eq!(
            is_square_summable(&CorrelationRule::power(0.5, 1.0).unwrap()),
            Summability::Yes
        );
        assert_eq!(
            is_square_summable(&CorrelationRule::power(0.9, 0.25).unwrap()),
            Summability::No
        );
        assert_eq!(
            is_square_summable(&CorrelationRule::power(0.9, 0.5).unwrap()),
            Summability::No
        );
        assert_eq!(
            is_square_summable(&CorrelationRule::geometric(0.8, 0.5).unwrap()),
            Summability::Yes
        );
        assert_eq!(
            is_square_summable(&CorrelationRule::explicit(vec![0.9; 10]).unwrap()),
            Summability::Yes
        );
    }

    #[test]
    fn density_examples() {
        let ind = ChainCopulaFamily::independence();
        assert_eq!(chain_density(&ind, &[0.1, 0.7, 0.3, 0.9]).unwrap(), 1.0);
        let d2 = chain_density(&gaussian(&[0.6]), &[0.5, 0.5]).unwrap();
        assert!((d2 - 1.25).abs() < 1e-14);
        let d3 = chain_density(&gaussian(&[0.5, 0.3]), &[0.5, 0.5, 0.5]).unwrap();
        let expected = 1.0 / 0.75f64.sqrt() / 0.91f64.sqrt();
        assert!((d3 - expected).abs() < 1e-14);
        assert!((d3 - 1.2105).abs() < 1e-4);
        assert!(chain_density(&ind, &[0.5, 0.0]).is_err());
        assert!(chain_density(&ind, &[1.0, 0.5]).is_err());
    }

    #[test]
    fn cdf_trivial_cases() {
        let fam = gaussian(&[0.5, 0.3]);
        let q = CdfMethod::default();
        assert_eq!(chain_cdf(&fam, &[1.0, 1.0, 1.0], q).unwrap().value, 1.0);
        assert_eq!(chain_cdf(&fam, &[0.3, 0.0, 0.9], q).unwrap().value, 0.0);
        assert_eq!(chain_cdf(&fam, &[0.37], q).unwrap().value, 0.37);
        let ind = ChainCopulaFamily::independence();
        let v = chain_cdf(&ind, &[0.2, 0.5, 0.9], q).unwrap().value;
        assert!((v - 0.09).abs() < 1e-13);
    }

    #[test]
    fn gaussian_median_box_matches_quadrature_oracle() {
        // Oracle: direct 2-D tensor quadrature of the density over the box,
        // independent of the chain transfer scheme.
        let rho = 0.5;
        let pair = GaussianPair::new(rho).unwrap();
        let r = gauss_legendre(96, -GAUSSIAN_HALF_WIDTH, 0.0).unwrap();
        let oracle = integrate_2d(
            |x, y| {
                pair.density_normal_scores(x, y).unwrap() * std_normal_pdf(x) * std_normal_pdf(y)
            },
            &r,
            &r,
        )
        .unwrap();
        let orthant = 0.25 + rho.asin() / (2.0 * std::f64::consts::PI);
        assert!((oracle - orthant).abs() < 1e-9);
        assert!((orthant - 1.0 / 3.0).abs() < 1e-15);
        let v = chain_cdf(&gaussian(&[rho]), &[0.5, 0.5], CdfMethod::default())
            .unwrap()
            .value;
        assert!((v - oracle).abs() < 1e-5, "{v} vs {oracle}");
    }

    #[test]
    fn monte_carlo_cdf_agrees() {
        let fam = gaussian(&[0.5]);
        let e = chain_cdf(
            &fam,
            &[0.5, 0.5],
            CdfMethod::MonteCarlo { n: 40_000, seed: 3 },
        )
        .unwrap();
        let se = e.standard_error.unwrap();
        assert!((e.value - 1.0 / 3.0).abs() <= 4.0 * se);
    }

    #[test]
    fn quadrature_dimension_cap() {
        let fam = ChainCopulaFamily::independence();
        let err = chain_cdf(&fam, &[0.5; 6], CdfMethod::default()).unwrap_err();
        assert_eq!(
            err,
            Error::DimensionTooLarge {
                requested: 6,
                max: 5
            }
        );
        assert!(chain_cdf(&fam, &[0.5; 6], CdfMethod::MonteCarlo { n: 100, seed: 1 }).is_ok());
    }

    #[test]
    fn consistency_reports() {
        let ind = check_consistency(&ChainCopulaFamily::independence(), 3, 1e-12, 16).unwrap();
        assert!(ind.passed, "{ind:?}");
        let fam = ChainCopulaFamily::gaussian(CorrelationRule::power(0.5, 1.0).unwrap()).unwrap();
        let g = check_consistency(&fam, 3, 1e-6, 32).unwrap();
        assert!(g.passed, "{g:?}");
        let bad =
            ChainCopulaFamily::new(vec![Arc::new(DoubledKernel)], ChainTail::Independence).unwrap();
        let r = check_consistency(&bad, 1, 1e-6, 8).unwrap();
        assert!(!r.passed);
        assert!(check_consistency(&fam, 5, 1e-6, 4).is_err());
    }

    #[test]
    fn margin_reports() {
        let ind = check_uniform_margins(&ChainCopulaFamily::independence(), 4, 2, 1e-12).unwrap();
        assert!(ind.passed);
        let fam = gaussian(&[0.5, 0.3, 0.2]);
        for j in [2, 4] {
            let r = check_uniform_margins(&fam, 4, j, 1e-6).unwrap();
            assert!(r.passed, "{r:?}");
        }
        assert!(check_uniform_margins(&fam, 4, 5, 1e-6).is_err());
    }

    #[test]
    fn chain_density_integrates_to_one() {
        for k in 2..=4 {
            let fam =
                ChainCopulaFamily::gaussian(CorrelationRule::geometric(0.8, 0.5).unwrap()).unwrap();
            let v = chain_cdf_quadrature(&fam, &vec![1.0; k], DEFAULT_ORDER).unwrap();
            assert!((v - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn covariance_family_examples() {
        let id = GaussianCovarianceFamily::identity();
        let e = gaussian_covariance_cdf(&id, &[0.3, 0.7], 50_000, 11).unwrap();
        assert!((e.value - 0.21).abs() <= 3.0 * e.standard_error.unwrap());
        assert_eq!(
            gaussian_covariance_cdf(&id, &[0.42], 10, 1).unwrap().value,
            0.42
        );
        assert_eq!(
            gaussian_covariance_cdf(&id, &[0.42, 0.0], 10, 1)
                .unwrap()
                .value,
            0.0
        );
        assert_eq!(
            gaussian_covariance_cdf(&id, &[1.0, 1.0], 10, 1)
                .unwrap()
                .value,
            1.0
        );

        let block = GaussianCovarianceFamily::new(CovarianceRule::Explicit {
            matrix: vec![vec![4.0, 1.0], vec![1.0, 1.0]],
        })
        .unwrap();
        let e = gaussian_covariance_cdf(&block, &[0.5, 0.5], 50_000, 5).unwrap();
        assert!(
            (e.value - 1.0 / 3.0).abs() <= 3.0 * e.standard_error.unwrap(),
            "{e:?}"
        );
    }

    #[test]
    fn covariance_cholesky_rules() {
        let singular = GaussianCovarianceFamily::new(CovarianceRule::Explicit {
            matrix: vec![vec![1.0, 1.0], vec![1.0, 1.0]],
        })
        .unwrap();
        let l = singular.correlation_cholesky(2).unwrap();
        assert!((l[3] - 1e-6).abs() < 1e-12);
        let bad = GaussianCovarianceFamily::new(CovarianceRule::Explicit {
            matrix: vec![
                vec![1.0, 0.9, -0.9],
                vec![0.9, 1.0, 0.9],
                vec![-0.9, 0.9, 1.0],
            ],
        })
        .unwrap();
        assert_eq!(
            bad.correlation_cholesky(3),
            Err(Error::NotPositiveDefinite(3))
        );
        assert!(gaussian_covariance_cdf(&bad, &[0.5, 0.5, 0.5], 10, 0).is_err());
        assert!(GaussianCovarianceFamily::new(CovarianceRule::Explicit {
            matrix: vec![vec![1.0, 0.2], vec![0.3, 1.0]],
        })
        .is_err());
    }

    #[test]
    fn covariance_consistency_is_exact() {
        let fam = GaussianCovarianceFamily::new(CovarianceRule::Ar1 { rho: 0.6 }).unwrap();
        let a = gaussian_covariance_cdf(&fam, &[0.3, 0.8], 5_000, 9).unwrap();
        let b = gaussian_covariance_cdf(&fam, &[0.3, 0.8, 1.0], 5_000, 9).unwrap();
        assert_eq!(a.value, b.value);
    }

    #[test]
    fn chain_and_covariance_agree_for_shared_correlation() {
        let chain = chain_cdf(&gaussian(&[0.5]), &[0.3, 0.6], CdfMethod::default())
            .unwrap()
            .value;
        let cov = GaussianCovarianceFamily::new(CovarianceRule::Ar1 { rho: 0.5 }).unwrap();
        let e = gaussian_covariance_cdf(&cov, &[0.3, 0.6], 50_000, 2).unwrap();
        assert!((chain - e.value).abs() <= 3.0 * e.standard_error.unwrap());
        let _ = std_normal_quantile(0.5);
    }

    #[test]
    fn independent_tail_detection() {
        assert!(ChainCopulaFamily::independence().has_independent_tail());
        assert!(gaussian(&[0.5]).has_independent_tail());
        let p = ChainCopulaFamily::gaussian(CorrelationRule::power(0.5, 1.0).unwrap()).unwrap();
        assert!(!p.has_independent_tail());
        assert!(
            CopulaFamily::GaussianCovariance(GaussianCovarianceFamily::identity())
                .has_independent_tail()
        );
    }
}
