//! Two-dimensional copulas with densities: the links of a chain family.

use std::fmt::Debug;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::{
    clamp_open, gauss_legendre, normal_quantile_raw, std_normal_cdf, std_normal_pdf, DEFAULT_ORDER,
    GAUSSIAN_HALF_WIDTH,
};

/// Largest admissible |rho| for Gaussian links.
pub const MAX_ABS_CORRELATION: f64 = 0.999;

/// A bivariate copula with a density on the open unit square.
///
/// `conditional_cdf(v, u)` is the h-function `P(V <= v | U = u)` and
/// `conditional_quantile` is its inverse in `v`; together they drive exact
/// sequential sampling of chain families.
pub trait PairwiseCopula: Debug + Send + Sync {
    fn density(&self, u: f64, v: f64) -> Result<f64>;

    fn conditional_cdf(&self, v: f64, u: f64) -> Result<f64>;

    fn conditional_quantile(&self, p: f64, u: f64) -> Result<f64>;

    /// Density at `(G(x), G(y))` for normal scores `x, y`. Implementations
    /// with a closed form in normal scores should override this to avoid the
    /// round trip through `G` and its inverse.
    fn density_normal_scores(&self, x: f64, y: f64) -> Result<f64> {
        self.density(clamp_open(std_normal_cdf(x)), clamp_open(std_normal_cdf(y)))
    }

    /// True when the density is identically one.
    fn is_independence(&self) -> bool {
        false
    }

    fn describe(&self) -> String;
}

pub type SharedPair = Arc<dyn PairwiseCopula>;

pub(crate) fn check_open(name: &str, x: f64) -> Result<()> {
    if x > 0.0 && x < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("{name} must lie in (0, 1), got {x}")))
    }
}

pub(crate) fn check_correlation(rho: f64) -> Result<()> {
    if rho.is_finite() && rho.abs() <= MAX_ABS_CORRELATION {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "correlation {rho} outside [-{MAX_ABS_CORRELATION}, {MAX_ABS_CORRELATION}]"
        )))
    }
}

/// The product copula, density 1.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Independence;

impl PairwiseCopula for Independence {
    fn density(&self, u: f64, v: f64) -> Result<f64> {
        check_open("u", u)?;
        check_open("v", v)?;
        Ok(1.0)
    }

    fn conditional_cdf(&self, v: f64, u: f64) -> Result<f64> {
        check_open("u", u)?;
        check_open("v", v)?;
        Ok(v)
    }

    fn conditional_quantile(&self, p: f64, u: f64) -> Result<f64> {
        check_open("u", u)?;
        check_open("p", p)?;
        Ok(p)
    }

    fn density_normal_scores(&self, _x: f64, _y: f64) -> Result<f64> {
        Ok(1.0)
    }

    fn is_independence(&self) -> bool {
        true
    }

    fn describe(&self) -> String {
        "independence".into()
    }
}

/// Bivariate Gaussian copula with correlation `rho`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianPair {
    rho: f64,
    /// sqrt(1 - rho^2)
    scale: f64,
}

impl GaussianPair {
    pub fn new(rho: f64) -> Result<Self> {
        check_correlation(rho)?;
        Ok(Self {
            rho,
            scale: (1.0 - rho * rho).sqrt(),
        })
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    #[inline]
    fn density_scores(&self, x: f64, y: f64) -> f64 {
        let r = self.rho;
        let s2 = self.scale * self.scale;
        let q = r * r * x * x - 2.0 * r * x * y + r * r * y * y;
        (-q / (2.0 * s2)).exp() / self.scale
    }

    /// Conditional quantile in normal scores: the score of `V` given the
    /// score `x` of `U` and a uniform `p`.
    #[inline]
    pub fn conditional_score(&self, p: f64, x: f64) -> f64 {
        self.rho * x + self.scale * normal_quantile_raw(p)
    }
}

impl PairwiseCopula for GaussianPair {
    fn density(&self, u: f64, v: f64) -> Result<f64> {
        check_open("u", u)?;
        check_open("v", v)?;
        Ok(self.density_scores(normal_quantile_raw(u), normal_quantile_raw(v)))
    }

    fn conditional_cdf(&self, v: f64, u: f64) -> Result<f64> {
        check_open("u", u)?;
        check_open("v", v)?;
        let x = normal_quantile_raw(u);
        let y = normal_quantile_raw(v);
        Ok(std_normal_cdf((y - self.rho * x) / self.scale))
    }

    fn conditional_quantile(&self, p: f64, u: f64) -> Result<f64> {
        check_open("u", u)?;
        check_open("p", p)?;
        let x = normal_quantile_raw(u);
        Ok(clamp_open(std_normal_cdf(self.conditional_score(p, x))))
    }

    fn density_normal_scores(&self, x: f64, y: f64) -> Result<f64> {
        Ok(self.density_scores(x, y))
    }

    fn is_independence(&self) -> bool {
        self.rho == 0.0
    }

    fn describe(&self) -> String {
        format!("gaussian(rho={})", self.rho)
    }
}

pub fn gaussian_pair_density(rho: f64, u: f64, v: f64) -> Result<f64> {
    GaussianPair::new(rho)?.density(u, v)
}

pub fn gaussian_pair_conditional_cdf(rho: f64, v: f64, u: f64) -> Result<f64> {
    GaussianPair::new(rho)?.conditional_cdf(v, u)
}

pub fn gaussian_pair_conditional_quantile(rho: f64, p: f64, u: f64) -> Result<f64> {
    GaussianPair::new(rho)?.conditional_quantile(p, u)
}

/// Residuals of the copula-density identities on a normal-score grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairValidation {
    pub copula: String,
    pub grid_size: usize,
    /// max over rows `u` of |int_0^1 phi(u, v) dv - 1|
    pub row_integral_residual: f64,
    /// max over columns `v` of |int_0^1 phi(u, v) du - 1|
    pub column_integral_residual: f64,
    /// max(0, -min phi) over the grid
    pub max_negativity: f64,
    /// max |phi(u, v) - phi(v, u)|; informational, asymmetric copulas exist
    pub symmetry_residual: f64,
    pub evaluation_failures: usize,
    pub tolerance: f64,
    pub passed: bool,
}

/// Checks that every row and column of the density integrates to one and
/// that the density is nonnegative. Rows and columns are probed at the
/// midpoints `(i - 1/2) / grid_size` of a uniform grid; each integral uses a
/// Gauss-Legendre rule in normal scores with at least [`DEFAULT_ORDER`]
/// nodes.
pub fn validate_pair(copula: &dyn PairwiseCopula, grid_size: usize) -> Result<PairValidation> {
    const TOLERANCE: f64 = 1e-6;
    if grid_size < 8 {
        return Err(Error::InvalidArgument(format!(
            "validation grid needs at least 8 nodes, got {grid_size}"
        )));
    }
    let rule = gauss_legendre(
        grid_size.max(DEFAULT_ORDER),
        -GAUSSIAN_HALF_WIDTH,
        GAUSSIAN_HALF_WIDTH,
    )?;
    let probes: Vec<f64> = (0..grid_size)
        .map(|i| normal_quantile_raw((i as f64 + 0.5) / grid_size as f64))
        .collect();

    let mut failures = 0usize;
    let mut eval = |x: f64, y: f64| match copula.density_normal_scores(x, y) {
        Ok(d) if d.is_finite() => d,
        _ => {
            failures += 1;
            f64::NAN
        }
    };

    let mut row_res: f64 = 0.0;
    let mut col_res: f64 = 0.0;
    let mut neg: f64 = 0.0;
    let mut sym: f64 = 0.0;
    for &p in &probes {
        let mut row = 0.0;
        let mut col = 0.0;
        for (y, w) in rule.iter() {
            let g = w * std_normal_pdf(y);
            let r = eval(p, y);
            let c = eval(y, p);
            neg = neg.max(-r).max(-c);
            row += g * r;
            col += g * c;
        }
        row_res = row_res.max((row - 1.0).abs());
        col_res = col_res.max((col - 1.0).abs());
        for &q in &probes {
            let a = eval(p, q);
            let b = eval(q, p);
            neg = neg.max(-a);
            sym = sym.max((a - b).abs());
        }
    }
    let (row_res, col_res, sym) = if failures > 0 {
        (f64::NAN, f64::NAN, f64::NAN)
    } else {
        (row_res, col_res, sym)
    };
    let passed = failures == 0 && row_res <= TOLERANCE && col_res <= TOLERANCE && neg <= 0.0;
    Ok(PairValidation {
        copula: copula.describe(),
        grid_size,
        row_integral_residual: row_res,
        column_integral_residual: col_res,
        max_negativity: neg.max(0.0),
        symmetry_residual: sym,
        evaluation_failures: failures,
        tolerance: TOLERANCE,
        passed,
    })
}
