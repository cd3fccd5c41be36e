//! Consistent copula families on sequence spaces.
//!
//! A product measure `mu = mu_1 x mu_2 x ...` on the coordinates of a
//! separable Hilbert space, combined with a consistent family of copulas
//! `(C_k)`, determines a measure `nu` on `R^infinity` whose
//! finite-dimensional rectangle probabilities are
//! `C_k(mu_1(I_1), ..., mu_k(I_k))`. This crate builds such families,
//! samples `nu` coordinate by coordinate, and answers the questions that
//! decide whether `nu` lives on `l^2` and whether it is absolutely
//! continuous with respect to `mu`.

pub mod cli;
pub mod diagnostics;
pub mod error;
pub mod families;
pub mod numerics;
pub mod pair_copulas;
pub mod product_measures;
pub mod sampler;

pub use diagnostics::{
    hellinger_affinity, hellinger_series, l2_concentration_check, martingale_run,
    second_moment_preservation, uniform_integrability_probe, L2Report, L2Verdict,
    MartingaleSummary, MartingaleTracker, MomentReport, UiProbe,
};
pub use error::{Error, Result};
pub use families::{
    chain_cdf, chain_density, check_consistency, check_uniform_margins, gaussian_covariance_cdf,
    is_square_summable, CdfEstimate, CdfMethod, ChainCopulaFamily, ChainTail, CheckReport,
    CopulaFamily, CorrelationRule, CovarianceRule, GaussianCovarianceFamily, Summability,
};
pub use numerics::{Convergence, MonteCarloEstimate, QuadratureRule, SeriesVerdict};
pub use pair_copulas::{GaussianPair, Independence, PairwiseCopula, SharedPair};
pub use product_measures::{MarginalLaw, MarginalTail, ProductMeasureSpec, VarianceRule};
pub use sampler::{
    empirical_copula, ordered_subset_marginal, rectangle_probability, sample_nu,
    sample_uniform_chain, CoordinateStream, EmpiricalCopulaGrid, RectangleQuery, SampleBatch,
};
