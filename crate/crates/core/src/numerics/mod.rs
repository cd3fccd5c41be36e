//! Special functions, fixed-order quadrature, Monte Carlo summaries and
//! the seeded stream machinery shared by every other module.

mod montecarlo;
mod normal;
mod quadrature;
mod series;
mod streams;

pub use montecarlo::{monte_carlo_mean, MonteCarloEstimate};
pub(crate) use normal::{clamp_open, normal_quantile_raw};
pub use normal::{std_normal_cdf, std_normal_pdf, std_normal_quantile};
pub use quadrature::{
    gauss_legendre, integrate_1d, integrate_2d, QuadratureRule, DEFAULT_ORDER, GAUSSIAN_HALF_WIDTH,
};
pub use series::{Convergence, SeriesVerdict};
pub use streams::{open_unit, par_collect, stream_rng, StreamRng};
