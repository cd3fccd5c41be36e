use serde::Serialize;

use crate::error::{Error, Result};

/// Sample mean with its standard error `s / sqrt(n)` (Bessel-corrected `s`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MonteCarloEstimate {
    pub mean: f64,
    pub standard_error: f64,
    pub sample_count: usize,
}

impl MonteCarloEstimate {
    /// Two-pass summary of a slice. Summation order is the slice order, so
    /// results are reproducible bit for bit.
    pub fn from_values(values: &[f64]) -> Result<Self> {
        let n = values.len();
        if n < 2 {
            return Err(Error::InsufficientSamples(n));
        }
        let mean = values.iter().sum::<f64>() / n as f64;
        let ss: f64 = values.iter().map(|&v| (v - mean) * (v - mean)).sum();
        let var = ss / (n - 1) as f64;
        Ok(Self {
            mean,
            standard_error: (var / n as f64).sqrt(),
            sample_count: n,
        })
    }

    /// Whether `target` lies within `k` standard errors of the mean.
    pub fn within(&self, target: f64, k: f64) -> bool {
        (self.mean - target).abs() <= k * self.standard_error
    }

    /// Distance to `target` in units of standard error (infinite for SE = 0
    /// and a nonzero gap).
    pub fn z_score(&self, target: f64) -> f64 {
        let gap = (self.mean - target).abs();
        if gap == 0.0 {
            0.0
        } else {
            gap / self.standard_error
        }
    }
}

/// Mean and standard error of the first `n` values of a stream.
pub fn monte_carlo_mean<I>(value_stream: I, n: usize) -> Result<MonteCarloEstimate>
where
    I: IntoIterator<Item = f64>,
{
    if n < 2 {
        return Err(Error::InsufficientSamples(n));
    }
    let values: Vec<f64> = value_stream.into_iter().take(n).collect();
    if values.len() < n {
        return Err(Error::InsufficientSamples(values.len()));
    }
    MonteCarloEstimate::from_values(&values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{open_unit, stream_rng};

    #[test]
    fn constant_stream() {
        let e = monte_carlo_mean(std::iter::repeat(1.0), 100).unwrap();
        assert_eq!(e.mean, 1.0);
        assert_eq!(e.standard_error, 0.0);
        assert_eq!(e.sample_count, 100);
    }

    #[test]
    fn alternating_stream() {
        let e = monte_carlo_mean((0..).map(|i| if i % 2 == 0 { 0.0 } else { 2.0 }), 1000).unwrap();
        assert!((e.mean - 1.0).abs() < 1e-15);
        // sum of squared deviations is exactly n, so s^2 = n / (n - 1)
        let expected = (1000.0f64 / 999.0).sqrt() / 1000f64.sqrt();
        assert!((e.standard_error - expected).abs() < 1e-15);
        assert!((e.standard_error - 0.0317).abs() < 1e-4);
    }

    #[test]
    fn seeded_uniform_stream() {
        let mut rng = stream_rng(7, 0);
        let e = monte_carlo_mean(std::iter::repeat_with(|| open_unit(&mut rng)), 100_000).unwrap();
        assert!(e.within(0.5, 4.0), "{e:?}");
    }

    #[test]
    fn too_few_samples() {
        assert_eq!(
            monte_carlo_mean(std::iter::repeat(1.0), 1),
            Err(Error::InsufficientSamples(1))
        );
        assert_eq!(
            monte_carlo_mean([1.0, 2.0], 5),
            Err(Error::InsufficientSamples(2))
        );
    }
}
