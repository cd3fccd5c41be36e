//! Product measures in coordinates: independent marginal laws `mu_k`, the
//! probability integral transform, and the second-moment series that decides
//! square integrability.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{
    normal_quantile_raw, open_unit, par_collect, std_normal_cdf, stream_rng, Convergence,
    SeriesVerdict,
};
use crate::sampler::SampleBatch;

/// A continuous law on the real line.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum MarginalLaw {
    Normal { mean: f64, variance: f64 },
    Uniform { low: f64, high: f64 },
    Exponential { rate: f64 },
    Logistic { location: f64, scale: f64 },
}

impl MarginalLaw {
    pub fn normal(mean: f64, variance: f64) -> Result<Self> {
        let law = MarginalLaw::Normal { mean, variance };
        law.validate()?;
        Ok(law)
    }

    pub fn standard_normal() -> Self {
        MarginalLaw::Normal {
            mean: 0.0,
            variance: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            MarginalLaw::Normal { mean, variance } => {
                mean.is_finite() && variance.is_finite() && variance > 0.0
            }
            MarginalLaw::Uniform { low, high } => low.is_finite() && high.is_finite() && low < high,
            MarginalLaw::Exponential { rate } => rate.is_finite() && rate > 0.0,
            MarginalLaw::Logistic { location, scale } => {
                location.is_finite() && scale.is_finite() && scale > 0.0
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!(
                "invalid marginal law {self:?}"
            )))
        }
    }

    /// All supported laws have continuous CDFs.
    pub fn is_continuous(&self) -> bool {
        true
    }

    pub fn cdf(&self, x: f64) -> f64 {
        match *self {
            MarginalLaw::Normal { mean, variance } => std_normal_cdf((x - mean) / variance.sqrt()),
            MarginalLaw::Uniform { low, high } => ((x - low) / (high - low)).clamp(0.0, 1.0),
            MarginalLaw::Exponential { rate } => {
                if x <= 0.0 {
                    0.0
                } else {
                    -(-rate * x).exp_m1()
                }
            }
            MarginalLaw::Logistic { location, scale } => {
                let z = (x - location) / scale;
                if z >= 0.0 {
                    1.0 / (1.0 + (-z).exp())
                } else {
                    let e = z.exp();
                    e / (1.0 + e)
                }
            }
        }
    }

    /// `F^{-1}(p)` for `p` in (0, 1).
    pub fn quantile(&self, p: f64) -> Result<f64> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::Domain(format!(
                "quantile requires p in (0, 1), got {p}"
            )));
        }
        Ok(self.quantile_unchecked(p))
    }

    #[inline]
    pub(crate) fn quantile_unchecked(&self, p: f64) -> f64 {
        match *self {
            MarginalLaw::Normal { mean, variance } => {
                mean + variance.sqrt() * normal_quantile_raw(p)
            }
            MarginalLaw::Uniform { low, high } => low + (high - low) * p,
            MarginalLaw::Exponential { rate } => -(-p).ln_1p() / rate,
            MarginalLaw::Logistic { location, scale } => location + scale * (p / (1.0 - p)).ln(),
        }
    }

    /// `int x^2 mu(dx)`.
    pub fn second_moment(&self) -> f64 {
        match *self {
            MarginalLaw::Normal { mean, variance } => mean * mean + variance,
            MarginalLaw::Uniform { low, high } => (low * low + low * high + high * high) / 3.0,
            MarginalLaw::Exponential { rate } => 2.0 / (rate * rate),
            MarginalLaw::Logistic { location, scale } => {
                location * location + scale * scale * std::f64::consts::PI.powi(2) / 3.0
            }
        }
    }

    pub fn variance(&self) -> f64 {
        match *self {
            MarginalLaw::Normal { variance, .. } => variance,
            MarginalLaw::Uniform { low, high } => (high - low).powi(2) / 12.0,
            MarginalLaw::Exponential { rate } => 1.0 / (rate * rate),
            MarginalLaw::Logistic { scale, .. } => {
                scale * scale * std::f64::consts::PI.powi(2) / 3.0
            }
        }
    }

    /// The same family of law with variance multiplied by `factor`, location
    /// (or the uniform midpoint) kept fixed. Exponential laws have no free
    /// location, so their mean moves with the scale.
    pub fn scale_variance(&self, factor: f64) -> MarginalLaw {
        let s = factor.sqrt();
        match *self {
            MarginalLaw::Normal { mean, variance } => MarginalLaw::Normal {
                mean,
                variance: variance * factor,
            },
            MarginalLaw::Uniform { low, high } => {
                let mid = 0.5 * (low + high);
                let half = 0.5 * (high - low) * s;
                MarginalLaw::Uniform {
                    low: mid - half,
                    high: mid + half,
                }
            }
            MarginalLaw::Exponential { rate } => MarginalLaw::Exponential { rate: rate / s },
            MarginalLaw::Logistic { location, scale } => MarginalLaw::Logistic {
                location,
                scale: scale * s,
            },
        }
    }
}

/// Variance as a function of the coordinate index `k >= 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum VarianceRule {
    Constant {
        value: f64,
    },
    /// `scale * k^(-exponent)`
    Power {
        scale: f64,
        exponent: f64,
    },
    /// `scale * ratio^k`
    Geometric {
        scale: f64,
        ratio: f64,
    },
}

impl VarianceRule {
    pub fn at(&self, k: usize) -> f64 {
        match *self {
            VarianceRule::Constant { value } => value,
            VarianceRule::Power { scale, exponent } => scale * (k as f64).powf(-exponent),
            VarianceRule::Geometric { scale, ratio } => scale * ratio.powi(k as i32),
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match *self {
            VarianceRule::Constant { value } => value.is_finite() && value > 0.0,
            VarianceRule::Power { scale, exponent } => {
                scale.is_finite() && scale > 0.0 && exponent.is_finite()
            }
            VarianceRule::Geometric { scale, ratio } => {
                scale.is_finite() && scale > 0.0 && ratio.is_finite() && ratio > 0.0
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!(
                "invalid variance rule {self:?}"
            )))
        }
    }

    fn scaled(&self, factor: f64) -> VarianceRule {
        match *self {
            VarianceRule::Constant { value } => VarianceRule::Constant {
                value: value * factor,
            },
            VarianceRule::Power { scale, exponent } => VarianceRule::Power {
                scale: scale * factor,
                exponent,
            },
            VarianceRule::Geometric { scale, ratio } => VarianceRule::Geometric {
                scale: scale * factor,
                ratio,
            },
        }
    }
}

/// Marginal laws past the explicit prefix.
#[derive(Clone)]
pub enum MarginalTail {
    /// `N(mean, variance(k))`
    Normal { mean: f64, variance: VarianceRule },
    /// The same law at every index.
    Repeat(MarginalLaw),
    /// Arbitrary index-dependent laws; series questions fall back to a
    /// numeric heuristic.
    Custom(Arc<dyn Fn(usize) -> MarginalLaw + Send + Sync>),
}

impl fmt::Debug for MarginalTail {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MarginalTail::Normal { mean, variance } => f
                .debug_struct("Normal")
                .field("mean", mean)
                .field("variance", variance)
                .finish(),
            MarginalTail::Repeat(law) => f.debug_tuple("Repeat").field(law).finish(),
            MarginalTail::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

/// A product measure `mu = mu_1 x mu_2 x ...` given coordinatewise.
#[derive(Debug, Clone)]
pub struct ProductMeasureSpec {
    prefix: Vec<MarginalLaw>,
    tail: MarginalTail,
    truncation: usize,
}

pub const DEFAULT_TRUNCATION: usize = 100;

impl ProductMeasureSpec {
    pub fn new(prefix: Vec<MarginalLaw>, tail: MarginalTail) -> Result<Self> {
        for law in &prefix {
            law.validate()?;
        }
        match &tail {
            MarginalTail::Normal { mean, variance } => {
                if !mean.is_finite() {
                    return Err(Error::InvalidArgument(format!(
                        "normal mean {mean} is not finite"
                    )));
                }
                variance.validate()?;
            }
            MarginalTail::Repeat(law) => law.validate()?,
            MarginalTail::Custom(_) => {}
        }
        Ok(Self {
            prefix,
            tail,
            truncation: DEFAULT_TRUNCATION,
        })
    }

    /// Standard normal in every coordinate: the coordinate laws of the
    /// canonical Gaussian cylindrical measure.
    pub fn standard_normal() -> Self {
        Self::iid(MarginalLaw::standard_normal())
    }

    pub fn iid(law: MarginalLaw) -> Self {
        Self {
            prefix: Vec::new(),
            tail: MarginalTail::Repeat(law),
            truncation: DEFAULT_TRUNCATION,
        }
    }

    /// Centred normals with variances from `rule`.
    pub fn centred_normal(rule: VarianceRule) -> Result<Self> {
        Self::new(
            Vec::new(),
            MarginalTail::Normal {
                mean: 0.0,
                variance: rule,
            },
        )
    }

    pub fn with_truncation(mut self, truncation: usize) -> Self {
        self.truncation = truncation.max(1);
        self
    }

    pub fn truncation(&self) -> usize {
        self.truncation
    }

    pub fn tail(&self) -> &MarginalTail {
        &self.tail
    }

    /// Law of coordinate `k >= 1`.
    pub fn marginal(&self, k: usize) -> MarginalLaw {
        assert!(k >= 1, "coordinates are indexed from 1");
        if let Some(law) = self.prefix.get(k - 1) {
            return *law;
        }
        match &self.tail {
            MarginalTail::Normal { mean, variance } => MarginalLaw::Normal {
                mean: *mean,
                variance: variance.at(k),
            },
            MarginalTail::Repeat(law) => *law,
            MarginalTail::Custom(f) => f(k),
        }
    }

    pub fn marginals(&self, k: usize) -> Vec<MarginalLaw> {
        (1..=k).map(|j| self.marginal(j)).collect()
    }

    /// Whether `inf_k E[x_k^2]` over the tail is positive. `None` when the
    /// tail is a custom rule.
    pub fn tail_second_moment_bounded_below(&self) -> Option<bool> {
        match &self.tail {
            MarginalTail::Repeat(_) => Some(true),
            MarginalTail::Normal { mean, variance } => Some(
                *mean != 0.0
                    || match *variance {
                        VarianceRule::Constant { .. } => true,
                        VarianceRule::Power { exponent, .. } => exponent <= 0.0,
                        VarianceRule::Geometric { ratio, .. } => ratio >= 1.0,
                    },
            ),
            MarginalTail::Custom(_) => None,
        }
    }

    /// Multiplies every coordinate variance by `factor`.
    pub fn scale_variances(&self, factor: f64) -> Result<Self> {
        if !(factor.is_finite() && factor > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "variance factor {factor} must be positive"
            )));
        }
        let prefix = self
            .prefix
            .iter()
            .map(|l| l.scale_variance(factor))
            .collect();
        let tail = match &self.tail {
            MarginalTail::Normal { mean, variance } => MarginalTail::Normal {
                mean: *mean,
                variance: variance.scaled(factor),
            },
            MarginalTail::Repeat(law) => MarginalTail::Repeat(law.scale_variance(factor)),
            MarginalTail::Custom(f) => {
                let f = Arc::clone(f);
                MarginalTail::Custom(Arc::new(move |k| f(k).scale_variance(factor)))
            }
        };
        Ok(Self {
            prefix,
            tail,
            truncation: self.truncation,
        })
    }

    /// `sum_{k > K} E[x_k^2]` when the tail admits a closed form.
    pub fn second_moment_remainder(&self, big_k: usize) -> Option<f64> {
        let start = big_k.max(self.prefix.len()) + 1;
        let head: f64 = (big_k + 1..start)
            .map(|k| self.marginal(k).second_moment())
            .sum();
        let tail = match &self.tail {
            MarginalTail::Repeat(_) => f64::INFINITY,
            MarginalTail::Normal { mean, variance } => {
                if *mean != 0.0 {
                    f64::INFINITY
                } else {
                    match *variance {
                        VarianceRule::Constant { .. } => f64::INFINITY,
                        VarianceRule::Power { scale, exponent } => {
                            if exponent > 1.0 {
                                scale * hurwitz_zeta(exponent, start)
                            } else {
                                f64::INFINITY
                            }
                        }
                        VarianceRule::Geometric { scale, ratio } => {
                            if ratio < 1.0 {
                                scale * ratio.powi(start as i32) / (1.0 - ratio)
                            } else {
                                f64::INFINITY
                            }
                        }
                    }
                }
            }
            MarginalTail::Custom(_) => return None,
        };
        Some(head + tail)
    }

    /// `sum_k E[x_k^2]` in closed form where available.
    pub fn second_moment_limit(&self) -> Option<f64> {
        let head: f64 = self.prefix.iter().map(|l| l.second_moment()).sum();
        self.second_moment_remainder(self.prefix.len())
            .map(|rest| head + rest)
    }
}

/// `sum_{k >= a} k^(-s)` for `s > 1`, by direct summation up to an offset
/// followed by an Euler-Maclaurin tail.
pub fn hurwitz_zeta(s: f64, a: usize) -> f64 {
    const N: usize = 32;
    // Bernoulli numbers B_2, B_4, ..., B_12
    const B: [f64; 6] = [
        1.0 / 6.0,
        -1.0 / 30.0,
        1.0 / 42.0,
        -1.0 / 30.0,
        5.0 / 66.0,
        -691.0 / 2730.0,
    ];
    let a = a.max(1);
    let direct: f64 = (a..a + N).map(|k| (k as f64).powf(-s)).sum();
    let m = (a + N) as f64;
    let mut tail = m.powf(1.0 - s) / (s - 1.0) + 0.5 * m.powf(-s);
    // Term j uses s (s+1) ... (s + 2j - 2) m^(-s-2j+1) / (2j)!
    let mut rising = s;
    let mut fact = 2.0;
    let mut power = m.powf(-s - 1.0);
    for (j, b) in B.iter().enumerate() {
        tail += b / fact * rising * power;
        let j2 = 2.0 * (j as f64 + 1.0);
        rising *= (s + j2 - 1.0) * (s + j2);
        fact *= (j2 + 1.0) * (j2 + 2.0);
        power /= m * m;
    }
    direct + tail
}

/// `g_k(x) = (F_1(x_1), ..., F_k(x_k))`.
pub fn probability_integral_transform(spec: &ProductMeasureSpec, x: &[f64]) -> Vec<f64> {
    x.iter()
        .enumerate()
        .map(|(j, &v)| spec.marginal(j + 1).cdf(v))
        .collect()
}

/// Partial sums of `sum_k E[x_k^2]` with a convergence verdict.
pub fn second_moment_series(spec: &ProductMeasureSpec, big_k: usize) -> SeriesVerdict {
    let big_k = big_k.max(1);
    let terms: Vec<f64> = (1..=big_k)
        .map(|k| spec.marginal(k).second_moment())
        .collect();
    if terms.iter().any(|t| t.is_infinite()) {
        return SeriesVerdict::analytic(
            terms,
            Convergence::Diverges,
            "a coordinate has infinite second moment",
        );
    }
    match spec.second_moment_limit() {
        Some(limit) if limit.is_finite() => SeriesVerdict::analytic(
            terms,
            Convergence::Converges,
            format!("tail rule is summable; limit {limit}"),
        ),
        Some(_) => SeriesVerdict::analytic(
            terms,
            Convergence::Diverges,
            "tail terms are not summable (constant or p <= 1 decay)",
        ),
        None => SeriesVerdict::heuristic(terms),
    }
}

/// `n` independent draws of the first `k` coordinates of `mu`, by inversion.
/// Draw `i` uses stream `(seed, i)`.
pub fn sample_mu(spec: &ProductMeasureSpec, k: usize, n: usize, seed: u64) -> SampleBatch {
    let laws = spec.marginals(k);
    let rows = par_collect(n, |i| {
        let mut rng = stream_rng(seed, i as u64);
        laws.iter()
            .map(|law| law.quantile_unchecked(open_unit(&mut rng)))
            .collect::<Vec<f64>>()
    });
    SampleBatch::from_rows(k, rows)
}
