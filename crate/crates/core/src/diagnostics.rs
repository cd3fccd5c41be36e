//! Analytics on the pushforward: Hellinger affinities and the Kakutani
//! series, the density martingale `M_k = c_k(g_k(h))` under `mu`, uniform
//! integrability probes, `l^2` concentration and second-moment preservation.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::families::{
    is_square_summable, ChainCopulaFamily, ChainTail, CopulaFamily, Summability,
};
use crate::numerics::{
    clamp_open, gauss_legendre, open_unit, par_collect, std_normal_pdf, stream_rng, Convergence,
    MonteCarloEstimate, SeriesVerdict, GAUSSIAN_HALF_WIDTH,
};
use crate::pair_copulas::PairwiseCopula;
use crate::product_measures::{second_moment_series, MarginalLaw, ProductMeasureSpec};
use crate::sampler::{sample_uniform_chain, uniform_path};

/// `int int sqrt(phi(u, v)) du dv`, computed in normal scores on
/// `[-8, 8]^2` with an `order`-point Gauss-Legendre rule per axis.
pub fn hellinger_affinity(pair: &dyn PairwiseCopula, order: usize) -> Result<f64> {
    if pair.is_independence() {
        return Ok(1.0);
    }
    let rule = gauss_legendre(order, -GAUSSIAN_HALF_WIDTH, GAUSSIAN_HALF_WIDTH)?;
    let g: Vec<f64> = rule.iter().map(|(x, w)| w * std_normal_pdf(x)).collect();
    let mut total = 0.0;
    for (&x, &gx) in rule.nodes().iter().zip(&g) {
        let mut row = 0.0;
        for (&y, &gy) in rule.nodes().iter().zip(&g) {
            let d = pair.density_normal_scores(x, y)?;
            if !(d.is_finite() && d >= 0.0) {
                return Err(Error::Evaluation {
                    u: x,
                    v: y,
                    value: d,
                });
            }
            row += gy * d.sqrt();
        }
        total += gx * row;
    }
    Ok(total)
}

/// Closed-form affinity of the bivariate Gaussian copula with correlation
/// `rho`: the Bhattacharyya coefficient between `N(0, [[1, rho], [rho, 1]])`
/// and `N(0, I)`, `(1 - rho^2)^(1/4) / (1 - rho^2 / 4)^(1/2)`.
pub fn gaussian_pair_affinity(rho: f64) -> f64 {
    let r2 = rho * rho;
    (1.0 - r2).powf(0.25) / (1.0 - 0.25 * r2).sqrt()
}

/// Terms `1 - affinity(phi_j)` for `j = 1..=K` with a convergence verdict.
///
/// Gaussian links have `1 - affinity(rho) ~ rho^2 / 8`, so the series
/// converges exactly when the correlations are square summable. Terms below
/// zero from quadrature rounding are reported as zero.
pub fn hellinger_series(
    family: &ChainCopulaFamily,
    big_k: usize,
    order: usize,
) -> Result<SeriesVerdict> {
    let big_k = big_k.max(1);
    let terms = par_collect(big_k, |i| -> Result<f64> {
        let a = hellinger_affinity(&*family.pair(i + 1), order)?;
        Ok((1.0 - a).max(0.0))
    })
    .into_iter()
    .collect::<Result<Vec<f64>>>()?;

    Ok(match family.tail() {
        ChainTail::Independence => SeriesVerdict::analytic(
            terms,
            Convergence::Converges,
            "independence tail: all but finitely many terms vanish",
        ),
        ChainTail::Gaussian(rule) => match is_square_summable(rule) {
            Summability::Yes => SeriesVerdict::analytic(
                terms,
                Convergence::Converges,
                format!("{rule:?}: sum rho_k^2 < inf and 1 - affinity(rho) ~ rho^2"),
            ),
            Summability::No => SeriesVerdict::analytic(
                terms,
                Convergence::Diverges,
                format!("{rule:?}: sum rho_k^2 = inf and 1 - affinity(rho) ~ rho^2"),
            ),
            Summability::Unknown => SeriesVerdict::heuristic(terms),
        },
        ChainTail::Repeat(pair) => {
            let gap = 1.0 - hellinger_affinity(&**pair, order)?;
            if gap > 1e-12 {
                SeriesVerdict::analytic(
                    terms,
                    Convergence::Diverges,
                    format!("repeated link has constant term {gap:e}"),
                )
            } else {
                SeriesVerdict::analytic(
                    terms,
                    Convergence::Converges,
                    "repeated link is independence",
                )
            }
        }
        ChainTail::Custom(_) => SeriesVerdict::heuristic(terms),
    })
}

/// One cell of a uniform-integrability table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct UiCell {
    pub k: usize,
    pub r: f64,
    /// Estimate of `int_{c_k >= r} c_k du = P_{C_k}(c_k(U) >= r)`.
    pub estimate: MonteCarloEstimate,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UiProbe {
    pub cells: Vec<UiCell>,
    /// `max_k` of the estimates, per `r`, in the order of the input.
    pub sup_over_k: Vec<(f64, f64)>,
}

/// Estimates `int_{c_k >= r} c_k du` for every `(k, r)` by sampling `U`
/// from `C_k` itself. One set of chain paths, extended to the largest `k`,
/// serves every cell.
pub fn uniform_integrability_probe(
    family: &ChainCopulaFamily,
    r_values: &[f64],
    k_values: &[usize],
    n: usize,
    seed: u64,
) -> Result<UiProbe> {
    if let Some(r) = r_values.iter().find(|&&r| r.is_nan() || r <= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "thresholds must be positive, got {r}"
        )));
    }
    if let Some(k) = k_values.iter().find(|&&k| k < 2) {
        return Err(Error::InvalidArgument(format!(
            "k must be at least 2, got {k}"
        )));
    }
    let Some(&max_k) = k_values.iter().max() else {
        return Ok(UiProbe {
            cells: Vec::new(),
            sup_over_k: Vec::new(),
        });
    };
    let batch = sample_uniform_chain(family, max_k, seed, n)?;
    let pairs = family.pairs(max_k);
    // densities[i * max_k + (k - 1)] = c_k of path i
    let densities: Vec<Vec<f64>> = par_collect(n, |i| {
        let row = batch.row(i);
        let mut c = 1.0;
        let mut out = Vec::with_capacity(max_k);
        out.push(1.0);
        for j in 1..max_k {
            c *= pairs[j - 1].density(row[j - 1], row[j]).unwrap_or(f64::NAN);
            out.push(c);
        }
        out
    });
    if densities.iter().flatten().any(|d| !d.is_finite()) {
        return Err(Error::Domain(
            "chain density evaluation failed on a sampled path".into(),
        ));
    }

    let mut cells = Vec::with_capacity(k_values.len() * r_values.len());
    for &k in k_values {
        for &r in r_values {
            let hits: Vec<f64> = densities
                .iter()
                .map(|d| if d[k - 1] >= r { 1.0 } else { 0.0 })
                .collect();
            cells.push(UiCell {
                k,
                r,
                estimate: MonteCarloEstimate::from_values(&hits)?,
            });
        }
    }
    let sup_over_k = r_values
        .iter()
        .map(|&r| {
            let m = cells
                .iter()
                .filter(|c| c.r == r)
                .map(|c| c.estimate.mean)
                .fold(0.0, f64::max);
            (r, m)
        })
        .collect();
    Ok(UiProbe { cells, sup_over_k })
}

/// Histogram over log-spaced buckets, with separate underflow and overflow
/// counts.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LogHistogram {
    /// Bucket `i` covers `[edges[i], edges[i + 1])`.
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
    /// Values below `edges[0]`, including exact zeros.
    pub below: u64,
    /// Values at or above the last edge.
    pub above: u64,
}

impl LogHistogram {
    /// Buckets from `10^lo` to `10^hi` with `per_decade` buckets per decade.
    pub fn build(values: &[f64], lo: i32, hi: i32, per_decade: usize) -> Self {
        let buckets = (hi - lo) as usize * per_decade;
        let edges: Vec<f64> = (0..=buckets)
            .map(|i| 10f64.powf(lo as f64 + i as f64 / per_decade as f64))
            .collect();
        let mut counts = vec![0u64; buckets];
        let (mut below, mut above) = (0, 0);
        for &v in values {
            if v.is_nan() || v < edges[0] {
                below += 1;
            } else if v >= edges[buckets] {
                above += 1;
            } else {
                let pos = ((v.log10() - lo as f64) * per_decade as f64).floor() as usize;
                let mut b = pos.min(buckets - 1);
                // guard the floor against rounding at the edges
                while b > 0 && v < edges[b] {
                    b -= 1;
                }
                while b + 1 < buckets && v >= edges[b + 1] {
                    b += 1;
                }
                counts[b] += 1;
            }
        }
        Self {
            edges,
            counts,
            below,
            above,
        }
    }
}

/// Paths of the density martingale `M_k(h) = c_k(g_k(h))` under `mu`.
#[derive(Debug, Clone)]
pub struct MartingaleTracker {
    depth: usize,
    /// `paths[i * depth + (k - 1)] = M_k` of path `i`.
    paths: Vec<f64>,
    /// `factors[i * depth + (k - 1)] = X_k`, with `X_1 = 1`.
    factors: Vec<f64>,
}

impl MartingaleTracker {
    /// Draws `h ~ mu`, maps it through the marginal CDFs and multiplies the
    /// link densities along each path.
    pub fn run(
        spec: &ProductMeasureSpec,
        family: &ChainCopulaFamily,
        depth: usize,
        n: usize,
        seed: u64,
    ) -> Result<Self> {
        if depth < 2 {
            return Err(Error::InvalidArgument(format!(
                "martingale depth must be at least 2, got {depth}"
            )));
        }
        if n < 2 {
            return Err(Error::InsufficientSamples(n));
        }
        let laws: Vec<MarginalLaw> = spec.marginals(depth);
        let pairs = family.pairs(depth);
        let rows = par_collect(n, |i| -> Result<(Vec<f64>, Vec<f64>)> {
            let mut rng = stream_rng(seed, i as u64);
            let u: Vec<f64> = laws
                .iter()
                .map(|law| {
                    let x = law.quantile_unchecked(open_unit(&mut rng));
                    clamp_open(law.cdf(x))
                })
                .collect();
            let mut m = Vec::with_capacity(depth);
            let mut f = Vec::with_capacity(depth);
            m.push(1.0);
            f.push(1.0);
            for k in 1..depth {
                let x = pairs[k - 1].density(u[k - 1], u[k])?;
                f.push(x);
                m.push(m[k - 1] * x);
            }
            Ok((m, f))
        });
        let mut paths = Vec::with_capacity(n * depth);
        let mut factors = Vec::with_capacity(n * depth);
        for r in rows {
            let (m, f) = r?;
            paths.extend(m);
            factors.extend(f);
        }
        Ok(Self {
            depth,
            paths,
            factors,
        })
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn sample_count(&self) -> usize {
        self.paths.len() / self.depth
    }

    /// `M_1, ..., M_K` of path `i`.
    pub fn path(&self, i: usize) -> &[f64] {
        &self.paths[i * self.depth..(i + 1) * self.depth]
    }

    /// `X_1, ..., X_K` of path `i`.
    pub fn factors(&self, i: usize) -> &[f64] {
        &self.factors[i * self.depth..(i + 1) * self.depth]
    }

    /// `M_k` across paths.
    pub fn level(&self, k: usize) -> Vec<f64> {
        assert!(k >= 1 && k <= self.depth);
        self.paths
            .iter()
            .skip(k - 1)
            .step_by(self.depth)
            .copied()
            .collect()
    }

    pub fn mean(&self, k: usize) -> Result<MonteCarloEstimate> {
        MonteCarloEstimate::from_values(&self.level(k))
    }

    /// `E_mu[M_k 1{M_k >= r}]`, the uniform-integrability tail at level `k`.
    pub fn tail_mass(&self, k: usize, r: f64) -> Result<MonteCarloEstimate> {
        let v: Vec<f64> = self
            .level(k)
            .into_iter()
            .map(|m| if m >= r { m } else { 0.0 })
            .collect();
        MonteCarloEstimate::from_values(&v)
    }

    pub fn summary(&self) -> Result<MartingaleSummary> {
        let means = (1..=self.depth)
            .map(|k| self.mean(k))
            .collect::<Result<Vec<_>>>()?;
        let flagged = means
            .iter()
            .enumerate()
            .filter(|(_, e)| (e.mean - 1.0).abs() > 4.0 * e.standard_error)
            .map(|(k, _)| k + 1)
            .collect();
        let terminal = self.level(self.depth);
        let mut sorted = terminal.clone();
        sorted.sort_by(|a, b| a.total_cmp(b));
        let median = sorted[sorted.len() / 2];
        Ok(MartingaleSummary {
            depth: self.depth,
            sample_count: self.sample_count(),
            means,
            flagged,
            terminal_median: median,
            terminal_histogram: LogHistogram::build(&terminal, -8, 4, 2),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MartingaleSummary {
    pub depth: usize,
    pub sample_count: usize,
    /// Sample mean of `M_k` for `k = 1..=depth`.
    pub means: Vec<MonteCarloEstimate>,
    /// Levels `k` where `|mean - 1| > 4 SE`.
    pub flagged: Vec<usize>,
    pub terminal_median: f64,
    pub terminal_histogram: LogHistogram,
}

pub fn martingale_run(
    spec: &ProductMeasureSpec,
    family: &ChainCopulaFamily,
    depth: usize,
    n: usize,
    seed: u64,
) -> Result<MartingaleSummary> {
    MartingaleTracker::run(spec, family, depth, n, seed)?.summary()
}

/// `r_k(x) = c_k(F_1(x_1), ..., F_k(x_k))`, the density of the `k`-th
/// projection of `nu` with respect to that of `mu`.
pub fn radon_nikodym_density(
    family: &ChainCopulaFamily,
    spec: &ProductMeasureSpec,
    x: &[f64],
) -> Result<f64> {
    let u: Vec<f64> = x
        .iter()
        .enumerate()
        .map(|(j, &v)| clamp_open(spec.marginal(j + 1).cdf(v)))
        .collect();
    crate::families::chain_density(family, &u)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum L2Verdict {
    Concentrated,
    NotConcentrated,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct L2Report {
    pub verdict: L2Verdict,
    pub evidence: String,
    /// Closed-form `sum_k E[x_k^2]` where available.
    pub limit: Option<f64>,
    pub series: SeriesVerdict,
}

/// Decides whether the pushforward puts full mass on `l^2`.
///
/// Marginals are preserved, so `E_nu[sum x_k^2] = sum_k E_mu[x_k^2]`; a
/// convergent series gives concentration. A divergent series proves the
/// opposite only when the family has an independent tail and the
/// coordinate second moments stay bounded below, where the second
/// Borel-Cantelli lemma forces `sum x_k^2 = inf` almost surely.
pub fn l2_concentration_check(
    spec: &ProductMeasureSpec,
    family: &CopulaFamily,
    big_k: usize,
) -> L2Report {
    let series = second_moment_series(spec, big_k);
    let limit = spec.second_moment_limit().filter(|l| l.is_finite());
    let (verdict, evidence) = match series.verdict {
        Convergence::Converges => (
            L2Verdict::Concentrated,
            format!("second-moment series converges ({})", series.evidence),
        ),
        Convergence::Diverges => {
            match (
                family.has_independent_tail(),
                spec.tail_second_moment_bounded_below(),
            ) {
                (true, Some(true)) => (
                    L2Verdict::NotConcentrated,
                    "independent tail with second moments bounded below: sum x_k^2 = inf a.s."
                        .to_string(),
                ),
                (false, _) => (
                    L2Verdict::Inconclusive,
                    "second-moment series diverges but the family tail is dependent".to_string(),
                ),
                _ => (
                    L2Verdict::Inconclusive,
                    "second-moment series diverges but coordinate moments are not bounded below"
                        .to_string(),
                ),
            }
        }
        Convergence::Inconclusive => (
            L2Verdict::Inconclusive,
            format!("second-moment series undecided ({})", series.evidence),
        ),
    };
    L2Report {
        verdict,
        evidence,
        limit,
        series,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentReport {
    pub truncation: usize,
    /// Monte Carlo estimate of `E_nu[sum_{k <= K} x_k^2]`.
    pub estimate: MonteCarloEstimate,
    /// `sum_{k <= K} E_mu[x_k^2]`.
    pub analytic: f64,
    /// `sum_{k > K} E_mu[x_k^2]`, when known in closed form.
    pub truncation_tail: Option<f64>,
    pub z_score: f64,
    pub agrees: bool,
}

/// Compares `E_nu[sum_{k<=K} x_k^2]` by sampling against the marginal
/// second moments of `mu`.
pub fn second_moment_preservation(
    spec: &ProductMeasureSpec,
    family: &ChainCopulaFamily,
    big_k: usize,
    n: usize,
    seed: u64,
) -> Result<MomentReport> {
    let series = second_moment_series(spec, big_k);
    if series.verdict == Convergence::Diverges {
        return Err(Error::NotSquareIntegrable);
    }
    let laws = spec.marginals(big_k);
    let pairs = family.pairs(big_k);
    let sums = par_collect(n, |i| -> Result<f64> {
        let u = uniform_path(&pairs, big_k, seed, i as u64)?;
        Ok(u.iter()
            .zip(&laws)
            .map(|(&v, law)| {
                let x = law.quantile_unchecked(v);
                x * x
            })
            .sum())
    })
    .into_iter()
    .collect::<Result<Vec<f64>>>()?;
    let estimate = MonteCarloEstimate::from_values(&sums)?;
    let analytic = series.total();
    Ok(MomentReport {
        truncation: big_k,
        estimate,
        analytic,
        truncation_tail: spec.second_moment_remainder(big_k),
        z_score: estimate.z_score(analytic),
        agrees: estimate.within(analytic, 4.0),
    })
}
