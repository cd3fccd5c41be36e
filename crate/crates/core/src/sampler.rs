//! Sampling the pushforward of a product measure under a chain copula
//! family.
//!
//! The measure on the sequence space is never built. It exists as a stream
//! of coordinates: `V_1` is uniform, `V_{j+1}` is drawn from the conditional
//! law of link `j` given `V_j`, and `x_j = F_j^{-1}(V_j)`. Each stream is
//! keyed by `(seed, index)`, so the first `k` coordinates never change when
//! the stream is extended.

use std::io::{self, BufRead, Write};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::families::ChainCopulaFamily;
use crate::numerics::{open_unit, par_collect, stream_rng, MonteCarloEstimate, StreamRng};
use crate::pair_copulas::SharedPair;
use crate::product_measures::{MarginalLaw, ProductMeasureSpec};

/// Dense `n x k` batch of samples, row major.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleBatch {
    k: usize,
    data: Vec<f64>,
}

impl SampleBatch {
    pub fn new(k: usize, data: Vec<f64>) -> Result<Self> {
        if k == 0 || !data.len().is_multiple_of(k) {
            return Err(Error::InvalidArgument(format!(
                "{} values do not form rows of width {k}",
                data.len()
            )));
        }
        Ok(Self { k, data })
    }

    pub(crate) fn from_rows(k: usize, rows: Vec<Vec<f64>>) -> Self {
        let mut data = Vec::with_capacity(rows.len() * k);
        for r in rows {
            debug_assert_eq!(r.len(), k);
            data.extend(r);
        }
        Self { k, data }
    }

    pub fn dim(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.k
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.k..(i + 1) * self.k]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.data.chunks_exact(self.k)
    }

    pub fn column(&self, j: usize) -> impl Iterator<Item = f64> + '_ {
        assert!(j < self.k);
        self.data.iter().skip(j).step_by(self.k).copied()
    }

    /// Keeps the given 0-based columns, in order.
    pub fn project(&self, columns: &[usize]) -> SampleBatch {
        let rows = self
            .rows()
            .map(|r| columns.iter().map(|&c| r[c]).collect())
            .collect();
        SampleBatch::from_rows(columns.len(), rows)
    }

    /// CSV with header `coord_1,...,coord_k`, 17 significant digits per value.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        let header: Vec<String> = (1..=self.k).map(|j| format!("coord_{j}")).collect();
        writeln!(out, "{}", header.join(","))?;
        let mut line = String::new();
        for row in self.rows() {
            line.clear();
            for (j, v) in row.iter().enumerate() {
                if j > 0 {
                    line.push(',');
                }
                line.push_str(&format_f64(*v));
            }
            line.push('\n');
            out.write_all(line.as_bytes())?;
        }
        Ok(())
    }

    /// Reads a CSV with a header row and numeric cells.
    pub fn read_csv<R: BufRead>(input: R) -> Result<SampleBatch> {
        let mut lines = input.lines();
        let header = match lines.next() {
            Some(Ok(h)) => h,
            Some(Err(e)) => return Err(Error::InvalidArgument(format!("read error: {e}"))),
            None => return Err(Error::InvalidArgument("missing CSV header".into())),
        };
        let k = header.split(',').count();
        let mut data = Vec::new();
        for (lineno, line) in lines.enumerate() {
            let line = line.map_err(|e| Error::InvalidArgument(format!("read error: {e}")))?;
            if line.trim().is_empty() {
                continue;
            }
            let cells: Vec<&str> = line.split(',').collect();
            if cells.len() != k {
                return Err(Error::InvalidArgument(format!(
                    "line {}: expected {k} fields, found {}",
                    lineno + 2,
                    cells.len()
                )));
            }
            for c in cells {
                let v: f64 = c.trim().parse().map_err(|_| {
                    Error::InvalidArgument(format!("line {}: cannot parse {c:?}", lineno + 2))
                })?;
                data.push(v);
            }
        }
        SampleBatch::new(k, data)
    }
}

/// Fixed 17-significant-digit scientific notation.
pub fn format_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Lazily generated coordinates of one path of the pushforward measure.
#[derive(Debug)]
pub struct CoordinateStream<'a> {
    family: &'a ChainCopulaFamily,
    spec: &'a ProductMeasureSpec,
    seed: u64,
    index: u64,
    rng: StreamRng,
    position: usize,
    state: Option<f64>,
}

impl<'a> CoordinateStream<'a> {
    pub fn new(
        family: &'a ChainCopulaFamily,
        spec: &'a ProductMeasureSpec,
        seed: u64,
        index: u64,
    ) -> Self {
        Self {
            family,
            spec,
            seed,
            index,
            rng: stream_rng(seed, index),
            position: 0,
            state: None,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn index(&self) -> u64 {
        self.index
    }

    /// Number of coordinates produced so far.
    pub fn position(&self) -> usize {
        self.position
    }

    /// Current uniform `V_k`, if any coordinate has been produced.
    pub fn state(&self) -> Option<f64> {
        self.state
    }

    /// Next uniform `V_{k+1}`.
    pub fn next_uniform(&mut self) -> Result<f64> {
        let v = match self.state {
            None => open_unit(&mut self.rng),
            Some(prev) => {
                let pair = self.family.pair(self.position);
                advance(&*pair, &mut self.rng, prev)?
            }
        };
        self.position += 1;
        self.state = Some(v);
        Ok(v)
    }

    /// Next coordinate `x_{k+1} = F_{k+1}^{-1}(V_{k+1})`.
    pub fn next_coordinate(&mut self) -> Result<f64> {
        let v = self.next_uniform()?;
        Ok(self.spec.marginal(self.position).quantile_unchecked(v))
    }
}

#[inline]
fn advance(
    pair: &dyn crate::pair_copulas::PairwiseCopula,
    rng: &mut StreamRng,
    prev: f64,
) -> Result<f64> {
    let w = open_unit(rng);
    pair.conditional_quantile(w, prev)
}

pub(crate) fn uniform_path(
    pairs: &[SharedPair],
    k: usize,
    seed: u64,
    index: u64,
) -> Result<Vec<f64>> {
    let mut rng = stream_rng(seed, index);
    let mut out = Vec::with_capacity(k);
    if k == 0 {
        return Ok(out);
    }
    let mut v = open_unit(&mut rng);
    out.push(v);
    for pair in pairs.iter().take(k - 1) {
        v = advance(&**pair, &mut rng, v)?;
        out.push(v);
    }
    Ok(out)
}

/// `n` draws of `(V_1, ..., V_k)` with density `c_k`.
pub fn sample_uniform_chain(
    family: &ChainCopulaFamily,
    k: usize,
    seed: u64,
    n: usize,
) -> Result<SampleBatch> {
    if k == 0 {
        return Err(Error::InvalidArgument(
            "need at least one coordinate".into(),
        ));
    }
    let pairs = family.pairs(k);
    let rows = par_collect(n, |i| uniform_path(&pairs, k, seed, i as u64));
    Ok(SampleBatch::from_rows(
        k,
        rows.into_iter().collect::<Result<Vec<_>>>()?,
    ))
}

/// `n` draws of the first `k` coordinates of the pushforward measure.
pub fn sample_nu(
    family: &ChainCopulaFamily,
    spec: &ProductMeasureSpec,
    k: usize,
    n: usize,
    seed: u64,
) -> Result<SampleBatch> {
    if k == 0 {
        return Err(Error::InvalidArgument(
            "need at least one coordinate".into(),
        ));
    }
    let pairs = family.pairs(k);
    let laws: Vec<MarginalLaw> = spec.marginals(k);
    let rows = par_collect(n, |i| {
        uniform_path(&pairs, k, seed, i as u64).map(|u| {
            u.iter()
                .zip(&laws)
                .map(|(&v, law)| law.quantile_unchecked(v))
                .collect::<Vec<f64>>()
        })
    });
    Ok(SampleBatch::from_rows(
        k,
        rows.into_iter().collect::<Result<Vec<_>>>()?,
    ))
}

/// Lower orthant `(-inf, x_1] x ... x (-inf, x_k]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RectangleQuery {
    pub upper: Vec<f64>,
}

impl RectangleQuery {
    pub fn new(upper: Vec<f64>) -> Result<Self> {
        if upper.is_empty() {
            return Err(Error::InvalidArgument(
                "rectangle needs at least one coordinate".into(),
            ));
        }
        Ok(Self { upper })
    }

    /// `(mu_1(I_1), ..., mu_k(I_k))`, the point at which `C_k` should be
    /// evaluated to predict the rectangle probability.
    pub fn marginal_probabilities(&self, spec: &ProductMeasureSpec) -> Vec<f64> {
        self.upper
            .iter()
            .enumerate()
            .map(|(j, &x)| spec.marginal(j + 1).cdf(x))
            .collect()
    }
}

/// Fraction of the batch inside the query rectangle.
pub fn rectangle_probability(
    batch: &SampleBatch,
    query: &RectangleQuery,
) -> Result<MonteCarloEstimate> {
    if batch.is_empty() {
        return Err(Error::EmptyBatch);
    }
    if query.upper.len() > batch.dim() {
        return Err(Error::InvalidArgument(format!(
            "query has {} coordinates, batch only {}",
            query.upper.len(),
            batch.dim()
        )));
    }
    let hits: Vec<f64> = batch
        .rows()
        .map(|r| {
            if r.iter().zip(&query.upper).all(|(x, b)| x <= b) {
                1.0
            } else {
                0.0
            }
        })
        .collect();
    MonteCarloEstimate::from_values(&hits)
}

/// Joint law of coordinates `t_1 < ... < t_k` (1-based).
pub fn ordered_subset_marginal(
    family: &ChainCopulaFamily,
    spec: &ProductMeasureSpec,
    indices: &[usize],
    n: usize,
    seed: u64,
) -> Result<SampleBatch> {
    if indices.is_empty() || indices[0] == 0 || indices.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::NonIncreasingIndices(indices.to_vec()));
    }
    let max = *indices.last().expect("nonempty");
    let full = sample_nu(family, spec, max, n, seed)?;
    let columns: Vec<usize> = indices.iter().map(|t| t - 1).collect();
    Ok(full.project(&columns))
}

/// Default storage budget for empirical copula grids.
pub const DEFAULT_GRID_BUDGET: usize = 1 << 24;

/// Largest dimension for which full empirical copula grids are built.
pub const MAX_EMPIRICAL_DIM: usize = 3;

/// Empirical copula on the grid `{0, 1/m, ..., 1}^k`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmpiricalCopulaGrid {
    pub m: usize,
    pub k: usize,
    pub sample_count: usize,
    /// Row-major over `(i_1, ..., i_k)`, each index in `0..=m`.
    pub values: Vec<f64>,
}

impl EmpiricalCopulaGrid {
    fn offset(&self, idx: &[usize]) -> usize {
        assert_eq!(idx.len(), self.k);
        idx.iter().fold(0, |acc, &i| {
            assert!(i <= self.m);
            acc * (self.m + 1) + i
        })
    }

    /// Value at `(i_1 / m, ..., i_k / m)`.
    pub fn value(&self, idx: &[usize]) -> f64 {
        self.values[self.offset(idx)]
    }

    /// Value at the grid point nearest below `u`.
    pub fn value_at(&self, u: &[f64]) -> f64 {
        let idx: Vec<usize> = u
            .iter()
            .map(|&x| ((x.clamp(0.0, 1.0) * self.m as f64) + 1e-9).floor() as usize)
            .collect();
        self.value(&idx)
    }

    /// Long-format CSV: `u_1,...,u_k,value`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        let mut header: Vec<String> = (1..=self.k).map(|j| format!("u_{j}")).collect();
        header.push("value".into());
        writeln!(out, "{}", header.join(","))?;
        let side = self.m + 1;
        for (flat, v) in self.values.iter().enumerate() {
            let mut idx = vec![0usize; self.k];
            let mut rest = flat;
            for slot in idx.iter_mut().rev() {
                *slot = rest % side;
                rest /= side;
            }
            let mut cells: Vec<String> = idx
                .iter()
                .map(|&i| format_f64(i as f64 / self.m as f64))
                .collect();
            cells.push(format_f64(*v));
            writeln!(out, "{}", cells.join(","))?;
        }
        Ok(())
    }
}

/// Empirical copula of a batch via ranks: a sample counts at grid point `g`
/// when `rank_j / (n + 1) <= g_j` for every coordinate `j`.
pub fn empirical_copula(batch: &SampleBatch, m: usize) -> Result<EmpiricalCopulaGrid> {
    empirical_copula_with_budget(batch, m, DEFAULT_GRID_BUDGET)
}

pub fn empirical_copula_with_budget(
    batch: &SampleBatch,
    m: usize,
    budget: usize,
) -> Result<EmpiricalCopulaGrid> {
    let n = batch.len();
    let k = batch.dim();
    if n == 0 {
        return Err(Error::EmptyBatch);
    }
    if m == 0 || n < m {
        return Err(Error::InvalidArgument(format!(
            "grid resolution {m} needs 1 <= m <= n = {n}"
        )));
    }
    if k > MAX_EMPIRICAL_DIM {
        return Err(Error::DimensionTooLarge {
            requested: k,
            max: MAX_EMPIRICAL_DIM,
        });
    }
    let side = m + 1;
    let cells = (0..k).try_fold(1usize, |acc, _| acc.checked_mul(side));
    let cells = match cells {
        Some(c) if c <= budget => c,
        _ => {
            return Err(Error::GridTooLarge {
                cells: cells.unwrap_or(usize::MAX),
                budget,
            })
        }
    };

    // Smallest grid index i with rank / (n + 1) <= i / m, in exact integers.
    let mut cell_of = vec![0usize; n * k];
    for j in 0..k {
        let col: Vec<f64> = batch.column(j).collect();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| col[a].total_cmp(&col[b]));
        for (r0, &i) in order.iter().enumerate() {
            let rank = r0 + 1;
            cell_of[i * k + j] = (rank * m).div_ceil(n + 1);
        }
    }
    let mut counts = vec![0u64; cells];
    for i in 0..n {
        let flat = cell_of[i * k..(i + 1) * k]
            .iter()
            .fold(0, |acc, &c| acc * side + c);
        counts[flat] += 1;
    }
    // Prefix sums along each axis turn cell counts into orthant counts.
    let mut stride = 1;
    for _ in 0..k {
        for flat in 0..cells {
            if (flat / stride) % side != 0 {
                counts[flat] += counts[flat - stride];
            }
        }
        stride *= side;
    }
    let values = counts.into_iter().map(|c| c as f64 / n as f64).collect();
    Ok(EmpiricalCopulaGrid {
        m,
        k,
        sample_count: n,
        values,
    })
}

/// Sample Pearson correlation.
pub fn pearson(x: &[f64], y: &[f64]) -> f64 {
    assert_eq!(x.len(), y.len());
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    sxy / (sxx * syy).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::{chain_cdf, CdfMethod, CorrelationRule};
    use crate::numerics::normal_quantile_raw;
    use crate::product_measures::VarianceRule;

    fn ks_uniform(mut v: Vec<f64>) -> f64 {
        v.sort_by(|a, b| a.total_cmp(b));
        let n = v.len() as f64;
        v.iter()
            .enumerate()
            .map(|(i, &x)| (x - i as f64 / n).max((i as f64 + 1.0) / n - x))
            .fold(0.0, f64::max)
    }

    fn gaussian(values: &[f64]) -> ChainCopulaFamily {
        ChainCopulaFamily::gaussian(CorrelationRule::explicit(values.to_vec()).unwrap()).unwrap()
    }

    #[test]
    fn independence_chain_is_iid() {
        let n = 40_000;
        let b = sample_uniform_chain(&ChainCopulaFamily::independence(), 3, 9, n).unwrap();
        let c0: Vec<f64> = b.column(0).collect();
        let c2: Vec<f64> = b.column(2).collect();
        assert!(pearson(&c0, &c2).abs() <= 4.0 / (n as f64).sqrt());
        assert!(b.rows().all(|r| r.iter().all(|&v| v > 0.0 && v < 1.0)));
    }

    #[test]
    fn gaussian_chain_margins_are_uniform() {
        let fam = ChainCopulaFamily::gaussian(CorrelationRule::power(0.5, 1.0).unwrap()).unwrap();
        let n = 100_000;
        let b = sample_uniform_chain(&fam, 20, 21, n).unwrap();
        // per-column level 0.001, so the family of columns stays near 1%
        let crit = 1.95 / (n as f64).sqrt();
        for j in 0..20 {
            let d = ks_uniform(b.column(j).collect());
            assert!(d <= crit, "coordinate {j}: {d}");
        }
    }

    #[test]
    fn replay_and_prefix_stability() {
        let fam = gaussian(&[0.7, -0.4, 0.2, 0.9]);
        let spec = ProductMeasureSpec::standard_normal();
        let a = sample_nu(&fam, &spec, 5, 200, 4).unwrap();
        let b = sample_nu(&fam, &spec, 5, 200, 4).unwrap();
        assert_eq!(a, b);
        let longer = sample_nu(&fam, &spec, 10, 200, 4).unwrap();
        assert_eq!(longer.project(&[0, 1, 2, 3, 4]), a);
    }

    #[test]
    fn stream_matches_batch() {
        let fam = gaussian(&[0.5, 0.5]);
        let spec = ProductMeasureSpec::standard_normal();
        let batch = sample_nu(&fam, &spec, 6, 4, 77).unwrap();
        for i in 0..4 {
            let mut s = CoordinateStream::new(&fam, &spec, 77, i as u64);
            let row: Vec<f64> = (0..6).map(|_| s.next_coordinate().unwrap()).collect();
            assert_eq!(row.as_slice(), batch.row(i));
            assert_eq!(s.position(), 6);
        }
    }

    #[test]
    fn marginal_variances() {
        let fam = ChainCopulaFamily::gaussian(CorrelationRule::power(0.5, 1.0).unwrap()).unwrap();
        let spec = ProductMeasureSpec::centred_normal(VarianceRule::Power {
            scale: 1.0,
            exponent: 2.0,
        })
        .unwrap();
        let b = sample_nu(&fam, &spec, 4, 50_000, 8).unwrap();
        for j in 0..4 {
            let sq: Vec<f64> = b.column(j).map(|x| x * x).collect();
            let e = MonteCarloEstimate::from_values(&sq).unwrap();
            let target = 1.0 / ((j + 1) * (j + 1)) as f64;
            assert!(e.within(target, 4.0), "{j}: {e:?}");
        }
    }

    #[test]
    fn rectangle_examples() {
        let spec = ProductMeasureSpec::standard_normal();
        let n = 100_000;
        let ind = sample_nu(&ChainCopulaFamily::independence(), &spec, 2, n, 1).unwrap();
        let e = rectangle_probability(&ind, &RectangleQuery::new(vec![0.0]).unwrap()).unwrap();
        assert!(e.within(0.5, 4.0));
        let q = RectangleQuery::new(vec![0.3, -0.5]).unwrap();
        let target: f64 = q.marginal_probabilities(&spec).iter().product();
        assert!(rectangle_probability(&ind, &q).unwrap().within(target, 4.0));

        let g = sample_nu(&gaussian(&[0.5]), &spec, 2, n, 2).unwrap();
        let e = rectangle_probability(&g, &RectangleQuery::new(vec![0.0, 0.0]).unwrap()).unwrap();
        assert!(e.within(1.0 / 3.0, 4.0), "{e:?}");

        let empty = SampleBatch::new(2, vec![]).unwrap();
        assert_eq!(
            rectangle_probability(&empty, &RectangleQuery::new(vec![0.0]).unwrap()),
            Err(Error::EmptyBatch)
        );
    }

    #[test]
    fn rectangles_match_chain_cdf() {
        let fam = gaussian(&[0.6, -0.3, 0.4]);
        let spec = ProductMeasureSpec::iid(MarginalLaw::Exponential { rate: 1.0 });
        let batch = sample_nu(&fam, &spec, 4, 60_000, 13).unwrap();
        for corner in [[0.5, 1.0, 0.7, 2.0], [0.2, 0.3, 1.5, 0.9]] {
            let q = RectangleQuery::new(corner.to_vec()).unwrap();
            let u = q.marginal_probabilities(&spec);
            let c = chain_cdf(&fam, &u, CdfMethod::default()).unwrap().value;
            let e = rectangle_probability(&batch, &q).unwrap();
            assert!(e.within(c, 4.0), "{corner:?}: {e:?} vs {c}");
        }
    }

    #[test]
    fn subset_marginals() {
        let fam = gaussian(&[0.8, 0.5]);
        let spec = ProductMeasureSpec::standard_normal();
        let n = 50_000;
        let full = sample_nu(&fam, &spec, 3, n, 6).unwrap();
        let same = ordered_subset_marginal(&fam, &spec, &[1, 2, 3], n, 6).unwrap();
        assert_eq!(full, same);

        let sub = ordered_subset_marginal(&fam, &spec, &[1, 3], n, 6).unwrap();
        let x: Vec<f64> = sub.column(0).collect();
        let y: Vec<f64> = sub.column(1).collect();
        let r = pearson(&x, &y);
        // SE of a sample correlation is about (1 - r^2) / sqrt(n)
        let target = 0.8 * 0.5;
        assert!((r - target).abs() <= 4.0 * (1.0 - target * target) / (n as f64).sqrt());

        let ind = ordered_subset_marginal(&ChainCopulaFamily::independence(), &spec, &[2, 5], n, 6)
            .unwrap();
        let x: Vec<f64> = ind.column(0).collect();
        let y: Vec<f64> = ind.column(1).collect();
        assert!(pearson(&x, &y).abs() <= 4.0 / (n as f64).sqrt());

        assert!(ordered_subset_marginal(&fam, &spec, &[3, 1], 10, 0).is_err());
        assert!(ordered_subset_marginal(&fam, &spec, &[2, 2], 10, 0).is_err());
        assert!(ordered_subset_marginal(&fam, &spec, &[0, 2], 10, 0).is_err());
    }

    #[test]
    fn empirical_copula_of_comonotone_data() {
        let n = 1000;
        let data: Vec<f64> = (0..n).flat_map(|i| [i as f64, i as f64]).collect();
        let b = SampleBatch::new(2, data).unwrap();
        let g = empirical_copula(&b, 10).unwrap();
        for i in 0..=10 {
            for j in 0..=10 {
                let expected = (i.min(j)) as f64 / 10.0;
                assert!((g.value(&[i, j]) - expected).abs() <= 2.0 / n as f64);
            }
        }
    }

    #[test]
    fn empirical_copula_axioms_and_independence() {
        let n = 20_000;
        let b = sample_uniform_chain(&ChainCopulaFamily::independence(), 2, 3, n).unwrap();
        let g = empirical_copula(&b, 20).unwrap();
        let band = 1.36 / (n as f64).sqrt() * 2.0;
        for i in 0..=20 {
            assert_eq!(g.value(&[0, i]), 0.0);
            assert_eq!(g.value(&[i, 0]), 0.0);
            for j in 0..=20 {
                let uv = (i * j) as f64 / 400.0;
                assert!((g.value(&[i, j]) - uv).abs() <= band);
                if i > 0 && j > 0 {
                    let vol = g.value(&[i, j]) - g.value(&[i - 1, j]) - g.value(&[i, j - 1])
                        + g.value(&[i - 1, j - 1]);
                    assert!(vol >= -1e-12);
                }
            }
            // uniform margins up to rank discretisation
            assert!((g.value(&[i, 20]) - i as f64 / 20.0).abs() <= 1.0 / n as f64 + 1e-12);
        }
        assert_eq!(g.value(&[20, 20]), 1.0);
    }

    #[test]
    fn empirical_copula_of_gaussian_chain() {
        let n = 100_000;
        let b = sample_uniform_chain(&gaussian(&[0.5]), 2, 10, n).unwrap();
        let g = empirical_copula(&b, 10).unwrap();
        assert!((g.value_at(&[0.5, 0.5]) - 1.0 / 3.0).abs() <= 4.0 / (n as f64).sqrt());
    }

    #[test]
    fn empirical_copula_errors() {
        let b = SampleBatch::new(4, vec![0.5; 40]).unwrap();
        assert!(matches!(
            empirical_copula(&b, 5),
            Err(Error::DimensionTooLarge { .. })
        ));
        let b = SampleBatch::new(2, vec![0.5; 20]).unwrap();
        assert!(empirical_copula(&b, 11).is_err());
        let b = SampleBatch::new(3, vec![0.5; 3 * 100]).unwrap();
        assert!(matches!(
            empirical_copula_with_budget(&b, 50, 1000),
            Err(Error::GridTooLarge { .. })
        ));
    }

    #[test]
    fn csv_roundtrip_is_lossless() {
        let fam = gaussian(&[0.3]);
        let b = sample_nu(&fam, &ProductMeasureSpec::standard_normal(), 3, 50, 1).unwrap();
        let mut buf = Vec::new();
        b.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("coord_1,coord_2,coord_3\n"));
        let back = SampleBatch::read_csv(&buf[..]).unwrap();
        assert_eq!(back, b);
        let _ = normal_quantile_raw(0.5);
    }
}
