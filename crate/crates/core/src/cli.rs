//! Command-line front end: JSON experiment configs, command dispatch and
//! report emission.
//!
//! Exit codes: 0 success, 1 a failed `family-check`, 2 a configuration,
//! parse or input error, 3 a request the covariance family does not
//! support (sampling and chain-only diagnostics), 4 an empirical copula in
//! more than three dimensions.
//!
//! Diagnostic reports are JSON unless `--out` ends in `.csv`, in which case
//! a per-k table is written instead:
//!
//! | `--which`    | columns                                      |
//! |--------------|----------------------------------------------|
//! | `hellinger`  | `k,term,partial_sum`                         |
//! | `l2`         | `k,term,partial_sum`                         |
//! | `martingale` | `k,mean,standard_error`                      |
//! | `ui`         | `k,r,estimate,standard_error`                |
//! | `moments`    | `truncation,estimate,standard_error,analytic`|

use std::ffi::OsString;
use std::fmt;
use std::fs;
use std::io::{self, BufReader, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::diagnostics::{
    hellinger_series, l2_concentration_check, martingale_run, second_moment_preservation,
    uniform_integrability_probe,
};
use crate::error::Error;
use crate::families::{
    check_consistency_with_order, check_uniform_margins_with_order, ChainCopulaFamily, CheckReport,
    CopulaFamily, CorrelationRule, CovarianceRule, GaussianCovarianceFamily, MAX_QUADRATURE_DIM,
};
use crate::numerics::SeriesVerdict;
use crate::pair_copulas::MAX_ABS_CORRELATION;
use crate::product_measures::{MarginalLaw, MarginalTail, ProductMeasureSpec, VarianceRule};
use crate::sampler::{empirical_copula, format_f64, sample_nu, SampleBatch, MAX_EMPIRICAL_DIM};

/// Largest dimension used by `family-check`; consistency is checked from
/// `k` to `k + 1`, which must stay within the quadrature limit.
pub const MAX_CHECK_DIM: usize = MAX_QUADRATURE_DIM - 1;

fn default_marginals() -> MarginalsConfig {
    MarginalsConfig::Normal {
        mean: 0.0,
        variance: VarianceRule::Constant { value: 1.0 },
    }
}
fn default_truncation() -> usize {
    10
}
fn default_samples() -> usize {
    10_000
}
fn default_order() -> usize {
    64
}
fn default_tolerance() -> f64 {
    1e-6
}
fn default_probe_points() -> usize {
    32
}
fn default_unit_variance() -> VarianceRule {
    VarianceRule::Constant { value: 1.0 }
}

/// One experiment, read from a single JSON document. Unknown keys are
/// rejected.
#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub family: FamilyConfig,
    #[serde(default = "default_marginals")]
    pub marginals: MarginalsConfig,
    /// Number of coordinates `K`.
    #[serde(default = "default_truncation")]
    pub truncation: usize,
    /// Monte Carlo sample count `n`.
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_order")]
    pub quadrature_order: usize,
    #[serde(default)]
    pub output: Option<PathBuf>,
    /// Residual tolerance for `family-check`.
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    #[serde(default = "default_probe_points")]
    pub probe_points: usize,
    #[serde(default)]
    pub ui: Option<UiConfig>,
    /// Grid size for `empirical-copula`.
    #[serde(default)]
    pub grid: Option<usize>,
    /// Sample CSV for `empirical-copula`.
    #[serde(default)]
    pub input: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum FamilyConfig {
    ChainIndependence {},
    ChainGaussian { correlation: CorrelationRule },
    GaussianCovariance { covariance: CovarianceRule },
}

/// Marginal law of every coordinate; normal variances may depend on `k`.
#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum MarginalsConfig {
    Normal {
        #[serde(default)]
        mean: f64,
        #[serde(default = "default_unit_variance")]
        variance: VarianceRule,
    },
    Uniform {
        low: f64,
        high: f64,
    },
    Exponential {
        rate: f64,
    },
    Logistic {
        location: f64,
        scale: f64,
    },
}

/// Grid of the uniform-integrability probe.
#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct UiConfig {
    pub r_values: Vec<f64>,
    pub k_values: Vec<usize>,
}

/// Error surfaced by the CLI, carrying its exit code.
#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    Config(String),
    Unsupported(String),
    DimensionTooLarge(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Unsupported(_) => 3,
            CliError::DimensionTooLarge(_) => 4,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) | CliError::Unsupported(m) | CliError::DimensionTooLarge(m) => {
                f.write_str(m)
            }
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::DimensionTooLarge { .. } => CliError::DimensionTooLarge(e.to_string()),
            other => CliError::Config(other.to_string()),
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn field_error(field: &str, msg: impl fmt::Display) -> CliError {
    CliError::Config(format!("{field}: {msg}"))
}

fn check_correlation_rule(rule: &CorrelationRule) -> CliResult<()> {
    let bound = MAX_ABS_CORRELATION;
    let in_range = |v: f64| v.is_finite() && v.abs() <= bound;
    match *rule {
        CorrelationRule::Explicit { ref values } => {
            for (i, &v) in values.iter().enumerate() {
                if !in_range(v) {
                    return Err(field_error(
                        &format!("family.correlation.values[{i}]"),
                        format!("{v} is outside [-{bound}, {bound}]"),
                    ));
                }
            }
        }
        CorrelationRule::Power { a, p } => {
            if !in_range(a) {
                return Err(field_error(
                    "family.correlation.a",
                    format!("{a} is outside [-{bound}, {bound}]"),
                ));
            }
            if !(p.is_finite() && p >= 0.0) {
                return Err(field_error(
                    "family.correlation.p",
                    format!("{p} must be finite and >= 0"),
                ));
            }
        }
        CorrelationRule::Geometric { a, q } => {
            if !(q.is_finite() && q > 0.0 && q < 1.0) {
                return Err(field_error(
                    "family.correlation.q",
                    format!("{q} must lie in (0, 1)"),
                ));
            }
            if !(a.is_finite() && (a * q).abs() <= bound) {
                return Err(field_error(
                    "family.correlation.a",
                    format!("first correlation {a} * {q} is outside [-{bound}, {bound}]"),
                ));
            }
        }
    }
    rule.validate()
        .map_err(|e| field_error("family.correlation", e))
}

fn check_variance_rule(rule: &VarianceRule) -> CliResult<()> {
    let positive = |field: &str, v: f64| {
        if v.is_finite() && v > 0.0 {
            Ok(())
        } else {
            Err(field_error(
                &format!("marginals.variance.{field}"),
                format!("{v} must be finite and > 0"),
            ))
        }
    };
    match *rule {
        VarianceRule::Constant { value } => positive("value", value),
        VarianceRule::Power { scale, exponent } => {
            positive("scale", scale)?;
            if exponent.is_finite() {
                Ok(())
            } else {
                Err(field_error("marginals.variance.exponent", "must be finite"))
            }
        }
        VarianceRule::Geometric { scale, ratio } => {
            positive("scale", scale)?;
            positive("ratio", ratio)
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> CliResult<Self> {
        let config: ExperimentConfig =
            serde_json::from_str(text).map_err(|e| CliError::Config(format!("config: {e}")))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Range checks, reported with the path of the offending field.
    pub fn validate(&self) -> CliResult<()> {
        match &self.family {
            FamilyConfig::ChainIndependence {} => {}
            FamilyConfig::ChainGaussian { correlation } => check_correlation_rule(correlation)?,
            FamilyConfig::GaussianCovariance { covariance } => {
                GaussianCovarianceFamily::new(covariance.clone())
                    .map_err(|e| field_error("family.covariance", e))?;
            }
        }
        match self.marginals {
            MarginalsConfig::Normal { mean, ref variance } => {
                if !mean.is_finite() {
                    return Err(field_error("marginals.mean", "must be finite"));
                }
                check_variance_rule(variance)?;
            }
            MarginalsConfig::Uniform { low, high } => {
                if !(low.is_finite() && high.is_finite() && low < high) {
                    return Err(field_error(
                        "marginals.high",
                        format!("need finite low < high, got [{low}, {high}]"),
                    ));
                }
            }
            MarginalsConfig::Exponential { rate } => {
                if !(rate.is_finite() && rate > 0.0) {
                    return Err(field_error(
                        "marginals.rate",
                        format!("{rate} must be finite and > 0"),
                    ));
                }
            }
            MarginalsConfig::Logistic { location, scale } => {
                if !location.is_finite() {
                    return Err(field_error("marginals.location", "must be finite"));
                }
                if !(scale.is_finite() && scale > 0.0) {
                    return Err(field_error(
                        "marginals.scale",
                        format!("{scale} must be finite and > 0"),
                    ));
                }
            }
        }
        if self.truncation < 1 {
            return Err(field_error("truncation", "must be at least 1"));
        }
        if self.samples < 2 {
            return Err(field_error("samples", "must be at least 2"));
        }
        if self.quadrature_order < 2 {
            return Err(field_error("quadrature_order", "must be at least 2"));
        }
        if !(self.tolerance.is_finite() && self.tolerance > 0.0) {
            return Err(field_error("tolerance", "must be finite and > 0"));
        }
        if self.probe_points < 1 {
            return Err(field_error("probe_points", "must be at least 1"));
        }
        if let Some(ui) = &self.ui {
            if let Some(r) = ui.r_values.iter().find(|r| !(r.is_finite() && **r > 0.0)) {
                return Err(field_error(
                    "ui.r_values",
                    format!("{r} must be finite and > 0"),
                ));
            }
            if let Some(k) = ui.k_values.iter().find(|k| **k < 2) {
                return Err(field_error(
                    "ui.k_values",
                    format!("{k} must be at least 2"),
                ));
            }
        }
        if self.grid == Some(0) {
            return Err(field_error("grid", "must be at least 1"));
        }
        Ok(())
    }

    pub fn family(&self) -> CliResult<CopulaFamily> {
        Ok(match &self.family {
            FamilyConfig::ChainIndependence {} => {
                CopulaFamily::Chain(ChainCopulaFamily::independence())
            }
            FamilyConfig::ChainGaussian { correlation } => CopulaFamily::Chain(
                ChainCopulaFamily::gaussian(correlation.clone())
                    .map_err(|e| field_error("family.correlation", e))?,
            ),
            FamilyConfig::GaussianCovariance { covariance } => CopulaFamily::GaussianCovariance(
                GaussianCovarianceFamily::new(covariance.clone())
                    .map_err(|e| field_error("family.covariance", e))?,
            ),
        })
    }

    pub fn spec(&self) -> CliResult<ProductMeasureSpec> {
        let tail = match self.marginals {
            MarginalsConfig::Normal { mean, variance } => MarginalTail::Normal { mean, variance },
            MarginalsConfig::Uniform { low, high } => {
                MarginalTail::Repeat(MarginalLaw::Uniform { low, high })
            }
            MarginalsConfig::Exponential { rate } => {
                MarginalTail::Repeat(MarginalLaw::Exponential { rate })
            }
            MarginalsConfig::Logistic { location, scale } => {
                MarginalTail::Repeat(MarginalLaw::Logistic { location, scale })
            }
        };
        Ok(ProductMeasureSpec::new(Vec::new(), tail)
            .map_err(|e| field_error("marginals", e))?
            .with_truncation(self.truncation))
    }

    fn chain_family(&self, what: &str) -> CliResult<ChainCopulaFamily> {
        match self.family()? {
            CopulaFamily::Chain(f) => Ok(f),
            CopulaFamily::GaussianCovariance(_) => Err(CliError::Unsupported(format!(
                "{what} requires a chain family; gaussian_covariance is not supported"
            ))),
        }
    }

    fn describe_family(&self) -> String {
        match self.family() {
            Ok(CopulaFamily::Chain(f)) => f.describe(),
            Ok(CopulaFamily::GaussianCovariance(f)) => {
                format!("gaussian_covariance({:?})", f.rule())
            }
            Err(_) => String::new(),
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "hcopula",
    version,
    about = "Consistent copula families on sequence space"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// Experiment config (JSON)
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output file; stdout when absent
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
enum Which {
    Hellinger,
    Ui,
    L2,
    Martingale,
    Moments,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check consistency and uniform margins by quadrature
    FamilyCheck(Common),
    /// Sample the first K coordinates of the pushforward measure
    Sample(Common),
    /// Run one diagnostic
    Diagnose {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        which: Which,
    },
    /// Empirical copula of a sample CSV on an m-point grid per axis
    EmpiricalCopula {
        #[command(flatten)]
        common: Common,
        /// Grid size m (default: config `grid`, else 10)
        #[arg(long)]
        grid: Option<usize>,
        /// Sample CSV (default: config `input`)
        #[arg(long)]
        input: Option<PathBuf>,
    },
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    if let Err(e) = configure_threads() {
        eprintln!("error: {e}");
        return e.exit_code();
    }
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn configure_threads() -> CliResult<()> {
    let Ok(value) = std::env::var("HCOPULA_THREADS") else {
        return Ok(());
    };
    let n: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| {
            CliError::Config(format!(
                "HCOPULA_THREADS: expected a positive integer, got {value:?}"
            ))
        })?;
    // A second call in the same process keeps the first pool.
    let _ = rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global();
    Ok(())
}

fn require_config(common: &Common) -> CliResult<ExperimentConfig> {
    match &common.config {
        Some(path) => ExperimentConfig::load(path),
        None => Err(CliError::Config("--config is required".into())),
    }
}

fn output_path(common: &Common, config: Option<&ExperimentConfig>) -> Option<PathBuf> {
    common
        .out
        .clone()
        .or_else(|| config.and_then(|c| c.output.clone()))
}

fn emit(path: Option<&Path>, bytes: &[u8]) -> CliResult<()> {
    let result = match path {
        Some(p) => fs::write(p, bytes),
        None => io::stdout().lock().write_all(bytes),
    };
    result.map_err(|e| CliError::Config(format!("cannot write output: {e}")))
}

fn to_json<T: Serialize>(value: &T) -> Vec<u8> {
    let mut s = serde_json::to_string_pretty(value).expect("reports serialise");
    s.push('\n');
    s.into_bytes()
}

fn dispatch(command: Command) -> CliResult<i32> {
    match command {
        Command::FamilyCheck(common) => {
            let config = require_config(&common)?;
            let report = family_check(&config)?;
            emit(
                output_path(&common, Some(&config)).as_deref(),
                &to_json(&report),
            )?;
            Ok(if report.passed { 0 } else { 1 })
        }
        Command::Sample(common) => {
            let config = require_config(&common)?;
            let bytes = sample(&config)?;
            emit(output_path(&common, Some(&config)).as_deref(), &bytes)?;
            Ok(0)
        }
        Command::Diagnose { common, which } => {
            let config = require_config(&common)?;
            let out = output_path(&common, Some(&config));
            let csv = out
                .as_deref()
                .and_then(Path::extension)
                .is_some_and(|e| e.eq_ignore_ascii_case("csv"));
            let bytes = diagnose(&config, which, csv)?;
            emit(out.as_deref(), &bytes)?;
            Ok(0)
        }
        Command::EmpiricalCopula {
            common,
            grid,
            input,
        } => {
            let config = match &common.config {
                Some(p) => Some(ExperimentConfig::load(p)?),
                None => None,
            };
            let input = input
                .or_else(|| config.as_ref().and_then(|c| c.input.clone()))
                .ok_or_else(|| {
                    CliError::Config("empirical-copula needs --input or config `input`".into())
                })?;
            let m = grid
                .or_else(|| config.as_ref().and_then(|c| c.grid))
                .unwrap_or(10);
            let bytes = empirical(&input, m)?;
            emit(output_path(&common, config.as_ref()).as_deref(), &bytes)?;
            Ok(0)
        }
    }
}

/// JSON body of `family-check`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FamilyCheckReport {
    pub family: String,
    pub k: usize,
    pub tolerance: f64,
    pub checks: Vec<CheckReport>,
    pub passed: bool,
}

/// Margins of `C_k` and consistency `C_m -> C_{m+1}` for `m <= k`, with
/// `k = min(truncation, 4)`.
pub fn family_check(config: &ExperimentConfig) -> CliResult<FamilyCheckReport> {
    let k = config.truncation.min(MAX_CHECK_DIM);
    let tol = config.tolerance;
    let mut checks = Vec::new();
    match config.family()? {
        CopulaFamily::Chain(family) => {
            for j in 1..=k {
                checks.push(check_uniform_margins_with_order(
                    &family,
                    k,
                    j,
                    tol,
                    config.quadrature_order,
                )?);
            }
            for m in 1..=k {
                checks.push(check_consistency_with_order(
                    &family,
                    m,
                    tol,
                    config.probe_points,
                    config.quadrature_order,
                )?);
            }
        }
        CopulaFamily::GaussianCovariance(family) => {
            // Margins and projections are exact here: the correlation
            // factor has unit rows, and the factor of the leading block is
            // the leading block of the factor.
            let factors = (1..=k + 1)
                .map(|m| family.correlation_cholesky(m))
                .collect::<crate::error::Result<Vec<_>>>()?;
            let lk = &factors[k - 1];
            for j in 0..k {
                let norm: f64 = (0..=j).map(|m| lk[j * k + m] * lk[j * k + m]).sum();
                let dev = (norm - 1.0).abs();
                checks.push(CheckReport {
                    check: "uniform_margin".into(),
                    k,
                    j: Some(j + 1),
                    probe_points: 1,
                    max_deviation: dev,
                    tolerance: tol,
                    passed: dev <= tol,
                });
            }
            for m in 1..=k {
                let (a, b) = (&factors[m - 1], &factors[m]);
                let mut dev: f64 = 0.0;
                for i in 0..m {
                    for j in 0..=i {
                        dev = dev.max((a[i * m + j] - b[i * (m + 1) + j]).abs());
                    }
                }
                checks.push(CheckReport {
                    check: "consistency".into(),
                    k: m,
                    j: None,
                    probe_points: m * (m + 1) / 2,
                    max_deviation: dev,
                    tolerance: tol,
                    passed: dev <= tol,
                });
            }
        }
    }
    let passed = checks.iter().all(|c| c.passed);
    Ok(FamilyCheckReport {
        family: config.describe_family(),
        k,
        tolerance: tol,
        checks,
        passed,
    })
}

/// CSV bytes of `samples` draws of the first `truncation` coordinates.
pub fn sample(config: &ExperimentConfig) -> CliResult<Vec<u8>> {
    let family = config.chain_family("sampling")?;
    let spec = config.spec()?;
    let batch = sample_nu(
        &family,
        &spec,
        config.truncation,
        config.samples,
        config.seed,
    )?;
    let mut out = Vec::new();
    batch.write_csv(&mut out).expect("writing to memory");
    Ok(out)
}

#[derive(Serialize)]
struct DiagnoseReport<T: Serialize> {
    diagnostic: Which,
    family: String,
    truncation: usize,
    samples: usize,
    seed: u64,
    result: T,
}

fn report_json<T: Serialize>(config: &ExperimentConfig, which: Which, result: T) -> Vec<u8> {
    to_json(&DiagnoseReport {
        diagnostic: which,
        family: config.describe_family(),
        truncation: config.truncation,
        samples: config.samples,
        seed: config.seed,
        result,
    })
}

fn series_csv(series: &SeriesVerdict) -> Vec<u8> {
    let mut s = String::from("k,term,partial_sum\n");
    for (i, (t, p)) in series.terms.iter().zip(&series.partial_sums).enumerate() {
        s.push_str(&format!(
            "{},{},{}\n",
            i + 1,
            format_f64(*t),
            format_f64(*p)
        ));
    }
    s.into_bytes()
}

fn diagnose(config: &ExperimentConfig, which: Which, csv: bool) -> CliResult<Vec<u8>> {
    let big_k = config.truncation;
    let (n, seed) = (config.samples, config.seed);
    Ok(match which {
        Which::Hellinger => {
            let family = config.chain_family("hellinger")?;
            let series = hellinger_series(&family, big_k, config.quadrature_order)?;
            if csv {
                series_csv(&series)
            } else {
                report_json(config, which, series)
            }
        }
        Which::L2 => {
            let report = l2_concentration_check(&config.spec()?, &config.family()?, big_k);
            if csv {
                series_csv(&report.series)
            } else {
                report_json(config, which, report)
            }
        }
        Which::Ui => {
            let family = config.chain_family("ui")?;
            let (r_values, k_values) = match &config.ui {
                Some(ui) => (ui.r_values.clone(), ui.k_values.clone()),
                None => {
                    if big_k < 2 {
                        return Err(field_error("truncation", "ui needs at least 2 coordinates"));
                    }
                    let mut ks = vec![2, (big_k / 2).max(2), big_k];
                    ks.dedup();
                    (vec![2.0, 5.0, 10.0, 20.0], ks)
                }
            };
            let probe = uniform_integrability_probe(&family, &r_values, &k_values, n, seed)?;
            if csv {
                let mut s = String::from("k,r,estimate,standard_error\n");
                for c in &probe.cells {
                    s.push_str(&format!(
                        "{},{},{},{}\n",
                        c.k,
                        format_f64(c.r),
                        format_f64(c.estimate.mean),
                        format_f64(c.estimate.standard_error)
                    ));
                }
                s.into_bytes()
            } else {
                report_json(config, which, probe)
            }
        }
        Which::Martingale => {
            let family = config.chain_family("martingale")?;
            let summary = martingale_run(&config.spec()?, &family, big_k, n, seed)?;
            if csv {
                let mut s = String::from("k,mean,standard_error\n");
                for (i, e) in summary.means.iter().enumerate() {
                    s.push_str(&format!(
                        "{},{},{}\n",
                        i + 1,
                        format_f64(e.mean),
                        format_f64(e.standard_error)
                    ));
                }
                s.into_bytes()
            } else {
                report_json(config, which, summary)
            }
        }
        Which::Moments => {
            let family = config.chain_family("moments")?;
            let report = second_moment_preservation(&config.spec()?, &family, big_k, n, seed)?;
            if csv {
                format!(
                    "truncation,estimate,standard_error,analytic\n{},{},{},{}\n",
                    report.truncation,
                    format_f64(report.estimate.mean),
                    format_f64(report.estimate.standard_error),
                    format_f64(report.analytic)
                )
                .into_bytes()
            } else {
                report_json(config, which, report)
            }
        }
    })
}

/// Grid CSV of the empirical copula of the sample in `input`.
pub fn empirical(input: &Path, m: usize) -> CliResult<Vec<u8>> {
    let file = fs::File::open(input)
        .map_err(|e| CliError::Config(format!("cannot open {}: {e}", input.display())))?;
    let batch = SampleBatch::read_csv(BufReader::new(file))
        .map_err(|e| CliError::Config(format!("{}: {e}", input.display())))?;
    if batch.dim() > MAX_EMPIRICAL_DIM {
        return Err(CliError::DimensionTooLarge(format!(
            "empirical copula supports at most {MAX_EMPIRICAL_DIM} coordinates, input has {}",
            batch.dim()
        )));
    }
    let grid = empirical_copula(&batch, m)?;
    let mut out = Vec::new();
    grid.write_csv(&mut out).expect("writing to memory");
    Ok(out)
}
