//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
//! criterion fails.

use std::f64::consts::PI;
use std::fs;
use std::process::Command;
use std::time::Instant;

use hcopula::diagnostics::{
    hellinger_affinity, hellinger_series, l2_concentration_check, martingale_run, L2Verdict,
};
use hcopula::families::{chain_cdf, check_consistency, check_uniform_margins, CdfMethod};
use hcopula::numerics::{std_normal_pdf, Convergence, DEFAULT_ORDER};
use hcopula::{
    empirical_copula, rectangle_probability, sample_nu, second_moment_preservation,
    ChainCopulaFamily, CopulaFamily, CorrelationRule, GaussianCovarianceFamily, GaussianPair,
    ProductMeasureSpec, RectangleQuery, VarianceRule,
};

type Outcome = Result<String, String>;

fn gaussian(rule: CorrelationRule) -> ChainCopulaFamily {
    ChainCopulaFamily::gaussian(rule).unwrap()
}

fn inverse_square_spec() -> ProductMeasureSpec {
    ProductMeasureSpec::centred_normal(VarianceRule::Power {
        scale: 1.0,
        exponent: 2.0,
    })
    .unwrap()
}

fn copula_axioms() -> Outcome {
    let families = [
        ("independence", ChainCopulaFamily::independence()),
        (
            "power(0.5,1)",
            gaussian(CorrelationRule::power(0.5, 1.0).unwrap()),
        ),
        (
            "geometric(0.8,0.5)",
            gaussian(CorrelationRule::geometric(0.8, 0.5).unwrap()),
        ),
    ];
    let mut worst: f64 = 0.0;
    for (name, fam) in &families {
        for k in 1..=4 {
            for j in 1..=k {
                let r = check_uniform_margins(fam, k, j, 1e-6).map_err(|e| e.to_string())?;
                worst = worst.max(r.max_deviation);
                if !r.passed {
                    return Err(format!(
                        "{name}: margin k={k} j={j} deviates by {:e}",
                        r.max_deviation
                    ));
                }
            }
            let r = check_consistency(fam, k, 1e-6, 32).map_err(|e| e.to_string())?;
            worst = worst.max(r.max_deviation);
            if !r.passed {
                return Err(format!(
                    "{name}: consistency k={k} deviates by {:e}",
                    r.max_deviation
                ));
            }
        }
    }
    Ok(format!("max residual {worst:.3e} <= 1e-6"))
}

/// Closed form stated for the Gaussian affinity.
fn stated_closed_form(rho: f64) -> f64 {
    let r2 = rho * rho;
    (1.0 - r2).powf(1.25) / (1.0 - r2 / 2.0).powf(1.5)
}

/// Brute-force midpoint rule in normal scores on `[-10, 10]^2`, using the
/// bivariate normal density directly.
fn affinity_oracle(rho: f64) -> f64 {
    let h = 0.02;
    let steps = (20.0 / h) as i64;
    let s = 1.0 - rho * rho;
    let mut total = 0.0;
    for i in 0..steps {
        let x = -10.0 + (i as f64 + 0.5) * h;
        for j in 0..steps {
            let y = -10.0 + (j as f64 + 0.5) * h;
            let joint =
                (-(x * x - 2.0 * rho * x * y + y * y) / (2.0 * s)).exp() / (2.0 * PI * s.sqrt());
            total += (joint * std_normal_pdf(x) * std_normal_pdf(y)).sqrt();
        }
    }
    total * h * h
}

fn gaussian_affinity_closed_form() -> Outcome {
    let mut failures = Vec::new();
    for rho in [0.0, 0.3, -0.3, 0.6, -0.6, 0.9, -0.9] {
        let q = hellinger_affinity(&GaussianPair::new(rho).unwrap(), DEFAULT_ORDER)
            .map_err(|e| e.to_string())?;
        let closed = stated_closed_form(rho);
        if (q - closed).abs() > 1e-8 {
            failures.push(format!(
                "rho={rho}: quadrature {q:.9} vs closed form {closed:.9} (oracle {:.9})",
                affinity_oracle(rho)
            ));
        }
    }
    let at_half = hellinger_affinity(&GaussianPair::new(0.5).unwrap(), DEFAULT_ORDER)
        .map_err(|e| e.to_string())?;
    if (at_half - 0.852733).abs() > 1e-6 {
        failures.push(format!(
            "rho=0.5: quadrature {at_half:.9} vs expected 0.852733 (oracle {:.9})",
            affinity_oracle(0.5)
        ));
    }
    if failures.is_empty() {
        Ok("all rho within 1e-8; rho=0.5 within 1e-6 of 0.852733".into())
    } else {
        Err(failures.join("; "))
    }
}

fn hellinger_dichotomy() -> Outcome {
    let conv = hellinger_series(
        &gaussian(CorrelationRule::power(0.5, 1.0).unwrap()),
        100,
        DEFAULT_ORDER,
    )
    .map_err(|e| e.to_string())?;
    let div = hellinger_series(
        &gaussian(CorrelationRule::power(0.9, 0.25).unwrap()),
        100,
        DEFAULT_ORDER,
    )
    .map_err(|e| e.to_string())?;
    if conv.verdict == Convergence::Converges && div.verdict == Convergence::Diverges {
        Ok("power(0.5,1) converges, power(0.9,0.25) diverges".into())
    } else {
        Err(format!("got {:?} and {:?}", conv.verdict, div.verdict))
    }
}

fn martingale_mean_one() -> Outcome {
    let fam = gaussian(CorrelationRule::power(0.3, 1.0).unwrap());
    let s = martingale_run(
        &ProductMeasureSpec::standard_normal(),
        &fam,
        20,
        100_000,
        20_240_601,
    )
    .map_err(|e| e.to_string())?;
    let worst = s
        .means
        .iter()
        .map(|e| {
            if e.standard_error > 0.0 {
                (e.mean - 1.0).abs() / e.standard_error
            } else {
                0.0
            }
        })
        .fold(0.0, f64::max);
    if s.flagged.is_empty() {
        Ok(format!("max |mean - 1| / SE = {worst:.2} over k <= 20"))
    } else {
        Err(format!("levels {:?} outside 1 +- 4 SE", s.flagged))
    }
}

fn pushforward_correctness() -> Outcome {
    let fam = gaussian(CorrelationRule::explicit(vec![0.5]).unwrap());
    let batch = sample_nu(&fam, &ProductMeasureSpec::standard_normal(), 2, 100_000, 5)
        .map_err(|e| e.to_string())?;
    let est = rectangle_probability(&batch, &RectangleQuery::new(vec![0.0, 0.0]).unwrap())
        .map_err(|e| e.to_string())?;
    let quad = chain_cdf(&fam, &[0.5, 0.5], CdfMethod::default())
        .map_err(|e| e.to_string())?
        .value;
    let band = 4.0 * est.standard_error;
    let msg = format!(
        "MC {:.5} (SE {:.5}), quadrature {quad:.9}, exact {:.9}",
        est.mean,
        est.standard_error,
        1.0 / 3.0
    );
    if (est.mean - 1.0 / 3.0).abs() <= band && (est.mean - quad).abs() <= band {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn converse_sklar_failure() -> Outcome {
    let q_id = CopulaFamily::GaussianCovariance(GaussianCovarianceFamily::identity());
    let r = l2_concentration_check(&ProductMeasureSpec::standard_normal(), &q_id, 100);
    if r.verdict != L2Verdict::NotConcentrated {
        return Err(format!("standard normal: {:?}", r.verdict));
    }
    if let Some((i, s)) = r
        .series
        .partial_sums
        .iter()
        .enumerate()
        .find(|(i, &s)| s != (*i + 1) as f64)
    {
        return Err(format!("S_{} = {s}", i + 1));
    }
    let r = l2_concentration_check(&inverse_square_spec(), &q_id, 100);
    if r.verdict != L2Verdict::Concentrated {
        return Err(format!("normal(0, k^-2): {:?}", r.verdict));
    }
    let limit = r.limit.ok_or("no closed-form limit")?;
    if (limit - PI * PI / 6.0).abs() > 1e-9 {
        return Err(format!("limit {limit:.12} vs pi^2/6"));
    }
    Ok(format!("S_K = K for Q = Id; limit {limit:.10}"))
}

fn second_moment_preserved() -> Outcome {
    let fam = gaussian(CorrelationRule::power(0.5, 1.0).unwrap());
    let r = second_moment_preservation(&inverse_square_spec(), &fam, 200, 100_000, 7)
        .map_err(|e| e.to_string())?;
    let target = 1.639946;
    let msg = format!(
        "estimate {:.6} (SE {:.6}) vs {target}",
        r.estimate.mean, r.estimate.standard_error
    );
    if r.estimate.within(target, 4.0) {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn forward_sklar() -> Outcome {
    let fam = gaussian(CorrelationRule::explicit(vec![0.5]).unwrap());
    let n = 100_000;
    let batch = sample_nu(&fam, &ProductMeasureSpec::standard_normal(), 2, n, 9)
        .map_err(|e| e.to_string())?;
    let grid = empirical_copula(&batch, 10).map_err(|e| e.to_string())?;
    let v = grid.value_at(&[0.5, 0.5]);
    let band = 4.0 / (n as f64).sqrt();
    let msg = format!("C_n(0.5, 0.5) = {v:.5}, band {band:.4}");
    if (v - 1.0 / 3.0).abs() <= band {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn run_sample(config: &std::path::Path, threads: usize) -> Vec<u8> {
    let out = Command::new(env!("CARGO_BIN_EXE_hcopula"))
        .args(["sample", "--config"])
        .arg(config)
        .env("HCOPULA_THREADS", threads.to_string())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    out.stdout
}

fn determinism() -> Outcome {
    // In process, under pools of different sizes.
    let fam = gaussian(CorrelationRule::power(0.5, 1.0).unwrap());
    let spec = inverse_square_spec();
    let render = |threads: usize| -> Vec<u8> {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap();
        pool.install(|| {
            let mut out = Vec::new();
            sample_nu(&fam, &spec, 12, 5_000, 31)
                .unwrap()
                .write_csv(&mut out)
                .unwrap();
            let m = martingale_run(&spec, &fam, 12, 5_000, 31).unwrap();
            out.extend(serde_json::to_vec(&m).unwrap());
            out
        })
    };
    let reference = render(1);
    for threads in [1, 2, 4, 7] {
        if render(threads) != reference {
            return Err(format!("in-process output differs with {threads} threads"));
        }
    }
    // Through the binary.
    let dir = tempfile::TempDir::new().unwrap();
    let config = dir.path().join("c.json");
    fs::write(
        &config,
        r#"{"family": {"type": "chain_gaussian", "correlation": {"kind": "geometric", "a": 0.8, "q": 0.5}},
            "truncation": 10, "samples": 5000, "seed": 99}"#,
    )
    .unwrap();
    let a = run_sample(&config, 1);
    for threads in [1, 3, 8] {
        if run_sample(&config, threads) != a {
            return Err(format!("CLI sample differs with HCOPULA_THREADS={threads}"));
        }
    }
    Ok("byte-identical across runs and 1-8 threads".into())
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 9] = [
        ("copula axioms", copula_axioms),
        (
            "Gaussian affinity closed form",
            gaussian_affinity_closed_form,
        ),
        ("Hellinger dichotomy", hellinger_dichotomy),
        ("martingale mean one", martingale_mean_one),
        ("pushforward correctness", pushforward_correctness),
        ("converse Sklar failure", converse_sklar_failure),
        ("second-moment preservation", second_moment_preserved),
        ("forward Sklar", forward_sklar),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(check).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(msg) => println!("PASS {}: {name}: {msg} [{secs:.1}s]", i + 1),
            Err(msg) => {
                failed += 1;
                println!("FAIL {}: {name}: {msg} [{secs:.1}s]", i + 1);
            }
        }
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
