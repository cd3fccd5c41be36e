use serde::Serialize;

/// Three-valued outcome of a series test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Convergence {
    Converges,
    Diverges,
    Inconclusive,
}

/// Terms, partial sums and a convergence verdict for a nonnegative series.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeriesVerdict {
    pub terms: Vec<f64>,
    pub partial_sums: Vec<f64>,
    pub verdict: Convergence,
    pub evidence: String,
}

impl SeriesVerdict {
    /// Verdict decided outside the numeric terms (a closed-form tail rule).
    pub fn analytic(terms: Vec<f64>, verdict: Convergence, evidence: impl Into<String>) -> Self {
        let partial_sums = partial_sums(&terms);
        Self {
            terms,
            partial_sums,
            verdict,
            evidence: evidence.into(),
        }
    }

    /// Verdict guessed from the finite terms alone by comparing the last two
    /// dyadic blocks of the series. For `k^-p` the block ratio tends to
    /// `2^(1-p)`, so a ratio well below 1 indicates convergence and a ratio
    /// near or above 1 indicates divergence. Anything in between is left
    /// inconclusive.
    pub fn heuristic(terms: Vec<f64>) -> Self {
        let partial_sums = partial_sums(&terms);
        let k = terms.len();
        let (verdict, evidence) = if k < 8 {
            (
                Convergence::Inconclusive,
                format!("only {k} terms; need at least 8 for a block comparison"),
            )
        } else {
            let last: f64 = terms[k / 2..].iter().sum();
            let prev: f64 = terms[k / 4..k / 2].iter().sum();
            let total = partial_sums[k - 1];
            if last <= 1e-14 * total.max(f64::MIN_POSITIVE) || last == 0.0 {
                (
                    Convergence::Converges,
                    format!("tail block sum {last:e} is negligible against S_K = {total}"),
                )
            } else if prev == 0.0 {
                (
                    Convergence::Inconclusive,
                    "earlier block vanishes while the last does not".to_string(),
                )
            } else {
                let ratio = last / prev;
                let verdict = if ratio <= 0.75 {
                    Convergence::Converges
                } else if ratio >= 0.97 {
                    Convergence::Diverges
                } else {
                    Convergence::Inconclusive
                };
                (verdict, format!("dyadic block ratio {ratio:.6}"))
            }
        };
        Self {
            terms,
            partial_sums,
            verdict,
            evidence,
        }
    }

    pub fn total(&self) -> f64 {
        self.partial_sums.last().copied().unwrap_or(0.0)
    }
}

fn partial_sums(terms: &[f64]) -> Vec<f64> {
    terms
        .iter()
        .scan(0.0, |acc, &t| {
            *acc += t;
            Some(*acc)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p_series(p: f64, k: usize) -> Vec<f64> {
        (1..=k).map(|i| (i as f64).powf(-p)).collect()
    }

    #[test]
    fn heuristic_classifies_p_series() {
        assert_eq!(
            SeriesVerdict::heuristic(p_series(2.0, 1024)).verdict,
            Convergence::Converges
        );
        assert_eq!(
            SeriesVerdict::heuristic(p_series(1.0, 1024)).verdict,
            Convergence::Diverges
        );
        assert_eq!(
            SeriesVerdict::heuristic(p_series(0.5, 1024)).verdict,
            Convergence::Diverges
        );
        assert_eq!(
            SeriesVerdict::heuristic(p_series(1.05, 1024)).verdict,
            Convergence::Inconclusive
        );
        assert_eq!(
            SeriesVerdict::heuristic(vec![1.0; 4]).verdict,
            Convergence::Inconclusive
        );
    }

    #[test]
    fn zero_tail_converges() {
        let mut t = vec![0.5, 0.25, 0.1];
        t.extend(std::iter::repeat_n(0.0, 20));
        assert_eq!(SeriesVerdict::heuristic(t).verdict, Convergence::Converges);
    }

    #[test]
    fn partial_sums_accumulate() {
        let s = SeriesVerdict::analytic(vec![1.0, 2.0, 3.0], Convergence::Diverges, "x");
        assert_eq!(s.partial_sums, vec![1.0, 3.0, 6.0]);
        assert_eq!(s.total(), 6.0);
    }
}
