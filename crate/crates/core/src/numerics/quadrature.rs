use crate::error::{Error, Result};

/// Default number of Gauss-Legendre nodes per axis.
pub const DEFAULT_ORDER: usize = 64;

/// Copula integrals over the unit square are carried out in normal scores
/// `u = G(x)` on `[-GAUSSIAN_HALF_WIDTH, GAUSSIAN_HALF_WIDTH]`.
pub const GAUSSIAN_HALF_WIDTH: f64 = 8.0;

/// A fixed-order rule `sum_i w_i f(x_i)` on `[a, b]`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    interval: (f64, f64),
}

impl QuadratureRule {
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn interval(&self) -> (f64, f64) {
        self.interval
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.nodes.iter().copied().zip(self.weights.iter().copied())
    }

    /// The same rule affinely moved onto `[a, b]`.
    pub fn rescaled(&self, a: f64, b: f64) -> Result<QuadratureRule> {
        check_interval(a, b)?;
        let (a0, b0) = self.interval;
        let scale = (b - a) / (b0 - a0);
        Ok(QuadratureRule {
            nodes: self.nodes.iter().map(|&x| a + (x - a0) * scale).collect(),
            weights: self.weights.iter().map(|&w| w * scale).collect(),
            interval: (a, b),
        })
    }

    /// Unchecked weighted sum.
    #[inline]
    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F) -> f64 {
        self.iter().map(|(x, w)| w * f(x)).sum()
    }
}

fn check_interval(a: f64, b: f64) -> Result<()> {
    if !(a.is_finite() && b.is_finite() && a < b) {
        return Err(Error::InvalidArgument(format!(
            "quadrature interval requires finite a < b, got [{a}, {b}]"
        )));
    }
    Ok(())
}

/// `n`-point Gauss-Legendre rule on `[a, b]`, exact for polynomials of
/// degree `2n - 1`.
pub fn gauss_legendre(n: usize, a: f64, b: f64) -> Result<QuadratureRule> {
    if n == 0 {
        return Err(Error::InvalidArgument(
            "quadrature order must be at least 1".into(),
        ));
    }
    check_interval(a, b)?;

    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        // Tricomi initial guess, refined by Newton on P_n.
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, z);
            dp = d;
            let step = p / d;
            z -= step;
            if step.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, z);
        if d.is_finite() {
            dp = d;
        }
        let w = 2.0 / ((1.0 - z * z) * dp * dp);
        nodes[i] = -z;
        nodes[n - 1 - i] = z;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }

    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    Ok(QuadratureRule {
        nodes: nodes.into_iter().map(|x| mid + half * x).collect(),
        weights: weights.into_iter().map(|w| w * half).collect(),
        interval: (a, b),
    })
}

fn legendre_with_derivative(n: usize, z: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, z);
    if n == 0 {
        return (1.0, 0.0);
    }
    for j in 2..=n {
        let jf = j as f64;
        let p2 = ((2.0 * jf - 1.0) * z * p1 - (jf - 1.0) * p0) / jf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, d)
}

/// One-dimensional rule application that rejects non-finite integrand values.
pub fn integrate_1d<F: FnMut(f64) -> f64>(mut f: F, rule: &QuadratureRule) -> Result<f64> {
    let mut acc = 0.0;
    for (x, w) in rule.iter() {
        let value = f(x);
        if !value.is_finite() {
            return Err(Error::Evaluation {
                u: x,
                v: f64::NAN,
                value,
            });
        }
        acc += w * value;
    }
    Ok(acc)
}

/// Tensor-product quadrature of `f(u, v)`.
pub fn integrate_2d<F: FnMut(f64, f64) -> f64>(
    mut f: F,
    rule_u: &QuadratureRule,
    rule_v: &QuadratureRule,
) -> Result<f64> {
    let mut total = 0.0;
    for (u, wu) in rule_u.iter() {
        let mut row = 0.0;
        for (v, wv) in rule_v.iter() {
            let value = f(u, v);
            if !value.is_finite() {
                return Err(Error::Evaluation { u, v, value });
            }
            row += wv * value;
        }
        total += wu * row;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{std_normal_cdf, std_normal_pdf};

    #[test]
    fn midpoint_rule() {
        let r = gauss_legendre(1, 0.0, 1.0).unwrap();
        assert!((r.nodes()[0] - 0.5).abs() < 1e-15);
        assert!((r.weights()[0] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn two_point_rule() {
        let r = gauss_legendre(2, 0.0, 1.0).unwrap();
        let off = 1.0 / (2.0 * 3f64.sqrt());
        assert!((r.nodes()[0] - (0.5 - off)).abs() < 1e-15);
        assert!((r.nodes()[1] - (0.5 + off)).abs() < 1e-15);
        for &w in r.weights() {
            assert!((w - 0.5).abs() < 1e-15);
        }
    }

    #[test]
    fn invalid_arguments() {
        assert!(gauss_legendre(0, 0.0, 1.0).is_err());
        assert!(gauss_legendre(4, 1.0, 1.0).is_err());
        assert!(gauss_legendre(4, 2.0, 1.0).is_err());
    }

    #[test]
    fn weights_sum_and_nodes_ordered() {
        for &(n, a, b) in &[
            (1, 0.0, 1.0),
            (7, -3.0, 2.5),
            (64, -8.0, 8.0),
            (257, 0.0, 1e-3),
        ] {
            let r = gauss_legendre(n, a, b).unwrap();
            let s: f64 = r.weights().iter().sum();
            assert!((s - (b - a)).abs() <= 1e-12 * (b - a).max(1.0), "n = {n}");
            assert!(r.weights().iter().all(|&w| w > 0.0));
            assert!(r.nodes().windows(2).all(|p| p[0] < p[1]));
            assert!(r.nodes().iter().all(|&x| x > a && x < b));
        }
    }

    #[test]
    fn exact_for_polynomials() {
        for n in 1..=10 {
            let (a, b) = (-0.7, 1.3);
            let r = gauss_legendre(n, a, b).unwrap();
            for m in 0..=(2 * n - 1) as i32 {
                let exact = (b.powi(m + 1) - a.powi(m + 1)) / (m + 1) as f64;
                let got = r.integrate(|x| x.powi(m));
                assert!(
                    (got - exact).abs() <= 1e-12 * exact.abs().max(1.0),
                    "n = {n}, m = {m}: {got} vs {exact}"
                );
            }
        }
    }

    #[test]
    fn separable_and_constant_integrands() {
        let r = gauss_legendre(8, 0.0, 1.0).unwrap();
        assert!((integrate_2d(|_, _| 1.0, &r, &r).unwrap() - 1.0).abs() < 1e-14);
        assert!((integrate_2d(|u, v| 4.0 * u * v, &r, &r).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn gaussian_pair_density_normalises_in_normal_scores() {
        // Bivariate normal density written directly in normal scores; it is
        // the pair copula density times the product of the marginals.
        let rho: f64 = 0.3;
        let s = 1.0 - rho * rho;
        let r = gauss_legendre(DEFAULT_ORDER, -GAUSSIAN_HALF_WIDTH, GAUSSIAN_HALF_WIDTH).unwrap();
        let total = integrate_2d(
            |x, y| {
                (-(x * x - 2.0 * rho * x * y + y * y) / (2.0 * s)).exp()
                    / (2.0 * std::f64::consts::PI * s.sqrt())
            },
            &r,
            &r,
        )
        .unwrap();
        assert!((total - 1.0).abs() < 1e-8);
        let half = r.integrate(std_normal_pdf);
        assert!((half - (std_normal_cdf(8.0) - std_normal_cdf(-8.0))).abs() < 1e-13);
    }

    #[test]
    fn non_finite_values_are_reported() {
        let r = gauss_legendre(4, 0.0, 1.0).unwrap();
        let err = integrate_2d(|u, _| if u > 0.5 { f64::NAN } else { 1.0 }, &r, &r);
        assert!(matches!(err, Err(Error::Evaluation { .. })));
    }

    #[test]
    fn bilinear_and_monotone() {
        let r = gauss_legendre(6, 0.0, 2.0).unwrap();
        let f = |u: f64, v: f64| u * v + v.sin();
        let g = |u: f64, v: f64| (u - v).powi(2);
        let lhs = integrate_2d(|u, v| 2.0 * f(u, v) - 3.0 * g(u, v), &r, &r).unwrap();
        let rhs = 2.0 * integrate_2d(f, &r, &r).unwrap() - 3.0 * integrate_2d(g, &r, &r).unwrap();
        assert!((lhs - rhs).abs() < 1e-12);
        assert!(integrate_2d(g, &r, &r).unwrap() >= 0.0);
    }

    #[test]
    fn rescaled_matches_direct_construction() {
        let base = gauss_legendre(12, -1.0, 1.0).unwrap();
        let moved = base.rescaled(2.0, 5.0).unwrap();
        let direct = gauss_legendre(12, 2.0, 5.0).unwrap();
        for (a, b) in moved.nodes().iter().zip(direct.nodes()) {
            assert!((a - b).abs() < 1e-14);
        }
    }
}
