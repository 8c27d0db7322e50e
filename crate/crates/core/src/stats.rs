//! Goodness-of-fit tests and standard errors used by the verification
//! suites.

use num_complex::Complex64;
use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{Error, Result};

pub const DEFAULT_SIGNIFICANCE: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TestReport {
    pub statistic: f64,
    pub p_value: f64,
    pub n: usize,
    pub significance: f64,
    pub pass: bool,
}

impl TestReport {
    fn new(statistic: f64, p_value: f64, n: usize, significance: f64) -> Self {
        let p_value = p_value.clamp(0.0, 1.0);
        Self {
            statistic,
            p_value,
            n,
            significance,
            pass: p_value > significance,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("report serializes")
    }
}

/// A point estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub value: f64,
    pub se: f64,
    pub n: usize,
}

impl Estimate {
    /// Fraction of `hits` among `n` trials with the binomial standard error.
    pub fn proportion(hits: usize, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptySample);
        }
        let p = hits as f64 / n as f64;
        Ok(Self {
            value: p,
            se: (p * (1.0 - p) / n as f64).sqrt(),
            n,
        })
    }

    /// Sample mean with the standard error from the sample variance.
    pub fn mean(xs: &[f64]) -> Result<Self> {
        let n = xs.len();
        if n < 2 {
            return Err(Error::EmptySample);
        }
        let m = xs.iter().sum::<f64>() / n as f64;
        let var = xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1) as f64;
        Ok(Self {
            value: m,
            se: (var / n as f64).sqrt(),
            n,
        })
    }

    /// Sample variance with a normal-theory standard error built from the
    /// fourth central moment.
    pub fn variance(xs: &[f64]) -> Result<Self> {
        let n = xs.len();
        if n < 2 {
            return Err(Error::EmptySample);
        }
        let nf = n as f64;
        let m = xs.iter().sum::<f64>() / nf;
        let m2 = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / nf;
        let m4 = xs.iter().map(|x| (x - m).powi(4)).sum::<f64>() / nf;
        Ok(Self {
            value: m2 * nf / (nf - 1.0),
            se: ((m4 - m2 * m2) / nf).sqrt(),
            n,
        })
    }

    /// `|value − target| / se`, infinite when the SE is zero and the values
    /// differ.
    pub fn z_score(&self, target: f64) -> f64 {
        let d = (self.value - target).abs();
        if d == 0.0 {
            0.0
        } else {
            d / self.se
        }
    }
}

/// Empirical characteristic function value with its standard error
/// `√((1 − |φ̂|²) / N)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EcfEstimate {
    pub value: Complex64,
    pub se: f64,
    pub n: usize,
}

impl EcfEstimate {
    /// From the sum of `n` unit-modulus terms `e^{i⟨ξ,X⟩}`.
    pub fn from_sum(sum: Complex64, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptySample);
        }
        let value = sum / n as f64;
        Ok(Self {
            value,
            se: ((1.0 - value.norm_sqr()).max(0.0) / n as f64).sqrt(),
            n,
        })
    }

    pub fn deviation(&self, target: Complex64) -> f64 {
        (self.value - target).norm()
    }

    /// Deviation in standard errors, infinite when the SE is zero and the
    /// values differ.
    pub fn z_score(&self, target: Complex64) -> f64 {
        let d = self.deviation(target);
        if d == 0.0 {
            0.0
        } else {
            d / self.se
        }
    }
}

/// Survival function of the Kolmogorov distribution.
pub fn kolmogorov_sf(x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    if x < 1.0 {
        // theta-function form, fast for small x
        let c = std::f64::consts::PI.powi(2) / (8.0 * x * x);
        let mut cdf = 0.0;
        for k in 1..100 {
            let m = (2 * k - 1) as f64;
            let term = (-m * m * c).exp();
            cdf += term;
            if term < 1e-10 * cdf.max(1e-300) {
                break;
            }
        }
        let cdf = (2.0 * std::f64::consts::PI).sqrt() / x * cdf;
        return (1.0 - cdf).clamp(0.0, 1.0);
    }
    let mut sum = 0.0;
    for k in 1..100 {
        let kf = k as f64;
        let term = (-2.0 * kf * kf * x * x).exp();
        sum += if k % 2 == 1 { term } else { -term };
        if term < 1e-10 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// One-sample Kolmogorov–Smirnov test of sorted `samples` against `cdf`,
/// with the asymptotic p-value.
pub fn ks_test<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> Result<TestReport> {
    ks_test_at(samples, cdf, DEFAULT_SIGNIFICANCE)
}

pub fn ks_test_at<F: Fn(f64) -> f64>(
    samples: &[f64],
    cdf: F,
    significance: f64,
) -> Result<TestReport> {
    let n = samples.len();
    if n == 0 {
        return Err(Error::EmptySample);
    }
    if samples.windows(2).any(|w| !(w[0] <= w[1])) {
        return Err(Error::Unsorted);
    }
    if n < 50 {
        return Err(Error::Degenerate(format!(
            "{n} samples is too few for the asymptotic KS p-value"
        )));
    }
    let nf = n as f64;
    let mut d = 0.0f64;
    for (i, &x) in samples.iter().enumerate() {
        let f = cdf(x);
        d = d.max(f - i as f64 / nf).max((i + 1) as f64 / nf - f);
    }
    Ok(TestReport::new(d, kolmogorov_sf(nf.sqrt() * d), n, significance))
}

/// Pearson chi-square test of observed counts against a pmf over the same
/// bins. Bins are pooled left to right until each expected count reaches
/// `min_expected`; a short remainder is merged into the last pooled bin.
pub fn chi_square_pmf(observed: &[u64], pmf: &[f64], min_expected: f64) -> Result<TestReport> {
    chi_square_pmf_at(observed, pmf, min_expected, DEFAULT_SIGNIFICANCE)
}

pub fn chi_square_pmf_at(
    observed: &[u64],
    pmf: &[f64],
    min_expected: f64,
    significance: f64,
) -> Result<TestReport> {
    if observed.len() != pmf.len() {
        return Err(Error::DimensionMismatch {
            expected: pmf.len(),
            found: observed.len(),
        });
    }
    let n: u64 = observed.iter().sum();
    if n == 0 {
        return Err(Error::EmptySample);
    }
    let nf = n as f64;
    let mut bins: Vec<(f64, f64)> = Vec::new();
    let (mut o, mut e) = (0.0, 0.0);
    for (&ob, &p) in observed.iter().zip(pmf) {
        o += ob as f64;
        e += nf * p;
        if e >= min_expected {
            bins.push((o, e));
            o = 0.0;
            e = 0.0;
        }
    }
    if o > 0.0 || e > 0.0 {
        match bins.last_mut() {
            Some(last) => {
                last.0 += o;
                last.1 += e;
            }
            None => bins.push((o, e)),
        }
    }
    if bins.len() < 2 {
        return Err(Error::Degenerate(
            "fewer than two bins remain after pooling".into(),
        ));
    }
    let stat: f64 = bins.iter().map(|(o, e)| (o - e) * (o - e) / e).sum();
    let df = (bins.len() - 1) as f64;
    let p = ChiSquared::new(df)
        .map_err(|e| Error::Degenerate(e.to_string()))?
        .sf(stat);
    Ok(TestReport::new(stat, p, n as usize, significance))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OrderEstimate {
    pub order: f64,
    /// False when the errors do not decrease along the refinement.
    pub monotone: bool,
}

/// Observed convergence order from errors at steps `h`, `h/2`, `h/4`: the
/// least-squares slope of `log2 e` against `log2 (1/h)`.
pub fn order_estimate(errors: [f64; 3]) -> Result<OrderEstimate> {
    if errors.iter().any(|e| !(*e > 0.0)) {
        return Err(Error::Degenerate(format!(
            "errors must be positive, got {errors:?}"
        )));
    }
    let order = (errors[0].log2() - errors[2].log2()) / 2.0;
    Ok(OrderEstimate {
        order,
        monotone: errors[0] > errors[1] && errors[1] > errors[2],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Poisson};

    fn normal_cdf(x: f64) -> f64 {
        0.5 * statrs::function::erf::erfc(-x / std::f64::consts::SQRT_2)
    }

    #[test]
    fn kolmogorov_branches_agree() {
        // both series are valid near x = 1
        let x: f64 = 1.0;
        let c = std::f64::consts::PI.powi(2) / (8.0 * x * x);
        let theta: f64 = (1..50)
            .map(|k| (-(((2 * k - 1) as f64).powi(2)) * c).exp())
            .sum::<f64>()
            * (2.0 * std::f64::consts::PI).sqrt()
            / x;
        assert!((1.0 - theta - kolmogorov_sf(1.0)).abs() < 1e-10);
        assert!((kolmogorov_sf(1.36) - 0.0494).abs() < 5e-4);
        assert!((kolmogorov_sf(1.63) - 0.0098).abs() < 5e-4);
        assert_eq!(kolmogorov_sf(0.0), 1.0);
    }

    #[test]
    fn ks_null_and_alternative() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut xs: Vec<f64> = (0..10_000)
            .map(|_| rand_distr::StandardNormal.sample(&mut rng))
            .collect();
        xs.sort_by(f64::total_cmp);
        let r = ks_test(&xs, normal_cdf).unwrap();
        assert!(r.pass, "{r:?}");
        let shifted = ks_test(&xs, |x| normal_cdf(x - 0.1)).unwrap();
        assert!(shifted.p_value < 0.001);
    }

    #[test]
    fn ks_errors() {
        assert!(matches!(ks_test(&[], normal_cdf), Err(Error::EmptySample)));
        let xs: Vec<f64> = (0..100).map(|i| -(i as f64)).collect();
        assert!(matches!(ks_test(&xs, normal_cdf), Err(Error::Unsorted)));
        assert!(ks_test(&[0.0, 1.0], normal_cdf).is_err());
    }

    fn poisson_pmf(mean: f64, k: usize) -> f64 {
        (-mean + k as f64 * mean.ln() - statrs::function::gamma::ln_gamma(k as f64 + 1.0)).exp()
    }

    fn poisson_counts(mean: f64, n: usize, bins: usize, seed: u64) -> Vec<u64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d = Poisson::new(mean).unwrap();
        let mut c = vec![0u64; bins];
        for _ in 0..n {
            let k: f64 = d.sample(&mut rng);
            c[(k as usize).min(bins - 1)] += 1;
        }
        c
    }

    fn pmf_with_tail(mean: f64, bins: usize) -> Vec<f64> {
        let mut p: Vec<f64> = (0..bins - 1).map(|k| poisson_pmf(mean, k)).collect();
        p.push(1.0 - p.iter().sum::<f64>());
        p
    }

    #[test]
    fn chi_square_null_and_alternative() {
        let counts = poisson_counts(3.0, 10_000, 16, 5);
        let r = chi_square_pmf(&counts, &pmf_with_tail(3.0, 16), 5.0).unwrap();
        assert!(r.pass, "{r:?}");
        let r = chi_square_pmf(&counts, &pmf_with_tail(4.0, 16), 5.0).unwrap();
        assert!(r.p_value < 0.001);
    }

    #[test]
    fn chi_square_pooling_errors() {
        let r = chi_square_pmf(&[100, 0, 0], &[1.0, 0.0, 0.0], 5.0);
        assert!(matches!(r, Err(Error::Degenerate(_))));
        assert!(chi_square_pmf(&[1, 2], &[1.0], 5.0).is_err());
    }

    #[test]
    fn order_examples() {
        let o = order_estimate([0.4, 0.2, 0.1]).unwrap();
        assert!((o.order - 1.0).abs() < 1e-12 && o.monotone);
        let o = order_estimate([0.4, 0.1, 0.025]).unwrap();
        assert!((o.order - 2.0).abs() < 1e-12);
        assert!(!order_estimate([0.4, 0.5, 0.1]).unwrap().monotone);
        assert!(order_estimate([0.4, 0.0, 0.1]).is_err());
    }

    #[test]
    fn estimates() {
        let e = Estimate::proportion(25, 100).unwrap();
        assert!((e.value - 0.25).abs() < 1e-15);
        assert!((e.se - (0.25f64 * 0.75 / 100.0).sqrt()).abs() < 1e-15);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let xs: Vec<f64> = (0..1000).map(|_| rng.random::<f64>()).collect();
        let m = Estimate::mean(&xs).unwrap();
        assert!(m.z_score(0.5) < 4.0);
        assert!(Estimate::mean(&[1.0]).is_err());
        let r = TestReport::new(0.1, 0.5, 10, 0.01);
        assert!(r.to_json().contains("\"pass\":true"));
    }
}
