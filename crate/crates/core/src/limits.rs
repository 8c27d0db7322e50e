//! Scaling limits of continuous-time random walks driven by para-Markov
//! counting processes, and the limiting anomalous diffusion `Z(t) = B(L t)`.
//!
//! Given `L`, a walk with unit-variance jumps at the epochs of a Poisson
//! process of rate `L` rescales to Brownian motion run at speed `L`, so the
//! finite-dimensional laws of the limit are `S(½ ξᵀQξ)` with
//! `Q_ij = t_i ∧ t_j` and `S` the survival function of the mixing law.

use std::f64::consts::PI;
use std::io::Write;

use nalgebra::{Cholesky, DMatrix, DVector};
use num_complex::Complex64;
use rand::RngCore;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::processes::sample_poisson_count;
use crate::sampling::{sample_mixing, RngStream};
use crate::specfun::{MixingMeasure, SurvivalSpec};
use crate::stats::{EcfEstimate, Estimate};

/// Strictly increasing positive observation times.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TimeGrid(Vec<f64>);

impl TimeGrid {
    pub fn new(times: Vec<f64>) -> Result<Self> {
        if times.is_empty() {
            return Err(domain("time grid is empty"));
        }
        if times.iter().any(|&t| !(t > 0.0 && t.is_finite())) {
            return Err(domain(format!("times must be positive, got {times:?}")));
        }
        if times.windows(2).any(|p| p[1] <= p[0]) {
            return Err(domain(format!("times must be strictly increasing, got {times:?}")));
        }
        Ok(Self(times))
    }

    pub fn times(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    fn increments(&self) -> impl Iterator<Item = f64> + '_ {
        let mut prev = 0.0;
        self.0.iter().map(move |&t| {
            let d = t - prev;
            prev = t;
            d
        })
    }
}

/// Brownian covariance `Q_ij = t_i ∧ t_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct CovMatrix(DMatrix<f64>);

impl CovMatrix {
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    /// `ξᵀ Q ξ`.
    pub fn quadratic_form(&self, xi: &[f64]) -> Result<f64> {
        if xi.len() != self.0.nrows() {
            return Err(Error::DimensionMismatch {
                expected: self.0.nrows(),
                found: xi.len(),
            });
        }
        let x = DVector::from_column_slice(xi);
        Ok(x.dot(&(&self.0 * &x)))
    }
}

pub fn build_cov_matrix(grid: &TimeGrid) -> CovMatrix {
    let t = grid.times();
    CovMatrix(DMatrix::from_fn(t.len(), t.len(), |i, j| t[i].min(t[j])))
}

/// Law of the i.i.d. jumps; each has mean 0 and variance 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum JumpLaw {
    /// `±1` with probability ½ each.
    Rademacher,
    StandardNormal,
    /// Uniform on `[−√3, √3]`.
    CenteredUniform,
}

/// Largest jump count summed term by term for [`JumpLaw::CenteredUniform`].
const EXACT_UNIFORM_SUM: f64 = 4096.0;
/// Beyond this count the jump sum is drawn from its normal approximation.
const NORMAL_SUM: f64 = 1e15;

impl JumpLaw {
    pub fn sample(&self, rng: &mut RngStream) -> f64 {
        match self {
            JumpLaw::Rademacher => {
                if rng.next_u64() >> 63 == 1 {
                    1.0
                } else {
                    -1.0
                }
            }
            JumpLaw::StandardNormal => rng.standard_normal(),
            JumpLaw::CenteredUniform => 3f64.sqrt() * (2.0 * rng.uniform_open() - 1.0),
        }
    }

    /// Sum of `k` independent jumps. Normal jumps are summed exactly in
    /// law, Rademacher sums through the binomial law; uniform sums of more
    /// than 4096 terms use the normal approximation, whose error in the
    /// characteristic function is `O(1/k)`.
    pub fn sample_sum(&self, k: f64, rng: &mut RngStream) -> f64 {
        if k <= 0.0 {
            return 0.0;
        }
        match self {
            JumpLaw::StandardNormal => k.sqrt() * rng.standard_normal(),
            JumpLaw::Rademacher if k <= NORMAL_SUM => {
                let b = Binomial::new(k as u64, 0.5).expect("valid binomial");
                2.0 * b.sample(rng) as f64 - k
            }
            JumpLaw::CenteredUniform if k <= EXACT_UNIFORM_SUM => {
                (0..k as u64).map(|_| self.sample(rng)).sum()
            }
            _ => k.sqrt() * rng.standard_normal(),
        }
    }
}

/// `S(½ ξᵀQξ)`, the characteristic function of `(Z(t_1), …, Z(t_k))`.
pub fn anomalous_charfn(spec: &SurvivalSpec, grid: &TimeGrid, xi: &[f64]) -> Result<f64> {
    let q = build_cov_matrix(grid).quadratic_form(xi)?;
    spec.survival(0.5 * q)
}

/// One draw of `(B(L t_1), …, B(L t_k))`: `L` first, then independent
/// Gaussian increments with variances `L Δt_i`.
pub fn simulate_anomalous_diffusion(spec: &SurvivalSpec, grid: &TimeGrid, rng: &mut RngStream) -> Vec<f64> {
    let l = sample_mixing(&spec.mixing, rng);
    let mut z = 0.0;
    grid.increments()
        .map(|d| {
            z += (l * d).sqrt() * rng.standard_normal();
            z
        })
        .collect()
}

/// Density of `(Z(t_1), …, Z(t_k))` at `x`: the mixture
/// `∫ N(0, sQ)(x) ν(ds)`. At `x = 0` the mixture diverges when the
/// Lamperti density `~ s^{α−1}` near the origin cannot absorb
/// `s^{-k/2}`, that is when `α ≤ k/2`; `f64::INFINITY` is returned then.
pub fn anomalous_density(spec: &SurvivalSpec, grid: &TimeGrid, x: &[f64]) -> Result<f64> {
    let q = build_cov_matrix(grid);
    let k = grid.len();
    if x.len() != k {
        return Err(Error::DimensionMismatch {
            expected: k,
            found: x.len(),
        });
    }
    let chol = Cholesky::new(q.matrix().clone())
        .ok_or_else(|| Error::InvalidMatrix("covariance is singular".into()))?;
    let det = chol.l().diagonal().iter().map(|d| d * d).product::<f64>();
    let xv = DVector::from_column_slice(x);
    let m = xv.dot(&chol.solve(&xv));
    if m == 0.0 {
        if let MixingMeasure::Lamperti { alpha, .. } = spec.mixing {
            if alpha <= k as f64 / 2.0 {
                return Ok(f64::INFINITY);
            }
        }
    }
    let kf = k as f64;
    let norm = (2.0 * PI).powf(-kf / 2.0) / det.sqrt();
    let g = |s: f64| {
        if s <= 0.0 {
            return 0.0;
        }
        norm * s.powf(-kf / 2.0) * (-m / (2.0 * s)).exp()
    };
    spec.expect(g)
}

/// One draw of the rescaled walk `n^{-1/2} Σ_{k ≤ N(n t_i)} X_k` at the
/// grid times. Given `L`, the counts over `[n t_{i−1}, n t_i]` are Poisson
/// with mean `L n Δt_i` and independent, and only the sum of the jumps in
/// each block matters, so both are drawn directly. `L` is drawn first,
/// which keeps it common across `n` for a fixed stream.
pub fn simulate_ctrw(
    jumps: JumpLaw,
    spec: &SurvivalSpec,
    n: u64,
    grid: &TimeGrid,
    rng: &mut RngStream,
) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(domain("scale n must be at least 1"));
    }
    let l = sample_mixing(&spec.mixing, rng);
    let nf = n as f64;
    let scale = nf.sqrt().recip();
    let mut y = 0.0;
    Ok(grid
        .increments()
        .map(|d| {
            let mean = l * nf * d;
            let count = if mean > NORMAL_SUM {
                (mean + mean.sqrt() * rng.standard_normal()).round().max(0.0)
            } else {
                sample_poisson_count(mean, rng) as f64
            };
            y += jumps.sample_sum(count, rng) * scale;
            y
        })
        .collect())
}

/// Stream of path `i` under the seed and stream of `rng`.
fn path_stream(rng: &RngStream, i: usize) -> RngStream {
    rng.substream((rng.stream() << 32) | i as u64)
}

/// `paths` independent draws of [`simulate_ctrw`], path `i` on its own
/// stream; the result does not depend on the thread count.
pub fn simulate_ctrw_paths(
    jumps: JumpLaw,
    spec: &SurvivalSpec,
    n: u64,
    grid: &TimeGrid,
    rng: &RngStream,
    paths: usize,
) -> Result<Vec<Vec<f64>>> {
    (0..paths)
        .into_par_iter()
        .map(|i| simulate_ctrw(jumps, spec, n, grid, &mut path_stream(rng, i)))
        .collect()
}

/// `paths` independent draws of [`simulate_anomalous_diffusion`].
pub fn simulate_diffusion_paths(
    spec: &SurvivalSpec,
    grid: &TimeGrid,
    rng: &RngStream,
    paths: usize,
) -> Vec<Vec<f64>> {
    (0..paths)
        .into_par_iter()
        .map(|i| simulate_anomalous_diffusion(spec, grid, &mut path_stream(rng, i)))
        .collect()
}

/// Empirical characteristic function `mean e^{i⟨ξ, x⟩}`.
pub fn ecf(samples: &[Vec<f64>], xi: &[f64]) -> Result<EcfEstimate> {
    if samples.len() < 2 {
        return Err(Error::EmptySample);
    }
    let mut sum = Complex64::new(0.0, 0.0);
    for x in samples {
        if x.len() != xi.len() {
            return Err(Error::DimensionMismatch {
                expected: xi.len(),
                found: x.len(),
            });
        }
        let phase: f64 = x.iter().zip(xi).map(|(a, b)| a * b).sum();
        sum += Complex64::new(0.0, phase).exp();
    }
    EcfEstimate::from_sum(sum, samples.len())
}

/// `Cov(Z(t_1)², (Z(t_2) − Z(t_1))²)` from the first two coordinates,
/// with each square winsorized at its `1 − trim` quantile. The mixing law
/// may have infinite moments, so only the sign of this statistic is
/// meaningful; it is positive under any non-degenerate mixing.
pub fn squared_increment_covariance(samples: &[Vec<f64>], trim: f64) -> Result<Estimate> {
    if samples.len() < 2 {
        return Err(Error::EmptySample);
    }
    if samples.iter().any(|s| s.len() < 2) {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: samples.iter().map(|s| s.len()).min().unwrap_or(0),
        });
    }
    if !(0.0..0.5).contains(&trim) {
        return Err(domain(format!("trim fraction {trim} outside [0, 0.5)")));
    }
    let winsorize = |mut v: Vec<f64>| {
        let mut sorted = v.clone();
        sorted.sort_by(f64::total_cmp);
        let idx = (((1.0 - trim) * sorted.len() as f64).ceil() as usize).clamp(1, sorted.len()) - 1;
        let cap = sorted[idx];
        for x in v.iter_mut() {
            *x = x.min(cap);
        }
        v
    };
    let a = winsorize(samples.iter().map(|s| s[0] * s[0]).collect());
    let b = winsorize(samples.iter().map(|s| (s[1] - s[0]).powi(2)).collect());
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let prods: Vec<f64> = a.iter().zip(&b).map(|(x, y)| (x - ma) * (y - mb)).collect();
    Estimate::mean(&prods)
}

/// One row of a convergence report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub n: u64,
    pub xi: Vec<f64>,
    pub ecf_re: f64,
    pub ecf_im: f64,
    pub target: f64,
    pub abs_dev: f64,
    pub se: f64,
    /// `abs_dev ≤ 3 se + 2 / √n`
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub rows: Vec<ConvergenceRow>,
    /// Largest deviation over the ξ grid, per `n`.
    pub max_deviation: Vec<(u64, f64)>,
    /// Maximal deviations are non-increasing in `n` up to one standard
    /// error.
    pub trend_ok: bool,
}

impl ConvergenceReport {
    pub fn all_pass(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }

    /// Rows at scale `n`.
    pub fn rows_at(&self, n: u64) -> impl Iterator<Item = &ConvergenceRow> {
        self.rows.iter().filter(move |r| r.n == n)
    }

    /// CSV with columns `n,t_indices,xi,ecf_re,ecf_im,target,abs_dev,se,pass`;
    /// `t_indices` and `xi` list the grid coordinates separated by `;`.
    pub fn write_csv<W: Write>(&self, out: &mut W, grid: &TimeGrid) -> Result<()> {
        writeln!(out, "n,t_indices,xi,ecf_re,ecf_im,target,abs_dev,se,pass")?;
        let idx = (0..grid.len()).map(|i| i.to_string()).collect::<Vec<_>>().join(";");
        for r in &self.rows {
            let xi = r.xi.iter().map(|x| format!("{x:.16e}")).collect::<Vec<_>>().join(";");
            writeln!(
                out,
                "{},{},{},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{}",
                r.n, idx, xi, r.ecf_re, r.ecf_im, r.target, r.abs_dev, r.se, r.pass
            )?;
        }
        Ok(())
    }
}

/// ECF of the rescaled walk against the limit law at every `(n, ξ)`.
/// Paths share their stream across `n`, so the deviations at different
/// scales are positively correlated and the trend is not drowned in noise.
pub fn convergence_report(
    spec: &SurvivalSpec,
    jumps: JumpLaw,
    grid: &TimeGrid,
    xi_grid: &[Vec<f64>],
    n_list: &[u64],
    paths: usize,
    rng: &RngStream,
) -> Result<ConvergenceReport> {
    if xi_grid.is_empty() || n_list.is_empty() {
        return Err(domain("convergence report needs ξ and n values"));
    }
    let targets = xi_grid
        .iter()
        .map(|xi| anomalous_charfn(spec, grid, xi))
        .collect::<Result<Vec<_>>>()?;
    let mut rows = Vec::with_capacity(n_list.len() * xi_grid.len());
    let mut max_deviation = Vec::with_capacity(n_list.len());
    let mut max_se = Vec::with_capacity(n_list.len());
    for &n in n_list {
        let samples = simulate_ctrw_paths(jumps, spec, n, grid, rng, paths)?;
        let (mut worst, mut worst_se) = (0.0f64, 0.0f64);
        for (xi, &target) in xi_grid.iter().zip(&targets) {
            let e = ecf(&samples, xi)?;
            let dev = e.deviation(Complex64::new(target, 0.0));
            if dev > worst {
                worst = dev;
                worst_se = e.se;
            }
            rows.push(ConvergenceRow {
                n,
                xi: xi.clone(),
                ecf_re: e.value.re,
                ecf_im: e.value.im,
                target,
                abs_dev: dev,
                se: e.se,
                pass: dev <= 3.0 * e.se + 2.0 / (n as f64).sqrt(),
            });
        }
        max_deviation.push((n, worst));
        max_se.push(worst_se);
    }
    let trend_ok = max_deviation
        .windows(2)
        .zip(max_se.windows(2))
        .all(|(d, s)| d[1].1 <= d[0].1 + s[0].max(s[1]));
    Ok(ConvergenceReport {
        rows,
        max_deviation,
        trend_ok,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::SimpsonRule;
    use crate::specfun::{ml_survival, MLParams};

    fn lamperti() -> SurvivalSpec {
        SurvivalSpec::new(MixingMeasure::lamperti(0.5, 1.0).unwrap()).unwrap()
    }

    fn point(l: f64) -> SurvivalSpec {
        SurvivalSpec::new(MixingMeasure::point_mass(l).unwrap()).unwrap()
    }

    fn grid(t: &[f64]) -> TimeGrid {
        TimeGrid::new(t.to_vec()).unwrap()
    }

    #[test]
    fn grid_and_covariance() {
        assert!(TimeGrid::new(vec![]).is_err());
        assert!(TimeGrid::new(vec![1.0, 1.0]).is_err());
        assert!(TimeGrid::new(vec![0.0, 1.0]).is_err());
        let q = build_cov_matrix(&grid(&[0.5, 1.0]));
        assert_eq!(q.matrix(), &DMatrix::from_row_slice(2, 2, &[0.5, 0.5, 0.5, 1.0]));
        assert_eq!(build_cov_matrix(&grid(&[2.0])).matrix()[(0, 0)], 2.0);
        let mut rng = RngStream::new(5, 0);
        for _ in 0..50 {
            let mut t: Vec<f64> = (0..5).map(|_| 3.0 * rng.uniform_open()).collect();
            t.sort_by(f64::total_cmp);
            let q = build_cov_matrix(&grid(&t));
            let eig = q.matrix().clone().symmetric_eigen();
            assert!(eig.eigenvalues.iter().all(|&e| e >= -1e-12));
        }
    }

    #[test]
    fn charfn_examples() {
        let v = anomalous_charfn(&point(1.0), &grid(&[1.0]), &[1.0]).unwrap();
        assert!((v - (-0.5f64).exp()).abs() < 1e-15);
        assert_eq!(anomalous_charfn(&lamperti(), &grid(&[1.0, 2.0]), &[0.0, 0.0]).unwrap(), 1.0);
        let v = anomalous_charfn(&lamperti(), &grid(&[1.0]), &[2f64.sqrt()]).unwrap();
        let s1 = ml_survival(MLParams::new(0.5, 1.0).unwrap(), 1.0).unwrap();
        assert!((v - s1).abs() < 1e-9);
        assert!((s1 - 0.427583576155807).abs() < 1e-12);
        let v = anomalous_charfn(&lamperti(), &grid(&[0.5, 1.0]), &[1.0, 1.0]).unwrap();
        assert!((v - 0.397362624480641).abs() < 1e-9);
    }

    #[test]
    fn diffusion_matches_law() {
        let g = grid(&[1.0]);
        let samples = simulate_diffusion_paths(&lamperti(), &g, &RngStream::new(10, 0), 100_000);
        let e = ecf(&samples, &[1.0]).unwrap();
        let want = anomalous_charfn(&lamperti(), &g, &[1.0]).unwrap();
        assert!(e.z_score(Complex64::new(want, 0.0)) < 3.0, "{e:?} vs {want}");
        let samples = simulate_diffusion_paths(&point(2.0), &g, &RngStream::new(11, 0), 100_000);
        let xs: Vec<f64> = samples.iter().map(|s| s[0]).collect();
        assert!(Estimate::variance(&xs).unwrap().z_score(2.0) < 3.0);
    }

    #[test]
    fn dependence_witness() {
        let samples = simulate_diffusion_paths(&lamperti(), &grid(&[1.0, 2.0]), &RngStream::new(12, 0), 100_000);
        let c = squared_increment_covariance(&samples, 1e-3).unwrap();
        assert!(c.value > 5.0 * c.se, "{c:?}");
        // independent increments under point-mass mixing
        let samples = simulate_diffusion_paths(&point(1.0), &grid(&[1.0, 2.0]), &RngStream::new(13, 0), 100_000);
        let c = squared_increment_covariance(&samples, 0.0).unwrap();
        assert!(c.z_score(0.0) < 3.0, "{c:?}");
    }

    #[test]
    fn density_examples() {
        let g = grid(&[2.0]);
        let d = anomalous_density(&point(1.5), &g, &[0.0]).unwrap();
        assert!((d - 1.0 / (2.0 * PI * 3.0).sqrt()).abs() < 1e-15);
        let g2 = grid(&[0.5, 1.0]);
        let a = anomalous_density(&lamperti(), &g2, &[0.3, -0.7]).unwrap();
        let b = anomalous_density(&lamperti(), &g2, &[-0.3, 0.7]).unwrap();
        assert!((a - b).abs() < 1e-15);
        assert_eq!(anomalous_density(&lamperti(), &g, &[0.0]).unwrap(), f64::INFINITY);
        let s = SurvivalSpec::new(MixingMeasure::lamperti(0.8, 1.0).unwrap()).unwrap();
        assert!(anomalous_density(&s, &g, &[0.0]).unwrap().is_finite());
        assert!(anomalous_density(&lamperti(), &g2, &[1.0]).is_err());
    }

    /// `∫_ℝ f(x) dx` as `∫ (f(e^u) + f(−e^u)) e^u du` for heavy-tailed `f`.
    fn integrate_line<F: Fn(f64) -> f64>(f: F) -> f64 {
        SimpsonRule::with_tol(1e-7)
            .panels(64)
            .integrate(|u: f64| (f(u.exp()) + f(-u.exp())) * u.exp(), -25.0, 25.0)
            .unwrap()
    }

    #[test]
    fn density_normalization_and_marginals() {
        let spec = SurvivalSpec::new(MixingMeasure::lamperti(0.7, 1.0).unwrap()).unwrap();
        let g1 = grid(&[0.5]);
        let total = integrate_line(|x| anomalous_density(&spec, &g1, &[x]).unwrap());
        assert!((total - 1.0).abs() < 1e-4, "{total}");
        let g2 = grid(&[0.5, 1.0]);
        for &x in &[0.4, -1.3] {
            let marginal = integrate_line(|y| anomalous_density(&spec, &g2, &[x, y]).unwrap());
            let want = anomalous_density(&spec, &g1, &[x]).unwrap();
            assert!((marginal - want).abs() < 1e-4, "x={x}: {marginal} vs {want}");
        }
    }

    #[test]
    fn ecf_basics() {
        let c = vec![vec![0.5, 1.0]; 10];
        let e = ecf(&c, &[1.0, 2.0]).unwrap();
        assert!((e.value - Complex64::new(0.0, 2.5).exp()).norm() < 1e-15);
        assert!(e.se < 1e-7);
        let e = ecf(&c, &[0.0, 0.0]).unwrap();
        assert_eq!((e.value, e.se), (Complex64::new(1.0, 0.0), 0.0));
        assert!(ecf(&c[..1], &[1.0, 1.0]).is_err());
        let mut rng = RngStream::new(3, 3);
        let z: Vec<Vec<f64>> = (0..100_000).map(|_| vec![rng.standard_normal()]).collect();
        let e = ecf(&z, &[1.0]).unwrap();
        assert!(e.z_score(Complex64::new((-0.5f64).exp(), 0.0)) < 3.0);
    }

    #[test]
    fn jump_sums_have_unit_variance() {
        let mut rng = RngStream::new(14, 0);
        for law in [JumpLaw::Rademacher, JumpLaw::StandardNormal, JumpLaw::CenteredUniform] {
            let xs: Vec<f64> = (0..50_000).map(|_| law.sample_sum(7.0, &mut rng)).collect();
            assert!(Estimate::mean(&xs).unwrap().z_score(0.0) < 3.0);
            assert!(Estimate::variance(&xs).unwrap().z_score(7.0) < 3.0, "{law:?}");
            let big: Vec<f64> = (0..20_000).map(|_| law.sample_sum(1e6, &mut rng) / 1e3).collect();
            assert!(Estimate::variance(&big).unwrap().z_score(1.0) < 3.0, "{law:?}");
        }
        assert_eq!(JumpLaw::Rademacher.sample_sum(0.0, &mut rng), 0.0);
    }

    #[test]
    fn ctrw_wald_identities() {
        let g = grid(&[1.0]);
        let rng = RngStream::new(15, 0);
        let ys = simulate_ctrw_paths(JumpLaw::Rademacher, &point(1.0), 1, &g, &rng, 100_000).unwrap();
        let xs: Vec<f64> = ys.iter().map(|y| y[0]).collect();
        assert!(Estimate::mean(&xs).unwrap().z_score(0.0) < 3.0);
        assert!(Estimate::variance(&xs).unwrap().z_score(1.0) < 3.0);
        let again = simulate_ctrw_paths(JumpLaw::Rademacher, &point(1.0), 1, &g, &rng, 1000).unwrap();
        assert_eq!(&ys[..1000], &again[..]);
        assert!(simulate_ctrw(JumpLaw::Rademacher, &point(1.0), 0, &g, &mut RngStream::new(0, 0)).is_err());
    }

    #[test]
    fn ctrw_approaches_limit() {
        let rng = RngStream::new(16, 0);
        let g = grid(&[1.0]);
        let ys = simulate_ctrw_paths(JumpLaw::Rademacher, &lamperti(), 1000, &g, &rng, 100_000).unwrap();
        let e = ecf(&ys, &[1.0]).unwrap();
        let want = anomalous_charfn(&lamperti(), &g, &[1.0]).unwrap();
        assert!(e.deviation(Complex64::new(want, 0.0)) <= (3.0 * e.se).max(0.02));
        let g2 = grid(&[0.5, 1.0]);
        let ys = simulate_ctrw_paths(JumpLaw::Rademacher, &lamperti(), 1000, &g2, &rng, 100_000).unwrap();
        let e = ecf(&ys, &[1.0, 1.0]).unwrap();
        assert!(e.deviation(Complex64::new(0.397362624480641, 0.0)) <= (3.0 * e.se).max(0.02));
        // universality in the jump law
        let zs = simulate_ctrw_paths(JumpLaw::StandardNormal, &lamperti(), 1000, &g2, &RngStream::new(17, 0), 100_000)
            .unwrap();
        let f = ecf(&zs, &[1.0, 1.0]).unwrap();
        assert!((e.value - f.value).norm() < 3.0 * (e.se.hypot(f.se)));
    }

    #[test]
    fn report_shape_and_csv() {
        let g = grid(&[0.5, 1.0]);
        let xi = vec![vec![1.0, 0.0], vec![0.5, 0.5], vec![-1.0, 2.0]];
        let r = convergence_report(&point(1.0), JumpLaw::Rademacher, &g, &xi, &[10, 100], 20_000, &RngStream::new(18, 0))
            .unwrap();
        assert_eq!(r.rows.len(), 6);
        assert!(r.rows_at(100).all(|row| row.pass), "{r:?}");
        let mut buf = Vec::new();
        r.write_csv(&mut buf, &g).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 7);
        assert!(text.starts_with("n,t_indices,xi,ecf_re,ecf_im,target,abs_dev,se,pass\n10,0;1,"));
    }
}
