//! The acceptance suite: ten fixed-seed checks, each reduced to one
//! pass/fail line with pinned tolerances and a runtime budget.

use std::f64::consts::PI;
use std::fmt;
use std::time::Instant;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::Result;
use crate::limits::{convergence_report, JumpLaw, TimeGrid};
use crate::operators::{eigenfunction_report, fcaa_report, governing_residual, ResidualGrid};
use crate::processes::{
    counting_pmf, empirical_joint_survival, para_markov_waiting_times, renewal_waiting_times,
    sample_para_markov_count, schur_joint_survival, TransitionMatrix,
};
use crate::sampling::{sample_inverse_stable, sample_lamperti, sample_ml_waiting_time, RngStream};
use crate::specfun::{lamperti_cdf, mittag_leffler_neg, ml_survival, survival_from_mixture, MLParams, MixingMeasure, SurvivalSpec};
use crate::stablelaw::{ml_charfn, waiting_charfn_mc, waiting_charfn_product, SpectralAtom, SpectralFamily};
use crate::stats::{chi_square_pmf, ks_test};

/// Pre-registered base seed; each criterion derives its streams from it.
pub const SEED: u64 = 20_240_611;

pub const CRITERIA: [u8; 10] = [1, 2, 3, 4, 5, 6, 7, 8, 9, 10];

#[derive(Debug, Clone, Serialize)]
pub struct Criterion {
    pub id: u8,
    pub title: &'static str,
    pub pass: bool,
    /// Named quantities behind the verdict.
    pub metrics: Vec<(String, f64)>,
    pub seconds: f64,
    pub budget_seconds: f64,
}

impl Criterion {
    pub fn metric(&self, name: &str) -> Option<f64> {
        self.metrics.iter().find(|(k, _)| k == name).map(|(_, v)| *v)
    }
}

impl fmt::Display for Criterion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "criterion {:>2} {} [{}]",
            self.id,
            if self.pass { "PASS" } else { "FAIL" },
            self.title
        )?;
        for (k, v) in &self.metrics {
            write!(f, " {k}={v:.4e}")?;
        }
        write!(f, " ({:.1}s of {:.0}s)", self.seconds, self.budget_seconds)
    }
}

struct Checks {
    metrics: Vec<(String, f64)>,
    pass: bool,
}

impl Checks {
    fn new() -> Self {
        Self {
            metrics: Vec::new(),
            pass: true,
        }
    }

    fn metric(&mut self, name: &str, value: f64) {
        self.metrics.push((name.to_string(), value));
    }

    /// Records `value` and requires `value ≤ bound`.
    fn at_most(&mut self, name: &str, value: f64, bound: f64) {
        self.metric(name, value);
        self.pass &= value <= bound;
    }

    fn at_least(&mut self, name: &str, value: f64, bound: f64) {
        self.metric(name, value);
        self.pass &= value >= bound;
    }

    fn require(&mut self, ok: bool) {
        self.pass &= ok;
    }
}

/// Runs one criterion.
pub fn run(id: u8) -> Result<Criterion> {
    let (title, budget): (&'static str, f64) = match id {
        1 => ("mixture identity", 10.0),
        2 => ("eigenfunction residual", 30.0),
        3 => ("sampler KS", 60.0),
        4 => ("Schur-constant joint law", 60.0),
        5 => ("counting pmf chi-square", 30.0),
        6 => ("FCAA residual", 60.0),
        7 => ("governing equation", 120.0),
        8 => ("stable product formula", 60.0),
        9 => ("CTRW scaling limit", 300.0),
        10 => ("Markov reduction", 120.0),
        _ => return Err(crate::error::domain(format!("no criterion {id}"))),
    };
    let start = Instant::now();
    let checks = match id {
        1 => mixture_identity()?,
        2 => eigenfunction()?,
        3 => samplers()?,
        4 => schur()?,
        5 => counting()?,
        6 => fcaa()?,
        7 => governing()?,
        8 => stable_product()?,
        9 => ctrw_limit()?,
        _ => markov_reduction()?,
    };
    let seconds = start.elapsed().as_secs_f64();
    Ok(Criterion {
        id,
        title,
        pass: checks.pass && seconds <= budget,
        metrics: checks.metrics,
        seconds,
        budget_seconds: budget,
    })
}

pub fn run_all() -> Result<Vec<Criterion>> {
    CRITERIA.iter().map(|&id| run(id)).collect()
}

/// `E_α(−x)` by numerical inversion of its Laplace transform
/// `z^{α−1} / (z^α + x)` along a parabolic contour (trapezoid rule with 32
/// nodes). The transform has no poles on the principal sheet for α < 1, so
/// this route shares nothing with the series or the mixture quadrature.
pub fn ml_contour(alpha: f64, x: f64) -> f64 {
    if alpha == 1.0 {
        return (-x).exp();
    }
    const N: usize = 32;
    let nf = N as f64;
    let mut acc = Complex64::new(0.0, 0.0);
    for k in 0..N {
        let th = -PI + (k as f64 + 0.5) * 2.0 * PI / nf;
        let z = nf * Complex64::new(0.1309 - 0.1194 * th * th, 0.25 * th);
        let dz = nf * Complex64::new(-0.2388 * th, 0.25);
        let f = z.powf(alpha - 1.0) / (z.powf(alpha) + x);
        acc += z.exp() * f * dz;
    }
    // (1 / 2πi) ∫ e^z F(z) dz with dθ = 2π / N
    (acc / Complex64::new(0.0, nf)).re
}

fn mixture_identity() -> Result<Checks> {
    let mut c = Checks::new();
    let (mut vs_ml, mut vs_contour) = (0.0f64, 0.0f64);
    for &alpha in &[0.3, 0.5, 0.7, 0.9] {
        for &lambda in &[0.5, 1.0, 2.0] {
            let spec = SurvivalSpec::new(MixingMeasure::lamperti(alpha, lambda)?)?;
            for i in 1..=40 {
                let t = 0.5 * i as f64;
                let mix = survival_from_mixture(&spec, t)?;
                let x = lambda * t.powf(alpha);
                vs_ml = vs_ml.max((mix - mittag_leffler_neg(alpha, x)?).abs());
                vs_contour = vs_contour.max((mix - ml_contour(alpha, x)).abs());
            }
        }
    }
    c.at_most("max_err_vs_ml", vs_ml, 1e-7);
    c.at_most("max_err_vs_contour", vs_contour, 1e-7);
    Ok(c)
}

fn eigenfunction() -> Result<Checks> {
    let mut c = Checks::new();
    let grid = ResidualGrid::new(1e-3, 0.1, 2.0)?;
    let (mut worst, mut order) = (0.0f64, f64::INFINITY);
    for &alpha in &[0.5, 0.9] {
        for &lambda in &[1.0, 2.0] {
            let r = eigenfunction_report(MLParams::new(alpha, lambda)?, grid, 0.02)?;
            worst = worst.max(r.residual);
            order = order.min(r.order_estimate.unwrap_or(f64::NAN));
            c.require(r.pass);
        }
    }
    c.at_most("max_residual", worst, 0.02);
    c.at_least("min_order", order, 0.8);
    Ok(c)
}

fn sorted(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    v
}

fn samplers() -> Result<Checks> {
    let mut c = Checks::new();
    let n = 100_000;
    let mut rng = RngStream::new(SEED, 3);
    let xs = sorted((0..n).map(|_| sample_lamperti(0.6, 1.0, &mut rng)).collect::<Result<_>>()?);
    let r = ks_test(&xs, |s| lamperti_cdf(0.6, 1.0, s).unwrap_or(f64::NAN))?;
    c.at_least("lamperti_p", r.p_value, 0.01);
    let p = MLParams::new(0.7, 1.0)?;
    let mut rng = RngStream::new(SEED, 4);
    let xs = sorted((0..n).map(|_| sample_ml_waiting_time(p, &mut rng)).collect::<Result<_>>()?);
    let r = ks_test(&xs, |t| 1.0 - ml_survival(p, t).unwrap_or(f64::NAN))?;
    c.at_least("ml_waiting_p", r.p_value, 0.01);
    // at α = 1/2, ψ(t) has CDF erf(x / (2√t))
    let mut rng = RngStream::new(SEED, 5);
    let xs = sorted((0..n).map(|_| sample_inverse_stable(0.5, 1.5, &mut rng)).collect::<Result<_>>()?);
    let r = ks_test(&xs, |x| statrs::function::erf::erf(x / (2.0 * 1.5f64.sqrt())))?;
    c.at_least("inverse_stable_p", r.p_value, 0.01);
    Ok(c)
}

fn schur() -> Result<Checks> {
    let mut c = Checks::new();
    let spec = SurvivalSpec::new(MixingMeasure::lamperti(0.5, 1.0)?)?;
    let n = 100_000;
    let mut rng = RngStream::new(SEED, 6);
    let para: Vec<Vec<f64>> = (0..n).map(|_| para_markov_waiting_times(&spec, 3, &mut rng)).collect();
    let mut worst = 0.0f64;
    for th in [[1.0, 0.5, 0.5], [0.2, 0.3, 1.5], [2.0 / 3.0, 2.0 / 3.0, 2.0 / 3.0]] {
        let e = empirical_joint_survival(&para, &th)?;
        worst = worst.max(e.z_score(schur_joint_survival(&spec, &th)?));
    }
    c.at_most("max_z_schur", worst, 3.0);
    // dependence witness at t = (1, 1): S(2) for para-Markov, S(1)² for renewal
    let p = MLParams::new(0.5, 1.0)?;
    let mut rng = RngStream::new(SEED, 7);
    let renewal: Vec<Vec<f64>> = (0..n).map(|_| renewal_waiting_times(p, 2, &mut rng)).collect::<Result<_>>()?;
    let a = empirical_joint_survival(&para, &[1.0, 1.0])?;
    let b = empirical_joint_survival(&renewal, &[1.0, 1.0])?;
    let s1 = ml_survival(p, 1.0)?;
    c.at_most("z_renewal_vs_S1sq", b.z_score(s1 * s1), 3.0);
    c.at_least("z_para_vs_renewal", (a.value - b.value).abs() / a.se.hypot(b.se), 5.0);
    c.metric("S2", ml_survival(p, 2.0)?);
    c.metric("S1_squared", s1 * s1);
    Ok(c)
}

fn counting() -> Result<Checks> {
    let mut c = Checks::new();
    let spec = SurvivalSpec::new(MixingMeasure::lamperti(0.5, 1.0)?)?;
    let k = 15;
    let mut pmf = counting_pmf(&spec, 1.0, k)?;
    let tail = 1.0 - pmf.iter().sum::<f64>();
    pmf.push(tail.max(0.0));
    let mut observed = vec![0u64; k + 2];
    let mut rng = RngStream::new(SEED, 8);
    for _ in 0..100_000 {
        let n = sample_para_markov_count(&spec, 1.0, &mut rng) as usize;
        observed[n.min(k + 1)] += 1;
    }
    let r = chi_square_pmf(&observed, &pmf, 5.0)?;
    c.at_least("chi_square_p", r.p_value, 0.01);
    Ok(c)
}

fn fcaa() -> Result<Checks> {
    let mut c = Checks::new();
    let r = fcaa_report(MLParams::new(0.5, 1.0)?, 1.0, 1e-3, 20, 0.02)?;
    c.at_most("residual", r.residual, 0.02);
    let errs = r.refinement.unwrap_or([f64::NAN; 3]);
    c.metric("residual_h2", errs[1]);
    c.metric("residual_h4", errs[2]);
    c.require(errs[0] > errs[1] && errs[1] > errs[2]);
    Ok(c)
}

fn two_state() -> Result<TransitionMatrix> {
    TransitionMatrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]])
}

fn three_state() -> Result<TransitionMatrix> {
    TransitionMatrix::from_rows(&[vec![0.1, 0.6, 0.3], vec![0.5, 0.0, 0.5], vec![0.2, 0.7, 0.1]])
}

/// The literal residual `D^{μ,−G} u + λ u` cannot vanish on a finite chain:
/// on the kernel of `G` the operator is zero while `u(t)` keeps its
/// stationary component, so the residual tends to `λ Π`. The line reports
/// the literal residual against the stated bound, together with the
/// residual on the range of `G` and the stationary defect `λ‖Π‖`.
fn governing() -> Result<Checks> {
    let mut c = Checks::new();
    let grid = ResidualGrid::new(1e-3, 0.2, 2.0)?;
    let spec = SurvivalSpec::new(MixingMeasure::lamperti(0.5, 1.0)?)?;
    let control = SurvivalSpec::new(MixingMeasure::point_mass(1.0)?)?;
    let (mut literal, mut range, mut defect, mut classical) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for p in [two_state()?, three_state()?] {
        let r = governing_residual(&p, &spec, grid)?;
        literal = literal.max(r.literal);
        range = range.max(r.range);
        defect = defect.max(r.stationary_defect);
        classical = classical.max(governing_residual(&p, &control, grid)?.literal);
    }
    c.at_most("literal_residual", literal, 0.05);
    c.metric("range_residual", range);
    c.metric("stationary_defect", defect);
    c.at_most("alpha1_control", classical, 1e-8);
    Ok(c)
}

/// Atoms at `(1,1)/√2` and `(0.6, 0.8)` in the first measure, compensated
/// on `(0,1)`, and `1.5 δ_{(0,1)}` in the second.
pub fn dependent_family(alpha: f64) -> Result<SpectralFamily> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let atoms = [(vec![h, h], 0.6), (vec![0.6, 0.8], 0.5)];
    let comp: f64 = atoms.iter().map(|(s, w)| w * s[1].powf(alpha)).sum();
    let mut nu1 = atoms
        .iter()
        .map(|(s, w)| SpectralAtom::new(s.clone(), *w))
        .collect::<Result<Vec<_>>>()?;
    nu1.push(SpectralAtom::new(vec![0.0, 1.0], -comp)?);
    let nu2 = vec![SpectralAtom::new(vec![0.0, 1.0], 1.5)?];
    SpectralFamily::new(alpha, 1.0 / alpha, vec![nu1, nu2])
}

fn stable_product() -> Result<Checks> {
    let mut c = Checks::new();
    let (alpha, lambda) = (0.5, 1.0);
    let xis = [[0.5, 1.0], [1.0, -1.0], [-2.0, 0.5], [1.5, 1.5], [0.0, 2.0]];
    let families = [SpectralFamily::independent_increments(alpha, 2)?, dependent_family(alpha)?];
    let (mut worst_z, mut closed) = (0.0f64, 0.0f64);
    for (f, fam) in families.iter().enumerate() {
        for (i, xi) in xis.iter().enumerate() {
            let want = waiting_charfn_product(fam, lambda, xi)?;
            let rng = RngStream::new(SEED, 100 + 10 * f as u64 + i as u64);
            let e = waiting_charfn_mc(fam, lambda, xi, &rng, 100_000)?;
            worst_z = worst_z.max(e.z_score(want));
            if f == 0 {
                let ml = ml_charfn(alpha, lambda, xi[0])? * ml_charfn(alpha, lambda, xi[1])?;
                closed = closed.max((want - ml).norm());
            }
        }
    }
    c.at_most("max_z_mc_vs_product", worst_z, 3.0);
    c.at_most("subordinator_vs_ml_product", closed, 1e-12);
    Ok(c)
}

fn xi_grid() -> Vec<Vec<f64>> {
    vec![
        vec![1.0, 1.0],
        vec![0.5, 0.0],
        vec![-1.0, 2.0],
        vec![2.0, -0.5],
        vec![0.0, 1.5],
    ]
}

fn ctrw_limit() -> Result<Checks> {
    let mut c = Checks::new();
    let grid = TimeGrid::new(vec![0.5, 1.0])?;
    let spec = SurvivalSpec::new(MixingMeasure::lamperti(0.5, 1.0)?)?;
    let rng = RngStream::new(SEED, 9);
    let r = convergence_report(&spec, JumpLaw::Rademacher, &grid, &xi_grid(), &[10, 100, 1000], 100_000, &rng)?;
    for &(n, d) in &r.max_deviation {
        c.metric(&format!("max_dev_n{n}"), d);
    }
    c.require(r.rows_at(1000).all(|row| row.pass));
    c.require(r.trend_ok);
    let control = SurvivalSpec::new(MixingMeasure::point_mass(1.0)?)?;
    let r = convergence_report(&control, JumpLaw::Rademacher, &grid, &xi_grid(), &[100], 100_000, &rng)?;
    c.metric("pointmass_max_dev_n100", r.max_deviation[0].1);
    c.require(r.all_pass());
    Ok(c)
}

fn poisson_pmf(mean: f64, k: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(k + 1);
    let mut p = (-mean).exp();
    for j in 0..=k {
        out.push(p);
        p *= mean / (j + 1) as f64;
    }
    out
}

fn markov_reduction() -> Result<Checks> {
    let mut c = Checks::new();
    let lambda = 1.5;
    let spec = SurvivalSpec::new(MixingMeasure::point_mass(lambda)?)?;
    let n = 100_000;
    // waiting times are exponential
    let mut rng = RngStream::new(SEED, 10);
    let xs = sorted((0..n).flat_map(|_| para_markov_waiting_times(&spec, 1, &mut rng)).collect());
    let r = ks_test(&xs, |t| 1.0 - (-lambda * t).exp())?;
    c.at_least("exponential_ks_p", r.p_value, 0.01);
    // counts are Poisson
    let k = 15;
    let mut pmf = poisson_pmf(lambda, k);
    pmf.push((1.0 - pmf.iter().sum::<f64>()).max(0.0));
    let mut observed = vec![0u64; k + 2];
    let mut rng = RngStream::new(SEED, 11);
    for _ in 0..n {
        observed[(sample_para_markov_count(&spec, 1.0, &mut rng) as usize).min(k + 1)] += 1;
    }
    c.at_least("poisson_chi2_p", chi_square_pmf(&observed, &pmf, 5.0)?.p_value, 0.01);
    // the law of the counting process is Poisson exactly
    let law = counting_pmf(&spec, 1.0, k)?;
    let gap = law.iter().zip(poisson_pmf(lambda, k)).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    c.at_most("pmf_vs_poisson", gap, 1e-12);
    // classical Kolmogorov forward equation
    let grid = ResidualGrid::new(1e-3, 0.2, 2.0)?;
    let kolmogorov = governing_residual(&three_state()?, &spec, grid)?.literal;
    c.at_most("kolmogorov_residual", kolmogorov, 1e-8);
    let eig = crate::operators::eigenfunction_residual(MLParams::new(1.0, lambda)?, grid)?;
    c.at_most("exponential_eigen_residual", eig, 1e-8);
    // survival is exponential
    let s = (1..=20).map(|i| (spec.survival(0.5 * i as f64).unwrap_or(f64::NAN) - (-lambda * 0.5 * i as f64).exp()).abs());
    c.at_most("survival_vs_exp", s.fold(0.0, f64::max), 1e-10);
    // Donsker regime for the walk
    let g = TimeGrid::new(vec![0.5, 1.0])?;
    let r = convergence_report(&spec, JumpLaw::Rademacher, &g, &xi_grid(), &[100], n, &RngStream::new(SEED, 12))?;
    c.metric("donsker_max_dev", r.max_deviation[0].1);
    c.require(r.all_pass());
    Ok(c)
}
