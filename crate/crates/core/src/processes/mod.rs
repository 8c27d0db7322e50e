//! Counting processes and chains: Poisson, fractional Poisson (renewal),
//! para-Markov counting processes, continuous-time Markov chains and
//! para-Markov chains, together with their exact finite-time laws.
//!
//! A para-Markov process is a Markov process run on the random clock
//! `L · t`, with `L` drawn once per path from the mixing measure. Its
//! waiting times are `W_k / L` with i.i.d. unit exponentials `W_k`, so they
//! are exchangeable with joint survival `S(t_1 + … + t_n)`.

mod expm;

use std::f64::consts::PI;
use std::io::Write;

use nalgebra::DMatrix;
use rand_distr::{Distribution, Poisson};
use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::quadrature::Integrand;
use crate::sampling::{sample_mixing, sample_ml_waiting_time, RngStream};
use crate::specfun::{check_rate, lamperti_v_range, MLParams, MixingMeasure, SurvivalSpec};
use crate::stats::Estimate;

pub(crate) use expm::expm_uniformized;

/// Paths stop recording after this many epochs and are marked truncated.
pub const DEFAULT_MAX_EPOCHS: usize = 1_000_000;

/// Row-stochastic matrix of the embedded chain.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionMatrix(DMatrix<f64>);

impl TransitionMatrix {
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        if m.nrows() == 0 || m.nrows() != m.ncols() {
            return Err(Error::InvalidMatrix(format!(
                "transition matrix must be square and non-empty, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        for (i, row) in m.row_iter().enumerate() {
            if row.iter().any(|&p| !(0.0..=1.0).contains(&p)) {
                return Err(Error::InvalidMatrix(format!("row {i} has an entry outside [0,1]")));
            }
            let s: f64 = row.iter().sum();
            if (s - 1.0).abs() > 1e-12 {
                return Err(Error::InvalidMatrix(format!("row {i} sums to {s}")));
            }
        }
        Ok(Self(m))
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidMatrix("rows of unequal length".into()));
        }
        let flat: Vec<f64> = rows.iter().flatten().copied().collect();
        Self::new(DMatrix::from_row_slice(n, n, &flat))
    }

    pub fn states(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    /// The unit-rate generator `P − I`.
    pub fn generator(&self) -> GeneratorMatrix {
        GeneratorMatrix::from_transition(self, 1.0).expect("unit rate is valid")
    }

    fn step(&self, from: usize, rng: &mut RngStream) -> usize {
        let u = rng.uniform_open();
        let mut acc = 0.0;
        let row = self.0.row(from);
        for (j, &p) in row.iter().enumerate() {
            acc += p;
            if u < acc {
                return j;
            }
        }
        // rounding left u above the last partial sum
        row.iter().rposition(|&p| p > 0.0).unwrap_or(from)
    }
}

/// Generator `G = Λ(P − I)` of a finite continuous-time chain.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorMatrix {
    g: DMatrix<f64>,
    rate: f64,
}

impl GeneratorMatrix {
    pub fn new(g: DMatrix<f64>) -> Result<Self> {
        let n = g.nrows();
        if n == 0 || n != g.ncols() {
            return Err(Error::InvalidMatrix("generator must be square and non-empty".into()));
        }
        for i in 0..n {
            for j in 0..n {
                if i != j && g[(i, j)] < 0.0 {
                    return Err(Error::InvalidMatrix(format!(
                        "negative off-diagonal rate at ({i},{j})"
                    )));
                }
            }
            let s: f64 = g.row(i).iter().sum();
            if s.abs() > 1e-12 {
                return Err(Error::InvalidMatrix(format!("row {i} sums to {s}, not 0")));
            }
        }
        let rate = (0..n).map(|i| g[(i, i)].abs()).fold(0.0, f64::max);
        Ok(Self { g, rate })
    }

    pub fn from_transition(p: &TransitionMatrix, rate: f64) -> Result<Self> {
        check_rate(rate)?;
        let n = p.states();
        let g = (p.matrix() - DMatrix::<f64>::identity(n, n)) * rate;
        Ok(Self { g, rate })
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.g
    }

    pub fn states(&self) -> usize {
        self.g.nrows()
    }

    /// Uniformization rate `Λ`.
    pub fn rate(&self) -> f64 {
        self.rate
    }

    /// The chain `I + G / Λ`.
    pub fn uniformized(&self) -> DMatrix<f64> {
        let n = self.states();
        if self.rate == 0.0 {
            return DMatrix::identity(n, n);
        }
        DMatrix::identity(n, n) + &self.g / self.rate
    }

    /// `exp(G s)` for `s ≥ 0`.
    pub fn exp(&self, s: f64) -> DMatrix<f64> {
        if self.rate == 0.0 {
            let n = self.states();
            return DMatrix::identity(n, n);
        }
        expm_uniformized(&self.uniformized(), self.rate, s)
    }
}

/// A realized trajectory: jump epochs and the states between them.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JumpPath {
    pub epochs: Vec<f64>,
    /// `states[k]` holds on `[epochs[k-1], epochs[k])`, with `states[0]`
    /// the initial state.
    pub states: Vec<usize>,
    pub horizon: f64,
    /// Set when recording stopped before the horizon.
    pub truncated: bool,
}

impl JumpPath {
    /// Right-continuous state at time `t`.
    pub fn state_at(&self, t: f64) -> usize {
        let k = self.epochs.partition_point(|&e| e <= t);
        self.states[k]
    }

    /// Number of epochs in `(0, t]`.
    pub fn count_at(&self, t: f64) -> usize {
        self.epochs.partition_point(|&e| e <= t)
    }

    /// Waiting times that ended before the horizon. The interval still
    /// running at the horizon is left out.
    pub fn complete_waiting_times(&self) -> Vec<f64> {
        let mut prev = 0.0;
        self.epochs
            .iter()
            .map(|&e| {
                let w = e - prev;
                prev = e;
                w
            })
            .collect()
    }

    fn record(horizon: f64, initial: usize) -> Self {
        Self {
            epochs: Vec::new(),
            states: vec![initial],
            horizon,
            truncated: false,
        }
    }
}

fn check_horizon(horizon: f64) -> Result<()> {
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(domain(format!("horizon must be positive and finite, got {horizon}")));
    }
    Ok(())
}

/// Runs a chain whose `k`-th holding time is `next_wait(rng)` up to the
/// horizon. A `None` chain counts epochs.
fn run_path<F>(
    chain: Option<&TransitionMatrix>,
    initial: usize,
    horizon: f64,
    rng: &mut RngStream,
    mut next_wait: F,
) -> JumpPath
where
    F: FnMut(&mut RngStream) -> f64,
{
    let mut path = JumpPath::record(horizon, initial);
    let mut t = 0.0;
    let mut state = initial;
    loop {
        t += next_wait(rng);
        if t > horizon {
            break;
        }
        if path.epochs.len() >= DEFAULT_MAX_EPOCHS {
            path.truncated = true;
            break;
        }
        state = match chain {
            Some(p) => p.step(state, rng),
            None => state + 1,
        };
        path.epochs.push(t);
        path.states.push(state);
    }
    path
}

pub fn simulate_poisson(rate: f64, horizon: f64, rng: &mut RngStream) -> Result<JumpPath> {
    check_rate(rate)?;
    check_horizon(horizon)?;
    Ok(run_path(None, 0, horizon, rng, |r| r.exp1() / rate))
}

/// Para-Markov counting process: one mixing draw `L`, then a unit-rate
/// Poisson process on the clock `L · t`.
pub fn simulate_para_markov_counting(
    spec: &SurvivalSpec,
    horizon: f64,
    rng: &mut RngStream,
) -> Result<JumpPath> {
    check_horizon(horizon)?;
    let l = sample_mixing(&spec.mixing, rng);
    if l == 0.0 {
        return Ok(JumpPath::record(horizon, 0));
    }
    Ok(run_path(None, 0, horizon, rng, |r| r.exp1() / l))
}

/// Renewal process with i.i.d. Mittag-Leffler waiting times.
pub fn simulate_fractional_poisson(
    p: MLParams,
    horizon: f64,
    rng: &mut RngStream,
) -> Result<JumpPath> {
    check_horizon(horizon)?;
    MLParams::new(p.alpha, p.lambda)?;
    Ok(run_path(None, 0, horizon, rng, |r| {
        sample_ml_waiting_time(p, r).expect("validated parameters")
    }))
}

fn check_initial(p: &TransitionMatrix, initial: usize) -> Result<()> {
    if initial >= p.states() {
        return Err(Error::InvalidMatrix(format!(
            "initial state {initial} outside {} states",
            p.states()
        )));
    }
    Ok(())
}

/// Continuous-time chain `M̃(N(t))`: exponential holding times of rate
/// `rate`, jumps by `P`. Self-transitions are kept as epochs.
pub fn simulate_ctmc(
    p: &TransitionMatrix,
    rate: f64,
    initial: usize,
    horizon: f64,
    rng: &mut RngStream,
) -> Result<JumpPath> {
    check_rate(rate)?;
    check_horizon(horizon)?;
    check_initial(p, initial)?;
    Ok(run_path(Some(p), initial, horizon, rng, |r| r.exp1() / rate))
}

/// Para-Markov chain: one mixing draw `L`, then the unit-rate chain on the
/// clock `L · t`.
pub fn simulate_para_markov_chain(
    p: &TransitionMatrix,
    spec: &SurvivalSpec,
    initial: usize,
    horizon: f64,
    rng: &mut RngStream,
) -> Result<JumpPath> {
    check_horizon(horizon)?;
    check_initial(p, initial)?;
    let l = sample_mixing(&spec.mixing, rng);
    if l == 0.0 {
        return Ok(JumpPath::record(horizon, initial));
    }
    Ok(run_path(Some(p), initial, horizon, rng, |r| r.exp1() / l))
}

/// First `n` waiting times of a para-Markov process (no horizon).
pub fn para_markov_waiting_times(spec: &SurvivalSpec, n: usize, rng: &mut RngStream) -> Vec<f64> {
    let l = sample_mixing(&spec.mixing, rng);
    (0..n).map(|_| rng.exp1() / l).collect()
}

/// First `n` waiting times of the fractional Poisson renewal process.
pub fn renewal_waiting_times(p: MLParams, n: usize, rng: &mut RngStream) -> Result<Vec<f64>> {
    (0..n).map(|_| sample_ml_waiting_time(p, rng)).collect()
}

/// `N(t)` of the para-Markov counting process, drawn without building the
/// path: given `L`, the count is Poisson with mean `L t`.
pub fn sample_para_markov_count(spec: &SurvivalSpec, t: f64, rng: &mut RngStream) -> u64 {
    let l = sample_mixing(&spec.mixing, rng);
    sample_poisson_count(l * t, rng)
}

/// Poisson draw that stays finite for very large means, where the normal
/// approximation is exact to far below one count in relative terms.
pub(crate) fn sample_poisson_count(mean: f64, rng: &mut RngStream) -> u64 {
    if mean <= 0.0 {
        return 0;
    }
    if mean > 1e15 {
        return (mean + mean.sqrt() * rng.standard_normal()).round().max(0.0) as u64;
    }
    let d = Poisson::new(mean).expect("positive finite mean");
    d.sample(rng) as u64
}

fn ln_factorials(k_max: usize) -> Vec<f64> {
    (0..=k_max)
        .scan(0.0, |acc, k| {
            if k > 0 {
                *acc += (k as f64).ln();
            }
            Some(*acc)
        })
        .collect()
}

/// Poisson pmf with mean `x` on `0..ln_fact.len()`.
fn poisson_pmf(x: f64, ln_fact: &[f64]) -> Vec<f64> {
    if x == 0.0 {
        let mut v = vec![0.0; ln_fact.len()];
        v[0] = 1.0;
        return v;
    }
    let lx = x.ln();
    ln_fact
        .iter()
        .enumerate()
        .map(|(k, lf)| (-x + k as f64 * lx - lf).exp())
        .collect()
}

/// `P(N(t) = k)` for `k = 0..=k_max` as `E[Poisson_k(L t)]`.
pub fn counting_pmf(spec: &SurvivalSpec, t: f64, k_max: usize) -> Result<Vec<f64>> {
    if !(t >= 0.0) {
        return Err(domain(format!("time must be non-negative, got {t}")));
    }
    if t == 0.0 {
        let mut p = vec![0.0; k_max + 1];
        p[0] = 1.0;
        return Ok(p);
    }
    let ln_fact = ln_factorials(k_max);
    let poisson = |l: f64| poisson_pmf(l * t, &ln_fact);
    // Poisson_k(x) is negligible for x beyond 2 k_max + 60
    let decay = 40.0 * t / (2.0 * k_max as f64 + 60.0);
    spec.expect_generic(poisson, decay)
}

/// `P(J_1 > t_1, …, J_n > t_n) = S(t_1 + … + t_n)`.
pub fn schur_joint_survival(spec: &SurvivalSpec, thresholds: &[f64]) -> Result<f64> {
    if thresholds.iter().any(|t| !(*t >= 0.0)) {
        return Err(domain("thresholds must be non-negative"));
    }
    spec.survival(thresholds.iter().sum())
}

/// Fraction of waiting-time vectors exceeding every threshold, with the
/// binomial standard error.
pub fn empirical_joint_survival(samples: &[Vec<f64>], thresholds: &[f64]) -> Result<Estimate> {
    if samples.is_empty() {
        return Err(Error::EmptySample);
    }
    let mut hits = 0;
    for s in samples {
        if s.len() < thresholds.len() {
            return Err(Error::DimensionMismatch {
                expected: thresholds.len(),
                found: s.len(),
            });
        }
        if s.iter().zip(thresholds).all(|(j, t)| j > t) {
            hits += 1;
        }
    }
    Estimate::proportion(hits, samples.len())
}

/// `E g(L t)` for Lamperti `L`, for many times `t` at once.
///
/// The law of `L t` is Lamperti with rate `λ t^α`, so in the coordinate
/// `w = ln(x^α)` the expectation is `∫ g(e^{w/α}) f(w − ln λt^α) dw` with
/// the even density `f` of [`lamperti_v_range`]. `g` is tabulated once on a
/// uniform `w` grid covering every requested time; the trapezoid rule on
/// that grid converges geometrically since the integrand is analytic in a
/// strip.
struct LampertiTable<T> {
    alpha: f64,
    lambda: f64,
    w0: f64,
    dw: f64,
    half_width: f64,
    nodes: Vec<T>,
    t_range: (f64, f64),
}

impl<T: Integrand> LampertiTable<T> {
    fn new<F: Fn(f64) -> T>(
        alpha: f64,
        lambda: f64,
        tail_mass: f64,
        (t_min, t_max): (f64, f64),
        g: F,
    ) -> Self {
        let strip = (PI * (1.0 - alpha)).min(0.5 * PI * alpha);
        let dw = (strip / 8.0).min(0.05);
        let (_, half_width) = lamperti_v_range(alpha, tail_mass);
        let w_lo = lambda.ln() + alpha * t_min.ln() - half_width;
        let w_hi = lambda.ln() + alpha * t_max.ln() + half_width;
        let count = ((w_hi - w_lo) / dw).ceil() as usize + 1;
        let nodes = (0..count)
            .map(|k| g(((w_lo + k as f64 * dw) / alpha).exp()))
            .collect();
        Self {
            alpha,
            lambda,
            w0: w_lo,
            dw,
            half_width,
            nodes,
            t_range: (t_min, t_max),
        }
    }

    fn at(&self, t: f64) -> Result<T> {
        let (lo, hi) = self.t_range;
        if t < lo * (1.0 - 1e-12) || t > hi * (1.0 + 1e-12) {
            return Err(domain(format!("time {t} outside the prepared range [{lo}, {hi}]")));
        }
        let centre = self.lambda.ln() + self.alpha * t.ln();
        let c = (PI * self.alpha).sin() / (PI * self.alpha);
        let cos_pa = (PI * self.alpha).cos();
        let first = ((centre - self.half_width - self.w0) / self.dw).floor().max(0.0) as usize;
        let last = (((centre + self.half_width - self.w0) / self.dw).ceil() as usize).min(self.nodes.len() - 1);
        let mut acc = self.nodes[0].zero_like();
        for k in first..=last {
            let v = self.w0 + k as f64 * self.dw - centre;
            let f = c / (2.0 * v.cosh() + 2.0 * cos_pa);
            acc.axpy(f * self.dw, &self.nodes[k]);
        }
        Ok(acc)
    }
}

fn check_time_range(t_min: f64, t_max: f64) -> Result<()> {
    if !(t_min > 0.0 && t_max >= t_min && t_max.is_finite()) {
        return Err(domain(format!("invalid time range [{t_min}, {t_max}]")));
    }
    Ok(())
}

/// Mixture transition matrices `∫ exp(G l t) ν(dl)` with `G = P − I`. For
/// Lamperti mixing the semigroup is tabulated once and reused across times.
pub struct ParaTransitionSolver {
    generator: GeneratorMatrix,
    mixing: MixingMeasure,
    table: Option<LampertiTable<DMatrix<f64>>>,
}

impl ParaTransitionSolver {
    /// Prepares evaluation for times in `[t_min, t_max]`.
    pub fn new(p: &TransitionMatrix, spec: &SurvivalSpec, t_min: f64, t_max: f64) -> Result<Self> {
        spec.mixing.validate()?;
        check_time_range(t_min, t_max)?;
        let generator = p.generator();
        let table = match spec.mixing {
            MixingMeasure::Lamperti { alpha, lambda } => {
                let u = p.matrix();
                Some(LampertiTable::new(
                    alpha,
                    lambda,
                    spec.budget.tail_mass,
                    (t_min, t_max),
                    |s| expm_uniformized(u, 1.0, s),
                ))
            }
            _ => None,
        };
        Ok(Self {
            generator,
            mixing: spec.mixing.clone(),
            table,
        })
    }

    pub fn at(&self, t: f64) -> Result<DMatrix<f64>> {
        if !(t >= 0.0) {
            return Err(domain(format!("time must be non-negative, got {t}")));
        }
        let n = self.generator.states();
        if t == 0.0 {
            return Ok(DMatrix::identity(n, n));
        }
        match &self.mixing {
            MixingMeasure::PointMass { lambda } => Ok(self.generator.exp(lambda * t)),
            MixingMeasure::DiscreteAtoms(atoms) => {
                let mut acc = DMatrix::zeros(n, n);
                for &(l, w) in atoms {
                    acc += self.generator.exp(l * t) * w;
                }
                Ok(acc)
            }
            MixingMeasure::Lamperti { .. } => self.table.as_ref().expect("table built for Lamperti").at(t),
        }
    }
}

/// Counting pmfs `P(N(t) = k)`, `k ≤ k_max`, for many times. For Lamperti
/// mixing the Poisson pmfs are tabulated once, as for
/// [`ParaTransitionSolver`].
pub struct CountingPmfSolver {
    spec: SurvivalSpec,
    k_max: usize,
    table: Option<LampertiTable<Vec<f64>>>,
}

impl CountingPmfSolver {
    pub fn new(spec: &SurvivalSpec, k_max: usize, t_min: f64, t_max: f64) -> Result<Self> {
        spec.mixing.validate()?;
        check_time_range(t_min, t_max)?;
        let table = match spec.mixing {
            MixingMeasure::Lamperti { alpha, lambda } => {
                let ln_fact = ln_factorials(k_max);
                Some(LampertiTable::new(
                    alpha,
                    lambda,
                    spec.budget.tail_mass,
                    (t_min, t_max),
                    |x| poisson_pmf(x, &ln_fact),
                ))
            }
            _ => None,
        };
        Ok(Self {
            spec: spec.clone(),
            k_max,
            table,
        })
    }

    pub fn at(&self, t: f64) -> Result<Vec<f64>> {
        match &self.table {
            Some(tab) if t > 0.0 => tab.at(t),
            _ => counting_pmf(&self.spec, t, self.k_max),
        }
    }
}

/// `∫ exp(G l t) ν(dl)` with the unit-rate generator `G = P − I`.
pub fn para_transition_matrix(
    p: &TransitionMatrix,
    spec: &SurvivalSpec,
    t: f64,
) -> Result<DMatrix<f64>> {
    if t == 0.0 {
        return Ok(DMatrix::identity(p.states(), p.states()));
    }
    ParaTransitionSolver::new(p, spec, t, t)?.at(t)
}

/// Writes paths as CSV rows `path_id,epoch,state`. Each path starts with a
/// row at epoch 0 carrying the initial state.
pub fn write_paths_csv<W: Write>(out: &mut W, paths: &[JumpPath]) -> Result<()> {
    writeln!(out, "path_id,epoch,state")?;
    for (id, p) in paths.iter().enumerate() {
        writeln!(out, "{id},{:.16e},{}", 0.0, p.states[0])?;
        for (e, s) in p.epochs.iter().zip(&p.states[1..]) {
            writeln!(out, "{id},{e:.16e},{s}")?;
        }
    }
    Ok(())
}
