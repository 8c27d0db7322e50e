//! Random variates: exponential, one-sided stable, Lamperti, Mittag-Leffler
//! waiting times and inverse stable time changes.
//!
//! Every sampler draws from an [`RngStream`], a ChaCha8 keystream addressed
//! by `(seed, stream)`. Distinct stream indices give independent sequences
//! without any state handoff, so parallel workers can each own one.

use std::f64::consts::PI;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::Result;
use crate::specfun::{check_alpha_closed, check_alpha_open, check_rate, MLParams, MixingMeasure};

#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    stream: u64,
    inner: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(seed);
        inner.set_stream(stream);
        Self {
            seed,
            stream,
            inner,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    /// A fresh stream under the same seed.
    pub fn substream(&self, stream: u64) -> Self {
        Self::new(self.seed, stream)
    }

    /// Uniform on the open interval (0,1): the 53-bit grid shifted by half a
    /// step, so neither endpoint can occur.
    pub fn uniform_open(&mut self) -> f64 {
        ((self.inner.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
    }

    pub fn standard_normal(&mut self) -> f64 {
        StandardNormal.sample(self)
    }

    /// Unit-rate exponential.
    pub fn exp1(&mut self) -> f64 {
        -self.uniform_open().ln()
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.inner.fill_bytes(dst)
    }
}

/// `−ln(U) / rate`.
pub fn sample_exponential(rate: f64, rng: &mut RngStream) -> Result<f64> {
    check_rate(rate)?;
    Ok(rng.exp1() / rate)
}

/// One-sided stable variate with `E e^{-ηS} = e^{-η^α}` (Kanter's
/// representation).
pub fn sample_positive_stable(alpha: f64, rng: &mut RngStream) -> Result<f64> {
    check_alpha_open(alpha)?;
    Ok(positive_stable(alpha, rng))
}

pub(crate) fn positive_stable(alpha: f64, rng: &mut RngStream) -> f64 {
    let u = PI * rng.uniform_open();
    let w = rng.exp1();
    let a = (alpha * u).sin() / u.sin().powf(1.0 / alpha);
    let b = (((1.0 - alpha) * u).sin() / w).powf((1.0 - alpha) / alpha);
    a * b
}

/// Lamperti variate as the scaled ratio of two independent stable draws.
pub fn sample_lamperti(alpha: f64, lambda: f64, rng: &mut RngStream) -> Result<f64> {
    check_alpha_open(alpha)?;
    check_rate(lambda)?;
    Ok(lamperti(alpha, lambda, rng))
}

fn lamperti(alpha: f64, lambda: f64, rng: &mut RngStream) -> f64 {
    let s1 = positive_stable(alpha, rng);
    let s2 = positive_stable(alpha, rng);
    lambda.powf(1.0 / alpha) * s1 / s2
}

/// Draw of the mixing variable `L`.
pub fn sample_mixing(mixing: &MixingMeasure, rng: &mut RngStream) -> f64 {
    match mixing {
        MixingMeasure::Lamperti { alpha, lambda } => lamperti(*alpha, *lambda, rng),
        MixingMeasure::PointMass { lambda } => *lambda,
        MixingMeasure::DiscreteAtoms(atoms) => {
            let u = rng.uniform_open();
            let mut acc = 0.0;
            for &(l, w) in atoms {
                acc += w;
                if u < acc {
                    return l;
                }
            }
            atoms[atoms.len() - 1].0
        }
    }
}

/// Mittag-Leffler waiting time `W / L` with fresh `W ~ Exp(1)` and
/// `L ~ Lamperti(α, λ)`; exponential when `α = 1`.
pub fn sample_ml_waiting_time(p: MLParams, rng: &mut RngStream) -> Result<f64> {
    check_alpha_closed(p.alpha)?;
    check_rate(p.lambda)?;
    if p.alpha == 1.0 {
        return Ok(rng.exp1() / p.lambda);
    }
    let l = lamperti(p.alpha, p.lambda, rng);
    Ok(rng.exp1() / l)
}

/// Single-time marginal `(t / S)^α` of the inverse stable subordinator.
pub fn sample_inverse_stable(alpha: f64, t: f64, rng: &mut RngStream) -> Result<f64> {
    check_alpha_open(alpha)?;
    if !(t >= 0.0) {
        return Err(crate::error::domain(format!(
            "time must be non-negative, got {t}"
        )));
    }
    let s = positive_stable(alpha, rng);
    if t == 0.0 {
        return Ok(0.0);
    }
    Ok((t / s).powf(alpha))
}
