//! Increasing α-stable vectors with finite signed spectral measures, and the
//! joint laws of the waiting times they induce.
//!
//! A family is given by signed atom lists `ν_1, …, ν_n` on the increasing
//! cone of the unit sphere. At times `t_1 < … < t_n` the spectral measure is
//! `Γ_t = Σ_j t_j^{Hα} ν_j`, and the vector `(σ(t_1), …, σ(t_n))` has
//! characteristic function `exp{−∫ (−i⟨ξ, s⟩)^α Γ_t(ds)}`.
//!
//! The waiting times are `J = A_n σ(B_n w)` with i.i.d. `w_k ~ Exp(λ)`, so
//! that `E e^{i⟨ξ,J⟩} = E exp{−∫ (−i⟨A_nᵀξ, s⟩)^α Γ_{B_n w}(ds)}`.

use std::f64::consts::PI;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::quadrature::SimpsonRule;
use crate::sampling::RngStream;
use crate::specfun::{check_alpha_closed, check_alpha_open, check_rate};
use crate::stats::EcfEstimate;

/// Monte Carlo work is split into this many streams regardless of the
/// thread count, so estimates are reproducible bit for bit.
pub const MC_CHUNKS: u64 = 64;

const UNIT_TOL: f64 = 1e-12;

/// Signed point mass `w δ_s` on the increasing cone of the unit sphere.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralAtom {
    pub s: Vec<f64>,
    pub w: f64,
}

impl SpectralAtom {
    pub fn new(s: Vec<f64>, w: f64) -> Result<Self> {
        let atom = Self { s, w };
        atom.validate()?;
        Ok(atom)
    }

    fn validate(&self) -> Result<()> {
        if self.s.is_empty() || !self.w.is_finite() {
            return Err(Error::Spectral("atom needs a direction and a finite weight".into()));
        }
        if self.s.iter().any(|&x| !(x >= 0.0)) {
            return Err(Error::Spectral(format!("direction {:?} has a negative coordinate", self.s)));
        }
        if self.s.windows(2).any(|p| p[1] < p[0]) {
            return Err(Error::Spectral(format!("direction {:?} is not non-decreasing", self.s)));
        }
        let norm = self.s.iter().map(|x| x * x).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > UNIT_TOL {
            return Err(Error::Spectral(format!("direction {:?} has norm {norm}", self.s)));
        }
        Ok(())
    }
}

#[derive(Deserialize)]
struct RawFamily {
    alpha: f64,
    hurst: f64,
    nu: Vec<Vec<SpectralAtom>>,
}

/// Signed measures `ν_1, …, ν_n` with index `alpha` and Hurst index `hurst`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectralFamily {
    alpha: f64,
    hurst: f64,
    nu: Vec<Vec<SpectralAtom>>,
    /// distinct directions across all `ν_j`
    #[serde(skip)]
    directions: Vec<Vec<f64>>,
    /// `weights[j][m]`: mass of `ν_j` at `directions[m]`
    #[serde(skip)]
    weights: Vec<Vec<f64>>,
}

impl SpectralFamily {
    /// Validates the atoms and the marginal condition
    /// `𝓘_j(ξ e_k) = 0` for `j ≠ k`, which makes `σ(t_k)` depend on `ν_k`
    /// alone.
    pub fn new(alpha: f64, hurst: f64, nu: Vec<Vec<SpectralAtom>>) -> Result<Self> {
        check_alpha_open(alpha)?;
        if !(hurst > 0.0 && hurst * alpha <= 1.0 + 1e-12) {
            return Err(Error::Spectral(format!(
                "Hurst index {hurst} outside (0, 1/α] for α = {alpha}"
            )));
        }
        let n = nu.len();
        if n == 0 {
            return Err(Error::Spectral("family needs at least one measure".into()));
        }
        let mut directions: Vec<Vec<f64>> = Vec::new();
        let mut weights = vec![Vec::new(); n];
        for (j, atoms) in nu.iter().enumerate() {
            for atom in atoms {
                atom.validate()?;
                if atom.s.len() != n {
                    return Err(Error::DimensionMismatch {
                        expected: n,
                        found: atom.s.len(),
                    });
                }
                let m = match directions
                    .iter()
                    .position(|d| d.iter().zip(&atom.s).all(|(a, b)| (a - b).abs() <= UNIT_TOL))
                {
                    Some(m) => m,
                    None => {
                        directions.push(atom.s.clone());
                        for w in weights.iter_mut() {
                            w.push(0.0);
                        }
                        directions.len() - 1
                    }
                };
                weights[j][m] += atom.w;
            }
        }
        let fam = Self {
            alpha,
            hurst,
            nu,
            directions,
            weights,
        };
        fam.check_marginals()?;
        Ok(fam)
    }

    /// Independent increments: `σ(t_k) − σ(t_{k−1})` is stable with scale
    /// `t_k − t_{k−1}`, so the waiting times are i.i.d. Mittag-Leffler.
    /// For `n = 2` the measures are `ν_1 = 2^{α/2} δ_{(1,1)/√2} − δ_{(0,1)}`
    /// and `ν_2 = δ_{(0,1)}`.
    pub fn independent_increments(alpha: f64, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(domain("dimension must be at least 1"));
        }
        // u_k: ones on coordinates k..n, normalized
        let u = |k: usize| {
            let c = 1.0 / ((n - k) as f64).sqrt();
            (0..n).map(|i| if i >= k { c } else { 0.0 }).collect::<Vec<_>>()
        };
        let nu = (0..n)
            .map(|j| {
                let mut atoms = vec![SpectralAtom {
                    s: u(j),
                    w: ((n - j) as f64).powf(alpha / 2.0),
                }];
                if j + 1 < n {
                    atoms.push(SpectralAtom {
                        s: u(j + 1),
                        w: -((n - j - 1) as f64).powf(alpha / 2.0),
                    });
                }
                atoms
            })
            .collect();
        Self::new(alpha, 1.0 / alpha, nu)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: RawFamily = serde_json::from_str(text)?;
        Self::new(raw.alpha, raw.hurst, raw.nu)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("family serializes")
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn hurst(&self) -> f64 {
        self.hurst
    }

    pub fn dimension(&self) -> usize {
        self.nu.len()
    }

    pub fn measures(&self) -> &[Vec<SpectralAtom>] {
        &self.nu
    }

    fn check_marginals(&self) -> Result<()> {
        let n = self.dimension();
        for j in 0..n {
            let scale: f64 = self.nu[j].iter().map(|a| a.w.abs()).sum::<f64>().max(1.0);
            for k in (0..n).filter(|&k| k != j) {
                for sign in [1.0, -1.0] {
                    let mut xi = vec![0.0; n];
                    xi[k] = sign;
                    let v = self.i_functional_unchecked(j, &xi);
                    if v.norm() > 1e-10 * scale {
                        return Err(Error::Spectral(format!(
                            "marginal condition fails: I_{}(±e_{}) = {v}",
                            j + 1,
                            k + 1
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    fn check_xi(&self, xi: &[f64]) -> Result<()> {
        if xi.len() != self.dimension() {
            return Err(Error::DimensionMismatch {
                expected: self.dimension(),
                found: xi.len(),
            });
        }
        Ok(())
    }

    /// Masses of `Γ_t` on the distinct directions, checked non-negative.
    fn assembled_weights(&self, times: &[f64]) -> Result<Vec<f64>> {
        let n = self.dimension();
        if times.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: times.len(),
            });
        }
        if times.iter().any(|&t| !(t >= 0.0 && t.is_finite())) {
            return Err(domain(format!("times must be non-negative, got {times:?}")));
        }
        let e = self.hurst * self.alpha;
        let scaled: Vec<f64> = times.iter().map(|t| t.powf(e)).collect();
        let mut out = vec![0.0; self.directions.len()];
        for (m, o) in out.iter_mut().enumerate() {
            let mut scale = 0.0;
            for j in 0..n {
                *o += scaled[j] * self.weights[j][m];
                scale += (scaled[j] * self.weights[j][m]).abs();
            }
            if *o < -1e-12 * scale.max(1e-300) {
                return Err(Error::NegativeMeasure { atom: m, mass: *o });
            }
            *o = o.max(0.0);
        }
        Ok(out)
    }

    fn exponent(&self, gamma_t: &[f64], xi: &[f64]) -> Complex64 {
        self.directions
            .iter()
            .zip(gamma_t)
            .map(|(d, &g)| g * alpha_power(dot(xi, d), self.alpha))
            .sum()
    }

    fn i_functional_unchecked(&self, j: usize, xi: &[f64]) -> Complex64 {
        self.nu[j]
            .iter()
            .map(|a| a.w * alpha_power(dot(xi, &a.s), self.alpha))
            .sum()
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `A_n = I − K_n` with `K_n` the lower shift, and `B_n` the lower
/// triangular matrix of ones. `A_n` turns partial sums into increments and
/// `B_n` is its inverse.
pub fn build_transform_matrices(n: usize) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    if n == 0 {
        return Err(domain("dimension must be at least 1"));
    }
    let a = DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            1.0
        } else if i == j + 1 {
            -1.0
        } else {
            0.0
        }
    });
    let b = DMatrix::from_fn(n, n, |i, j| if j <= i { 1.0 } else { 0.0 });
    Ok((a, b))
}

fn alpha_power(x: f64, alpha: f64) -> Complex64 {
    if x == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    let m = x.abs().powf(alpha);
    let phase = alpha * PI / 2.0;
    Complex64::new(m * phase.cos(), -x.signum() * m * phase.sin())
}

/// `(−ix)^α` on the principal branch,
/// `|x|^α (cos(απ/2) − i sign(x) sin(απ/2))`.
pub fn complex_alpha_power(x: f64, alpha: f64) -> Result<Complex64> {
    check_alpha_open(alpha)?;
    Ok(alpha_power(x, alpha))
}

/// `E e^{i⟨ξ, σ(t)⟩}` for increasing times `t`.
pub fn stable_vector_charfn(fam: &SpectralFamily, times: &[f64], xi: &[f64]) -> Result<Complex64> {
    fam.check_xi(xi)?;
    if times.windows(2).any(|p| p[1] < p[0]) {
        return Err(domain(format!("times must be increasing, got {times:?}")));
    }
    let g = fam.assembled_weights(times)?;
    Ok((-fam.exponent(&g, xi)).exp())
}

/// `𝓘_j(ξ) = ∫ (−i⟨ξ, s⟩)^α ν_j(ds)` with `j` counted from 0.
pub fn i_functional(fam: &SpectralFamily, j: usize, xi: &[f64]) -> Result<Complex64> {
    fam.check_xi(xi)?;
    if j >= fam.dimension() {
        return Err(domain(format!("measure index {j} out of range")));
    }
    Ok(fam.i_functional_unchecked(j, xi))
}

fn transformed_xi(xi: &[f64]) -> Result<Vec<f64>> {
    let (a, _) = build_transform_matrices(xi.len())?;
    Ok((a.transpose() * DVector::from_column_slice(xi)).iter().copied().collect())
}

/// Closed-form joint characteristic function of the waiting times when
/// `H = 1/α`: `Π_k λ / (λ + Σ_{j ≥ k} 𝓘_j(A_nᵀξ))`.
pub fn waiting_charfn_product(fam: &SpectralFamily, lambda: f64, xi: &[f64]) -> Result<Complex64> {
    check_rate(lambda)?;
    fam.check_xi(xi)?;
    if (fam.hurst * fam.alpha - 1.0).abs() > 1e-12 {
        return Err(domain(format!(
            "product formula needs H = 1/α, got H = {} with α = {}",
            fam.hurst, fam.alpha
        )));
    }
    let eta = transformed_xi(xi)?;
    let n = fam.dimension();
    let mut out = Complex64::new(1.0, 0.0);
    let mut tail = Complex64::new(0.0, 0.0);
    for k in (0..n).rev() {
        tail += fam.i_functional_unchecked(k, &eta);
        let denom = lambda + tail;
        if denom.norm() < 1e-300 {
            return Err(Error::Pole(denom.norm()));
        }
        out *= lambda / denom;
    }
    Ok(out)
}

/// Monte Carlo value of `E exp{−∫ (−i⟨A_nᵀξ, s⟩)^α Γ_{B_n w}(ds)}` over
/// `w ~ Exp(λ)^n`. Work is split over [`MC_CHUNKS`] substreams of `rng`;
/// the standard error comes from the sample variance of the conditional
/// characteristic function.
pub fn waiting_charfn_mc(
    fam: &SpectralFamily,
    lambda: f64,
    xi: &[f64],
    rng: &RngStream,
    paths: usize,
) -> Result<EcfEstimate> {
    check_rate(lambda)?;
    fam.check_xi(xi)?;
    if paths < 2 {
        return Err(Error::EmptySample);
    }
    let eta = transformed_xi(xi)?;
    let n = fam.dimension();
    let chunks: Vec<Result<(Complex64, f64, usize)>> = (0..MC_CHUNKS)
        .into_par_iter()
        .map(|c| {
            let count = chunk_len(paths, c);
            let mut r = rng.substream(rng.stream().wrapping_mul(MC_CHUNKS).wrapping_add(c));
            let mut times = vec![0.0; n];
            let (mut sum, mut sq) = (Complex64::new(0.0, 0.0), 0.0);
            for _ in 0..count {
                let mut acc = 0.0;
                for t in times.iter_mut() {
                    acc += r.exp1() / lambda;
                    *t = acc;
                }
                let g = fam.assembled_weights(&times)?;
                let z = (-fam.exponent(&g, &eta)).exp();
                sum += z;
                sq += z.norm_sqr();
            }
            Ok((sum, sq, count))
        })
        .collect();
    let (mut sum, mut sq) = (Complex64::new(0.0, 0.0), 0.0);
    for c in chunks {
        let (s, q, _) = c?;
        sum += s;
        sq += q;
    }
    Ok(sample_estimate(sum, sq, paths))
}

fn chunk_len(total: usize, c: u64) -> usize {
    let base = total / MC_CHUNKS as usize;
    base + usize::from((c as usize) < total % MC_CHUNKS as usize)
}

fn sample_estimate(sum: Complex64, sq: f64, n: usize) -> EcfEstimate {
    let nf = n as f64;
    let mean = sum / nf;
    let var = ((sq / nf - mean.norm_sqr()) * nf / (nf - 1.0)).max(0.0);
    EcfEstimate {
        value: mean,
        se: (var / nf).sqrt(),
        n,
    }
}

/// `E e^{iξ J_1} = λ ∫_0^∞ e^{−(−iξ)^α w^{Hα} − λw} dw`, the first waiting
/// time of an increasing `H`-sssi stable process.
pub fn hsssi_marginal_charfn(alpha: f64, hurst: f64, lambda: f64, xi: f64) -> Result<Complex64> {
    check_alpha_open(alpha)?;
    check_rate(lambda)?;
    let beta = hurst * alpha;
    if !(beta > 0.0 && beta <= 1.0 + 1e-12) {
        return Err(domain(format!("need 0 < Hα ≤ 1, got {beta}")));
    }
    if xi == 0.0 {
        return Ok(Complex64::new(1.0, 0.0));
    }
    let c = alpha_power(xi, alpha);
    if (beta - 1.0).abs() <= 1e-12 {
        return Ok(lambda / (lambda + c));
    }
    // w = e^u / λ
    let c = c * lambda.powf(-beta);
    SimpsonRule::with_tol(1e-12).panels(64).integrate(
        |u: f64| {
            let w = u.exp();
            (-(c * (beta * u).exp()) - w).exp() * w
        },
        (1e-17f64).ln(),
        45f64.ln(),
    )
}

/// Mittag-Leffler characteristic function `λ / (λ + (−iξ)^α)`.
pub fn ml_charfn(alpha: f64, lambda: f64, xi: f64) -> Result<Complex64> {
    check_alpha_closed(alpha)?;
    check_rate(lambda)?;
    Ok(lambda / (lambda + alpha_power(xi, alpha)))
}
