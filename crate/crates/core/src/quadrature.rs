//! Adaptive Simpson and log-coordinate trapezoid rules shared by the law
//! evaluations.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Values that can be integrated: a vector space with a sup-type norm.
pub(crate) trait Integrand: Clone {
    fn zero_like(&self) -> Self;
    fn axpy(&mut self, a: f64, x: &Self);
    fn norm(&self) -> f64;
}

impl Integrand for f64 {
    fn zero_like(&self) -> Self {
        0.0
    }
    fn axpy(&mut self, a: f64, x: &Self) {
        *self += a * x;
    }
    fn norm(&self) -> f64 {
        self.abs()
    }
}

impl Integrand for Complex64 {
    fn zero_like(&self) -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn axpy(&mut self, a: f64, x: &Self) {
        *self += x * a;
    }
    fn norm(&self) -> f64 {
        self.re.abs().max(self.im.abs())
    }
}

impl Integrand for Vec<f64> {
    fn zero_like(&self) -> Self {
        vec![0.0; self.len()]
    }
    fn axpy(&mut self, a: f64, x: &Self) {
        for (s, v) in self.iter_mut().zip(x) {
            *s += a * v;
        }
    }
    fn norm(&self) -> f64 {
        self.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

impl Integrand for DMatrix<f64> {
    fn zero_like(&self) -> Self {
        DMatrix::zeros(self.nrows(), self.ncols())
    }
    fn axpy(&mut self, a: f64, x: &Self) {
        *self += x * a;
    }
    fn norm(&self) -> f64 {
        self.amax()
    }
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct SimpsonRule {
    /// Absolute tolerance over the whole interval.
    pub tol: f64,
    /// Initial number of equal panels; adaptivity happens inside each.
    pub panels: usize,
    pub max_depth: u32,
}

impl Default for SimpsonRule {
    fn default() -> Self {
        Self {
            tol: 1e-12,
            panels: 32,
            max_depth: 40,
        }
    }
}

struct Pending<T> {
    a: f64,
    b: f64,
    fa: T,
    fm: T,
    fb: T,
    whole: T,
    tol: f64,
    depth: u32,
}

fn simpson<T: Integrand>(a: f64, b: f64, fa: &T, fm: &T, fb: &T) -> T {
    let h = (b - a) / 6.0;
    let mut s = fa.zero_like();
    s.axpy(h, fa);
    s.axpy(4.0 * h, fm);
    s.axpy(h, fb);
    s
}

impl SimpsonRule {
    pub fn with_tol(tol: f64) -> Self {
        Self {
            tol,
            ..Self::default()
        }
    }

    pub fn panels(mut self, panels: usize) -> Self {
        self.panels = panels.max(1);
        self
    }

    /// Integrates `f` over `[a, b]`. Returns the estimate or a
    /// non-convergence error carrying the achieved error bound.
    pub fn integrate<T, F>(&self, f: F, a: f64, b: f64) -> Result<T>
    where
        T: Integrand,
        F: Fn(f64) -> T,
    {
        let (value, err) = self.integrate_with_error(&f, a, b);
        if err > self.tol {
            return Err(Error::Quadrature {
                achieved: err,
                requested: self.tol,
            });
        }
        Ok(value)
    }

    fn integrate_with_error<T, F>(&self, f: &F, a: f64, b: f64) -> (T, f64)
    where
        T: Integrand,
        F: Fn(f64) -> T,
    {
        let width = (b - a) / self.panels as f64;
        let mut total: Option<T> = None;
        let mut unresolved = 0.0;
        let mut stack: Vec<Pending<T>> = Vec::new();
        let mut fa = f(a);
        for p in 0..self.panels {
            let lo = a + p as f64 * width;
            let hi = if p + 1 == self.panels { b } else { lo + width };
            let fm = f(0.5 * (lo + hi));
            let fb = f(hi);
            let whole = simpson(lo, hi, &fa, &fm, &fb);
            stack.push(Pending {
                a: lo,
                b: hi,
                fa: fa.clone(),
                fm,
                fb: fb.clone(),
                whole,
                tol: self.tol / self.panels as f64,
                depth: 0,
            });
            fa = fb;
        }
        while let Some(seg) = stack.pop() {
            let m = 0.5 * (seg.a + seg.b);
            let lm = f(0.5 * (seg.a + m));
            let rm = f(0.5 * (m + seg.b));
            let left = simpson(seg.a, m, &seg.fa, &lm, &seg.fm);
            let right = simpson(m, seg.b, &seg.fm, &rm, &seg.fb);
            let mut refined = left.clone();
            refined.axpy(1.0, &right);
            let mut diff = refined.clone();
            diff.axpy(-1.0, &seg.whole);
            let err = diff.norm() / 15.0;
            if err <= seg.tol || seg.depth >= self.max_depth || (seg.b - seg.a) < 1e-300 {
                if err > seg.tol {
                    unresolved += err;
                }
                // Richardson extrapolation
                refined.axpy(1.0 / 15.0, &diff);
                match total.as_mut() {
                    Some(t) => t.axpy(1.0, &refined),
                    None => total = Some(refined),
                }
                continue;
            }
            stack.push(Pending {
                a: seg.a,
                b: m,
                fa: seg.fa,
                fm: lm,
                fb: seg.fm.clone(),
                whole: left,
                tol: 0.5 * seg.tol,
                depth: seg.depth + 1,
            });
            stack.push(Pending {
                a: m,
                b: seg.b,
                fa: seg.fm,
                fm: rm,
                fb: seg.fb,
                whole: right,
                tol: 0.5 * seg.tol,
                depth: seg.depth + 1,
            });
        }
        (total.expect("at least one panel"), unresolved)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simpson_polynomial_and_exponential() {
        let rule = SimpsonRule::with_tol(1e-13);
        let v: f64 = rule.integrate(|x| x * x * x, 0.0, 2.0).unwrap();
        assert!((v - 4.0).abs() < 1e-13);
        let v: f64 = rule.integrate(|x: f64| (-x).exp(), 0.0, 40.0).unwrap();
        assert!((v - (1.0 - (-40.0f64).exp())).abs() < 1e-12);
    }

    #[test]
    fn simpson_complex_and_vector() {
        let rule = SimpsonRule::with_tol(1e-12);
        let v: Complex64 = rule
            .integrate(|x| Complex64::new(0.0, x).exp(), 0.0, std::f64::consts::PI)
            .unwrap();
        assert!((v - Complex64::new(0.0, 2.0)).norm() < 1e-11);
        let v: Vec<f64> = rule.integrate(|x| vec![1.0, x], 0.0, 1.0).unwrap();
        assert!((v[0] - 1.0).abs() < 1e-14 && (v[1] - 0.5).abs() < 1e-14);
    }

    #[test]
    fn simpson_reports_nonconvergence() {
        let rule = SimpsonRule {
            tol: 1e-14,
            panels: 1,
            max_depth: 3,
        };
        let r: Result<f64> = rule.integrate(|x: f64| x.sqrt().sin() / x.sqrt(), 1e-12, 1.0);
        assert!(matches!(r, Err(Error::Quadrature { .. })));
    }
}
