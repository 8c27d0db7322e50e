//! `exp(G s)` for a generator `G = Λ(P − I)` by uniformization, with
//! squaring for large `Λ s`.

use nalgebra::DMatrix;

/// Poisson-tail mass left out of the uniformization series.
const TRUNCATION_MASS: f64 = 1e-12;
/// Largest `Λ s` handled by a single series.
const DIRECT_LIMIT: f64 = 16.0;

/// Smallest `K` with `P(Poisson(x) > K) < mass`, from the Chernoff bound
/// `P(N ≥ k) ≤ e^{-x} (e x / k)^k` for `k > x`.
pub(crate) fn chernoff_truncation(x: f64, mass: f64) -> usize {
    if x == 0.0 {
        return 0;
    }
    let ln_mass = mass.ln();
    let mut k = x.floor() as usize + 1;
    loop {
        let kf = k as f64;
        let ln_bound = -x + kf * (1.0 + x.ln() - kf.ln());
        if ln_bound < ln_mass {
            return k;
        }
        k += 1;
    }
}

/// `e^{-x} Σ_{k ≤ K} x^k / k! · P^k`.
fn uniformized(p: &DMatrix<f64>, x: f64) -> DMatrix<f64> {
    let n = p.nrows();
    let k_max = chernoff_truncation(x, TRUNCATION_MASS);
    let mut weight = (-x).exp();
    let mut power = DMatrix::<f64>::identity(n, n);
    let mut acc = &power * weight;
    for k in 1..=k_max {
        power = &power * p;
        weight *= x / k as f64;
        acc += &power * weight;
    }
    acc
}

/// Semigroup `exp(G s)` for the generator with uniformized chain `p` and
/// rate `rate`, so that `G = rate · (p − I)`. A sub-stochastic `p` (a
/// killed chain) is allowed; rows are renormalized only when `p` is
/// stochastic.
pub(crate) fn expm_uniformized(p: &DMatrix<f64>, rate: f64, s: f64) -> DMatrix<f64> {
    let n = p.nrows();
    let stochastic = p.row_iter().all(|r| (r.sum() - 1.0).abs() < 1e-12);
    let finish = |m: DMatrix<f64>| if stochastic { normalize_rows(m) } else { m };
    let x = rate * s;
    if x == 0.0 {
        return DMatrix::identity(n, n);
    }
    if x <= DIRECT_LIMIT {
        return finish(uniformized(p, x));
    }
    let squarings = (x / DIRECT_LIMIT).log2().ceil() as i32;
    let mut e = uniformized(p, x / 2f64.powi(squarings));
    for _ in 0..squarings {
        let next = &e * &e;
        // once the semigroup has reached its limiting projector, further
        // squaring only accumulates rounding
        let converged = (&next - &e).amax() < 1e-15;
        e = next;
        if converged {
            break;
        }
    }
    finish(e)
}

fn normalize_rows(mut m: DMatrix<f64>) -> DMatrix<f64> {
    for mut row in m.row_iter_mut() {
        let s: f64 = row.iter().sum();
        if s > 0.0 {
            row /= s;
        }
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_state_closed_form() {
        let p = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        for &s in &[0.0, 0.3, 1.0, 5.0, 17.0, 300.0, 1e9] {
            let e = expm_uniformized(&p, 1.0, s);
            let want = 0.5 * (1.0 + (-2.0 * s).exp());
            assert!((e[(0, 0)] - want).abs() < 1e-12, "s={s}: {}", e[(0, 0)]);
            assert!((e[(0, 1)] - (1.0 - want)).abs() < 1e-12);
        }
    }

    #[test]
    fn chernoff_is_conservative() {
        for &x in &[0.5, 3.0, 16.0] {
            let k = chernoff_truncation(x, 1e-12);
            // exact tail beyond k
            let mut w = (-x).exp();
            let mut cdf = w;
            for j in 1..=k {
                w *= x / j as f64;
                cdf += w;
            }
            assert!(1.0 - cdf < 1e-12);
        }
        assert_eq!(chernoff_truncation(0.0, 1e-12), 0);
    }

    #[test]
    fn killed_chain_decays() {
        let p = DMatrix::from_row_slice(1, 1, &[0.0]);
        for &s in &[0.5, 3.0, 40.0] {
            let e = expm_uniformized(&p, 2.0, s);
            assert!((e[(0, 0)] - (-2.0 * s).exp()).abs() < 1e-13);
        }
    }

    #[test]
    fn semigroup_property() {
        let p = DMatrix::from_row_slice(3, 3, &[0.2, 0.5, 0.3, 0.1, 0.1, 0.8, 0.6, 0.4, 0.0]);
        let a = expm_uniformized(&p, 2.0, 3.0);
        let b = expm_uniformized(&p, 2.0, 7.0);
        let ab = expm_uniformized(&p, 2.0, 10.0);
        assert!((&a * &b - ab).amax() < 1e-11);
    }
}
