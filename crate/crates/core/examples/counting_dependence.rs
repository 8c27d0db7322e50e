//! The para-Markov counting process: its mixed-Poisson pmf, and the
//! dependence between waiting times that separates it from the renewal
//! process with the same Mittag-Leffler marginals.
//!
//!     cargo run --release --example counting_dependence

use paramarkov::processes::{
    counting_pmf, empirical_joint_survival, para_markov_waiting_times, renewal_waiting_times, schur_joint_survival,
};
use paramarkov::sampling::RngStream;
use paramarkov::specfun::{MLParams, SurvivalSpec};

fn main() -> paramarkov::Result<()> {
    let p = MLParams::new(0.5, 1.0)?;
    let spec = SurvivalSpec::mittag_leffler(p);

    let pmf = counting_pmf(&spec, 1.0, 8)?;
    for (k, q) in pmf.iter().enumerate() {
        println!("P(N(1) = {k}) = {q:.6}");
    }

    // P(J1 > 1, J2 > 1): S(2) under the shared random rate, S(1)^2 for
    // independent waits
    let n = 100_000;
    let mut rng = RngStream::new(3, 0);
    let para: Vec<Vec<f64>> = (0..n).map(|_| para_markov_waiting_times(&spec, 2, &mut rng)).collect();
    let renewal = (0..n)
        .map(|_| renewal_waiting_times(p, 2, &mut rng))
        .collect::<paramarkov::Result<Vec<_>>>()?;
    let exact = schur_joint_survival(&spec, &[1.0, 1.0])?;
    let a = empirical_joint_survival(&para, &[1.0, 1.0])?;
    let b = empirical_joint_survival(&renewal, &[1.0, 1.0])?;
    let s1 = schur_joint_survival(&spec, &[1.0])?;
    println!("para-Markov  {:.4} ± {:.4}  (S(2) = {exact:.4})", a.value, a.se);
    println!("renewal      {:.4} ± {:.4}  (S(1)^2 = {:.4})", b.value, b.se, s1 * s1);
    Ok(())
}
