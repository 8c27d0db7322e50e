//! Exact samplers checked against their distribution functions with the
//! Kolmogorov-Smirnov test.
//!
//!     cargo run --release --example samplers

use paramarkov::sampling::{sample_lamperti, sample_ml_waiting_time, RngStream};
use paramarkov::specfun::{lamperti_cdf, ml_survival, MLParams};
use paramarkov::stats::ks_test;

fn main() -> paramarkov::Result<()> {
    let n = 50_000;
    let (alpha, lambda) = (0.7, 1.0);

    let mut rng = RngStream::new(7, 0);
    let mut rates = (0..n)
        .map(|_| sample_lamperti(alpha, lambda, &mut rng))
        .collect::<paramarkov::Result<Vec<_>>>()?;
    rates.sort_by(f64::total_cmp);
    let ks = ks_test(&rates, |s| lamperti_cdf(alpha, lambda, s).unwrap())?;
    println!("Lamperti({alpha}, {lambda}): D = {:.4e}, p = {:.3}", ks.statistic, ks.p_value);

    let p = MLParams::new(alpha, lambda)?;
    let mut rng = RngStream::new(7, 1);
    let mut waits = (0..n)
        .map(|_| sample_ml_waiting_time(p, &mut rng))
        .collect::<paramarkov::Result<Vec<_>>>()?;
    waits.sort_by(f64::total_cmp);
    let ks = ks_test(&waits, |t| 1.0 - ml_survival(p, t).unwrap())?;
    println!("Mittag-Leffler waiting time: D = {:.4e}, p = {:.3}", ks.statistic, ks.p_value);

    println!("median wait {:.4}, 99% quantile {:.1}", waits[n / 2], waits[n * 99 / 100]);
    Ok(())
}
