//! A random walk whose jump epochs follow a para-Markov counting process,
//! rescaled in space and time, against its Brownian limit with a random
//! clock.
//!
//!     cargo run --release --example anomalous_diffusion

use paramarkov::limits::{convergence_report, JumpLaw, TimeGrid};
use paramarkov::sampling::RngStream;
use paramarkov::specfun::{MLParams, SurvivalSpec};

fn main() -> paramarkov::Result<()> {
    let spec = SurvivalSpec::mittag_leffler(MLParams::new(0.5, 1.0)?);
    let grid = TimeGrid::new(vec![0.5, 1.0])?;
    let xi = vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![1.0, 1.0], vec![-1.0, 2.0]];
    let report = convergence_report(&spec, JumpLaw::Rademacher, &grid, &xi, &[10, 100, 1000], 20_000, &RngStream::new(9, 0))?;
    for (n, dev) in &report.max_deviation {
        println!("n = {n:>5}: max |ecf - limit| = {dev:.4e}");
    }
    println!("trend ok: {}", report.trend_ok);
    report.write_csv(&mut std::io::stdout().lock(), &grid)?;
    Ok(())
}
