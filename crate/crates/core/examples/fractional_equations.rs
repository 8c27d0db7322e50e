//! Residuals of the fractional evolution equations: the Caputo eigenvalue
//! equation of the Mittag-Leffler survival, the difference-differential
//! system of the counting pmf, and the non-local matrix equation of a
//! para-Markov chain.
//!
//!     cargo run --release --example fractional_equations

use paramarkov::operators::{eigenfunction_report, fcaa_report, governing_residual, ResidualGrid};
use paramarkov::processes::TransitionMatrix;
use paramarkov::specfun::{MLParams, SurvivalSpec};

fn main() -> paramarkov::Result<()> {
    let p = MLParams::new(0.5, 1.0)?;
    let grid = ResidualGrid::new(1e-3, 0.1, 2.0)?;
    println!("{}", eigenfunction_report(p, grid, 0.02)?.to_json());
    println!("{}", fcaa_report(p, 1.0, 1e-3, 20, 0.02)?.to_json());

    let chain = TransitionMatrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]])?;
    let spec = SurvivalSpec::mittag_leffler(p);
    let r = governing_residual(&chain, &spec, ResidualGrid::new(1e-3, 0.2, 2.0)?)?;
    println!(
        "governing: literal {:.3e}, on the range of G {:.3e}, stationary part {:.3e}",
        r.literal, r.range, r.stationary_defect
    );
    Ok(())
}
