//! Waiting times driven by a multivariate stable process: the closed-form
//! joint characteristic function against Monte Carlo, for a family read
//! from JSON.
//!
//!     cargo run --release --example stable_waiting_times

use paramarkov::sampling::RngStream;
use paramarkov::stablelaw::{ml_charfn, waiting_charfn_mc, waiting_charfn_product, SpectralFamily};

fn main() -> paramarkov::Result<()> {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/examples/data/dependent_family.json");
    let dependent = SpectralFamily::load(path)?;
    let independent = SpectralFamily::independent_increments(dependent.alpha(), 2)?;
    let lambda = 1.0;
    let rng = RngStream::new(5, 0);
    for (name, fam) in [("independent", &independent), ("dependent", &dependent)] {
        println!("{name}:");
        for (i, xi) in [[0.5, 1.0], [1.0, -1.0], [-2.0, 0.5]].iter().enumerate() {
            let exact = waiting_charfn_product(fam, lambda, xi)?;
            let mc = waiting_charfn_mc(fam, lambda, xi, &rng.substream(i as u64), 50_000)?;
            println!("  xi = {xi:?}: {exact:.5}  mc {:.5}  z = {:.2}", mc.value, mc.z_score(exact));
        }
    }
    let a = dependent.alpha();
    let product = ml_charfn(a, lambda, 0.5)? * ml_charfn(a, lambda, 1.0)?;
    println!("product of Mittag-Leffler factors at (0.5, 1): {product:.5}");
    Ok(())
}
