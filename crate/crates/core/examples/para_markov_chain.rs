//! A three-state para-Markov chain: transition matrices from the mixture
//! of semigroups against the empirical state distribution of simulated
//! paths, and the paths written as CSV.
//!
//!     cargo run --release --example para_markov_chain

use paramarkov::processes::{para_transition_matrix, simulate_para_markov_chain, write_paths_csv, TransitionMatrix};
use paramarkov::sampling::RngStream;
use paramarkov::specfun::{MLParams, SurvivalSpec};

fn main() -> paramarkov::Result<()> {
    let p = TransitionMatrix::from_rows(&[
        vec![0.1, 0.6, 0.3],
        vec![0.5, 0.0, 0.5],
        vec![0.2, 0.7, 0.1],
    ])?;
    let spec = SurvivalSpec::mittag_leffler(MLParams::new(0.6, 1.0)?);
    let t = 2.0;
    let exact = para_transition_matrix(&p, &spec, t)?;

    let runs = 20_000;
    let root = RngStream::new(11, 0);
    let mut counts = [0usize; 3];
    let mut sample = Vec::new();
    for i in 0..runs {
        let path = simulate_para_markov_chain(&p, &spec, 0, t, &mut root.substream(i))?;
        counts[path.state_at(t)] += 1;
        if i < 3 {
            sample.push(path);
        }
    }
    println!("state  P(t)[0, j]       empirical");
    for j in 0..3 {
        println!("{j:>5}  {:.6}   {:.6}", exact[(0, j)], counts[j] as f64 / runs as f64);
    }

    let mut out = std::io::stdout().lock();
    write_paths_csv(&mut out, &sample)?;
    Ok(())
}
