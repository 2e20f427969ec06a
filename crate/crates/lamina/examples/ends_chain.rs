//! The ends chain: the number of boundary arcs of the fragment containing a
//! fixed point jumps from k to a uniform value in {1, ..., k+1}. Compare a
//! simulated trajectory and its exact one-step means, then check the law
//! inside real figela runs.
//!
//! Usage: cargo run --release --example ends_chain -- [steps] [seed]

use lamina::analysis::{child_ends_chi_square, ends_chain, ends_one_step_mean};
use lamina::engine::{simulate, EngineConfig, StopRule};

fn main() -> lamina::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let steps: usize = args.first().map_or(30, |s| s.parse().expect("steps"));
    let seed: u64 = args.get(1).map_or(19, |s| s.parse().expect("seed"));

    let chain = ends_chain(steps, 1, seed)?;
    println!("trajectory from state 1 ({steps} steps, seed {seed}):");
    println!("  {:?}", chain.trajectory);

    println!("exact one-step means from small states:");
    for k in 1..=6 {
        let (num, den) = ends_one_step_mean(k);
        println!("  from {k}: {num}/{den} = {:.4}", num as f64 / den as f64);
    }

    // Pool splits from a few independent runs and chi-square the child
    // ends against uniform on {1, ..., parent + 1}.
    let figelas: Vec<_> = (0..20)
        .map(|i| {
            let cfg = EngineConfig::new(1.0, StopRule::TMax(60.0), seed.wrapping_add(i));
            Ok(simulate(&cfg, &[])?.figela)
        })
        .collect::<lamina::Result<_>>()?;
    let p = child_ends_chi_square(&figelas, 8)?;
    println!("child-ends chi-square over 20 runs: p = {p:.3}");
    Ok(())
}
