//! Test the recursive decomposition of the mass functional in distribution:
//! excising a uniform time interval and splicing in an independent copy,
//! with masses rescaled by the Malthusian exponent, leaves the law
//! unchanged; rescaling by a wrong exponent does not.
//!
//! Usage: cargo run --release --example self_similarity -- [replicas] [seed]

use lamina::analysis::self_similarity_test;

fn main() -> lamina::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let replicas: usize = args.first().map_or(3_000, |s| s.parse().expect("replicas"));
    let seed: u64 = args.get(1).map_or(29, |s| s.parse().expect("seed"));

    let grid = [0.3, 0.5, 0.7];
    let b = lamina::beta_star();
    let rep = self_similarity_test(400.0, &grid, replicas, seed, b)?;
    println!("{replicas} replicas per side at t = 400, seed {seed}");
    println!("composition exponent beta* = {b:.5}:");
    for p in &rep.per_t {
        println!("  r = {}: KS D = {:.4}, p = {:.3}", p.t, p.ks_stat, p.p_value);
    }
    println!("  branch counts (left / inside / right): {:?}", rep.branch_counts);

    let neg = self_similarity_test(400.0, &grid, replicas, seed, 0.5)?;
    let min_p = neg.per_t.iter().map(|p| p.p_value).fold(f64::INFINITY, f64::min);
    println!("composition exponent 0.5 instead: min p = {min_p:.2e}");
    println!("(rejection of the wrong exponent needs a few thousand replicas)");
    Ok(())
}
