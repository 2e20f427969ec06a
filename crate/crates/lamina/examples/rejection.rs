//! Draw i.i.d. uniform chords and keep each one iff it crosses nothing kept
//! so far; the kept count grows like sqrt(pi * n).
//!
//! Usage: cargo run --release --example rejection -- [n] [seed]

use lamina::engine::simulate_rejection;

fn main() -> lamina::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let n: usize = args.first().map_or(1_000_000, |s| s.parse().expect("n"));
    let seed: u64 = args.get(1).map_or(11, |s| s.parse().expect("seed"));

    let mut checkpoints: Vec<usize> = Vec::new();
    let mut c = 100usize;
    while c < n {
        checkpoints.push(c);
        c *= 4;
    }
    checkpoints.push(n);

    let out = simulate_rejection(n, seed, &checkpoints)?;
    println!("seed = {seed}, sqrt(pi) = {:.4}", std::f64::consts::PI.sqrt());
    println!("{:>10} {:>8} {:>14}", "candidates", "kept", "kept/sqrt(n)");
    for &(seen, kept) in &out.kept_at {
        println!("{:>10} {:>8} {:>14.4}", seen, kept, kept as f64 / (seen as f64).sqrt());
    }
    Ok(())
}
