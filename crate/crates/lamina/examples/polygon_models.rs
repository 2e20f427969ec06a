//! Sample the two discrete polygon models: the recursive uniform-diagonal
//! triangulation and the permutation matching.
//!
//! Usage: cargo run --release --example polygon_models -- [n] [seed]

use lamina::polygon::{sample_permutation_matching, sample_uniform_recursive};

fn main() -> lamina::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let n: u32 = args.first().map_or(24, |s| s.parse().expect("n"));
    let seed: u64 = args.get(1).map_or(3, |s| s.parse().expect("seed"));

    let tri = sample_uniform_recursive(n, seed)?;
    println!("recursive triangulation of the {n}-gon (seed {seed}):");
    println!("  diagonals: {} (n - 3 = {})", tri.diagonals.len(), n - 3);
    println!("  faces:     {} (all triangles: {})",
        tri.fragments.len(),
        tri.fragments.iter().all(|f| f.len() == 3));
    for d in tri.diagonals.iter().take(5) {
        println!("  [{} {}] label {}", d.feet.0, d.feet.1, d.label);
    }
    if tri.diagonals.len() > 5 {
        println!("  ...");
    }

    let mat = sample_permutation_matching(n, seed)?;
    println!("permutation matching of the {n}-gon (seed {seed}):");
    println!("  matched pairs: {}", mat.matched.len());
    println!("  free vertices: {:?}", mat.free);
    println!("  ambiguous steps (several valid partners): {}", mat.tie_events);
    for &(i, j) in mat.matched.iter().take(5) {
        println!("  [{i} {j}]");
    }
    if mat.matched.len() > 5 {
        println!("  ...");
    }

    // Sanity: each step leaves free + 2 * matched equal to the step count.
    for (step, &(free, matched)) in mat.history.iter().enumerate() {
        assert_eq!(free as usize + 2 * matched as usize, step + 1);
    }
    println!("bookkeeping verified: free + 2 * matched tracks the step count");
    Ok(())
}
