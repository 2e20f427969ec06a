//! Run the same labelled randomness at several alpha values and check that
//! the resulting chord sets are nested.
//!
//! Usage: cargo run --release --example coupled -- [t_max] [seed]

use lamina::engine::{simulate_coupled, StopRule};

fn main() -> lamina::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let t_max: f64 = args.first().map_or(100.0, |s| s.parse().expect("t_max"));
    let seed: u64 = args.get(1).map_or(7, |s| s.parse().expect("seed"));

    // Split times are nondecreasing in alpha fragment by fragment, so by
    // time t the run at a larger alpha has inserted a subset of the chords
    // of any run at a smaller alpha.
    let alphas = [2.0, 1.0, 0.5, 0.0];
    let outs = simulate_coupled(&alphas, StopRule::TMax(t_max), seed, &[])?;

    println!("t_max = {t_max}, seed = {seed}");
    println!("{:>7} {:>8} {:>8}", "alpha", "chords", "frozen");
    for (alpha, out) in alphas.iter().zip(&outs) {
        println!("{:>7} {:>8} {:>8}", alpha, out.figela.n_chords(), out.n_frozen);
    }

    for w in outs.windows(2) {
        let big = w[0].figela.chord_bit_keys();
        let small = w[1].figela.chord_bit_keys();
        assert!(
            big.is_subset(&small),
            "coupling must nest chord sets from larger to smaller alpha"
        );
    }
    println!("nesting verified: each chord set contains the previous one");
    Ok(())
}
