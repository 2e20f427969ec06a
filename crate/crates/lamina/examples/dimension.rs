//! Box-counting dimension estimates for a figela chord set and for the
//! chord set coded by a random excursion.
//!
//! Usage: cargo run --release --example dimension -- [t_max] [steps] [seed]

use lamina::analysis::box_dimension;
use lamina::coding::{code_lamination, sample_excursion};
use lamina::engine::{simulate, EngineConfig, StopRule};

fn main() -> lamina::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let t_max: f64 = args.first().map_or(800.0, |s| s.parse().expect("t_max"));
    let steps: usize = args.get(1).map_or(100_000, |s| s.parse().expect("steps"));
    let seed: u64 = args.get(2).map_or(21, |s| s.parse().expect("seed"));

    let cfg = EngineConfig::new(2.0, StopRule::TMax(t_max), seed);
    let figela = simulate(&cfg, &[])?.figela;
    let scales: Vec<f64> = (0..7).map(|k| 0.04 * 2.0f64.powf(k as f64 / 2.0)).collect();
    let (dim, counts) = box_dimension(&figela.chords(), &scales)?;
    println!("figela at t = {t_max}, alpha 2, {} chords (seed {seed}):", figela.n_chords());
    for (eps, boxes) in &counts {
        println!("  eps {:>7.4}: {boxes} boxes", eps);
    }
    println!("  estimate {dim:.3} (limit 1 + beta* = {:.3})", 1.0 + lamina::beta_star());

    let g = sample_excursion(steps, seed)?;
    let coded = code_lamination(&g, 0.0)?;
    let scales: Vec<f64> = (0..7).map(|k| 0.0025 * 100.0f64.powf(k as f64 / 6.0)).collect();
    let (dim, _) = box_dimension(&coded.chords, &scales)?;
    println!("excursion-coded set, {steps} steps: estimate {dim:.3} (limit 1.5)");
    Ok(())
}
