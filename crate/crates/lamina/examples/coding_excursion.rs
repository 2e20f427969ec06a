//! Code laminations by continuous functions. A Dyck-path excursion codes a
//! triangulation-like chord set exactly; a figela's mass coding function,
//! sampled on a grid, codes back a chord set close to the original.
//!
//! Usage: cargo run --release --example coding_excursion -- [steps] [t_max] [seed]

use lamina::analysis::mass_coding_grid;
use lamina::coding::{code_lamination, sample_excursion};
use lamina::engine::{simulate, EngineConfig, StopRule};
use lamina::geometry::chord_set_hausdorff;

fn main() -> lamina::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let steps: usize = args.first().map_or(10_000, |s| s.parse().expect("steps"));
    let t_max: f64 = args.get(1).map_or(200.0, |s| s.parse().expect("t_max"));
    let seed: u64 = args.get(2).map_or(9, |s| s.parse().expect("seed"));

    let g = sample_excursion(steps, seed)?;
    let coded = code_lamination(&g, 0.0)?;
    // Each up-step of the path matches one down-step, minus the outer pair
    // joining t = 0 to t = 1, which is a circle point rather than a chord.
    println!("Dyck excursion, {steps} steps (seed {seed}):");
    println!("  coded chords: {} (expect steps/2 - 1 = {})", coded.chords.len(), steps / 2 - 1);

    let cfg = EngineConfig::new(2.0, StopRule::TMax(t_max), seed);
    let figela = simulate(&cfg, &[])?.figela;
    let exponent = lamina::beta_star();
    let grid = 4096;
    let coding = mass_coding_grid(&figela, grid, exponent)?;
    let recovered = code_lamination(&coding, coding.adaptive_tolerance())?;
    let dist = chord_set_hausdorff(&figela.chords(), &recovered.chords, 1e-3)?;
    println!("figela at t = {t_max} (alpha 2, seed {seed}):");
    println!("  chords {}, grid {grid}, recovered {}", figela.n_chords(), recovered.chords.len());
    println!("  Hausdorff distance original vs recovered: {dist:.4}");
    println!("  (distance shrinks as t_max grows; try 400 or 800)");
    Ok(())
}
