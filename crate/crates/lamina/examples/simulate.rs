//! Run the chord-insertion process once and print a summary.
//!
//! Usage: cargo run --release --example simulate -- [alpha] [t_max] [seed] [out.jsonl]

use std::io::BufWriter;

use lamina::engine::{simulate, EngineConfig, StopRule};
use lamina::lamination::{write_jsonl, JsonlHeader};

fn main() -> lamina::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let alpha: f64 = args.first().map_or(2.0, |s| s.parse().expect("alpha"));
    let t_max: f64 = args.get(1).map_or(400.0, |s| s.parse().expect("t_max"));
    let seed: u64 = args.get(2).map_or(7, |s| s.parse().expect("seed"));

    let cfg = EngineConfig::new(alpha, StopRule::TMax(t_max), seed);
    let out = simulate(&cfg, &[])?;
    let f = &out.figela;
    println!("alpha = {alpha}, t_max = {t_max}, seed = {seed}");
    println!("chords:       {}", f.n_chords());
    println!("live mass:    {:.12}", f.total_live_mass());
    println!("frozen:       {}", out.n_frozen);
    println!("ends histogram (ends: fragments):");
    for (ends, count) in f.ends_histogram() {
        println!("  {ends:>3}: {count}");
    }

    if let Some(path) = args.get(3) {
        let header = JsonlHeader {
            kind: "figela".into(),
            seed,
            alpha: Some(alpha),
        };
        let file = std::fs::File::create(path)?;
        write_jsonl(f, &header, BufWriter::new(file))?;
        println!("wrote {path}");
    }
    Ok(())
}
