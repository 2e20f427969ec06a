//! Render a figela trajectory and a polygon triangulation to SVG files.
//!
//! Usage: cargo run --release --example render_svg -- [t_max] [seed] [out_dir]

use lamina::engine::{simulate, EngineConfig, StopRule};
use lamina::polygon::sample_uniform_recursive;
use lamina::render::{render_svg, RenderOptions};

fn main() -> lamina::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let t_max: f64 = args.first().map_or(400.0, |s| s.parse().expect("t_max"));
    let seed: u64 = args.get(1).map_or(7, |s| s.parse().expect("seed"));
    let dir = args.get(2).map_or(".", String::as_str);

    let cfg = EngineConfig::new(2.0, StopRule::TMax(t_max), seed);
    let figela = simulate(&cfg, &[])?.figela;
    let opts = RenderOptions {
        color_by_time: true,
        ..RenderOptions::default()
    };
    let svg = render_svg(&figela.chords(), &opts);
    let path = format!("{dir}/figela.svg");
    std::fs::write(&path, &svg)?;
    println!("{path}: {} chords, {} bytes (early chords blue, late red)", figela.n_chords(), svg.len());

    let n = 60;
    let tri = sample_uniform_recursive(n, seed)?;
    let opts = RenderOptions {
        vertex_marks: Some(n),
        ..RenderOptions::default()
    };
    let svg = render_svg(&tri.chords(), &opts);
    let path = format!("{dir}/polygon.svg");
    std::fs::write(&path, &svg)?;
    println!("{path}: triangulated {n}-gon, {} bytes", svg.len());
    Ok(())
}
