//! Estimate the growth exponents of the chord count and of the height
//! between two boundary points from log-log regressions on Monte Carlo
//! series.
//!
//! Usage: cargo run --release --example height_scaling -- [replicas] [seed]

use lamina::analysis::{count_series, estimate_exponent, height_series};

fn ladder(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|k| lo * (hi / lo).powf(k as f64 / (n - 1) as f64))
        .collect()
}

fn main() -> lamina::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let replicas: usize = args.first().map_or(200, |s| s.parse().expect("replicas"));
    let seed: u64 = args.get(1).map_or(17, |s| s.parse().expect("seed"));

    println!("{replicas} replicas per horizon, seed {seed}");

    // Chord counts: alpha = 1 grows linearly, alpha = 2 like sqrt(t).
    let ts = ladder(50.0, 800.0, 8);
    let series = count_series(1.0, &ts, replicas, seed)?;
    let (slope, se) = estimate_exponent(&series, 50.0, 800.0)?;
    println!("count exponent, alpha = 1: {slope:.4} +/- {se:.4} (limit 1)");

    let series = count_series(2.0, &ts, replicas, seed)?;
    let (slope, se) = estimate_exponent(&series, 50.0, 800.0)?;
    println!("count exponent, alpha = 2: {slope:.4} +/- {se:.4} (limit 0.5)");

    // Height of (1, e^{i pi}) at alpha = 2: the limit exponent is half the
    // Malthusian exponent, but convergence is slow; the early window reads
    // high and a late window is needed to see the limit.
    let target = lamina::beta_star() / 2.0;
    let series = height_series(2.0, 0.5, &ts, replicas, seed)?;
    let (slope, se) = estimate_exponent(&series, 50.0, 800.0)?;
    println!("height exponent, t in [50, 800]:   {slope:.4} +/- {se:.4} (limit {target:.5})");

    let late = ladder(1e4, 4e7, 7);
    let series = height_series(2.0, 0.5, &late, replicas, seed)?;
    let (slope, se) = estimate_exponent(&series, 1e4, 4e7)?;
    println!("height exponent, t in [1e4, 4e7]: {slope:.4} +/- {se:.4} (limit {target:.5})");
    Ok(())
}
