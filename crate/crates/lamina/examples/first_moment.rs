//! Compare the Monte Carlo mean of the mass functional against its closed
//! form, and verify the closed form is a fixed point of the associated
//! integral operator.
//!
//! Usage: cargo run --release --example first_moment -- [replicas] [t_max] [seed]

use lamina::analysis::{estimate_m1, first_moment, verify_operator_fixed_point};

fn main() -> lamina::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let replicas: usize = args.first().map_or(5_000, |s| s.parse().expect("replicas"));
    let t_max: f64 = args.get(1).map_or(400.0, |s| s.parse().expect("t_max"));
    let seed: u64 = args.get(2).map_or(13, |s| s.parse().expect("seed"));

    let grid = [0.1, 0.25, 0.5, 0.75, 0.9];
    let rows = estimate_m1(&grid, t_max, 2.0, replicas, seed)?;
    println!("{replicas} replicas at t = {t_max}, alpha = 2, seed {seed}");
    println!("{:>6} {:>10} {:>10} {:>12}", "r", "estimate", "stderr", "closed form");
    for (r, mean, se) in rows {
        println!("{:>6} {:>10.4} {:>10.4} {:>12.4}", r, mean, se, first_moment(r));
    }

    let rep = verify_operator_fixed_point(256)?;
    println!("integral operator on a 256-point grid:");
    println!("  fixed-point residual:      {:.2e}", rep.max_residual);
    println!("  kernel column-sum error:   {:.2e}", rep.kernel_norm_error);
    println!("  wrong-exponent residual:   {:.2e} (should be large)", rep.negative_control_residual);
    Ok(())
}
