//! Run the two mass fragmentations, print their Malthusian exponents, and
//! watch the unit-mean martingale along a trajectory.
//!
//! Usage: cargo run --release --example fragmentation -- [alpha] [t_max] [seed]

use lamina::fragmentation::{
    kappa, malthusian, malthusian_martingale, run_fragmentation, DislocationMeasure, KappaFn,
};

fn main() -> lamina::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let alpha: f64 = args.first().map_or(1.0, |s| s.parse().expect("alpha"));
    let t_max: f64 = args.get(1).map_or(200.0, |s| s.parse().expect("t_max"));
    let seed: u64 = args.get(2).map_or(5, |s| s.parse().expect("seed"));

    for measure in [DislocationMeasure::NuC, DislocationMeasure::NuD] {
        let k = KappaFn::closed_form(measure.clone());
        let p_star = malthusian(&k)?;
        let k_mc = KappaFn::monte_carlo(measure.clone(), 200_000, seed);
        println!("{measure:?}: p* = {p_star:.12}");
        println!(
            "  kappa(1) closed form {:.5}, monte carlo {:.5}",
            kappa(&k, 1.0)?,
            kappa(&k_mc, 1.0)?
        );

        let record: Vec<f64> = (0..6).map(|i| t_max * (i as f64 + 1.0) / 6.0).collect();
        let states = run_fragmentation(alpha, &measure, t_max, seed, &record)?;
        println!(
            "  {:>8} {:>10} {:>12} {:>12} {:>12}",
            "time", "particles", "total mass", "largest", "martingale"
        );
        for st in &states {
            println!(
                "  {:>8.1} {:>10} {:>12.6} {:>12.3e} {:>12.4}",
                st.time,
                st.n_particles(),
                st.total_mass(),
                st.largest(),
                malthusian_martingale(st, p_star)
            );
        }
    }
    println!("the conservative measure keeps total mass 1; the lossy one sheds it,");
    println!("but sum of mass^p* stays a unit-mean martingale for both");
    Ok(())
}
