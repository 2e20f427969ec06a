//! Random recursive laminations of the disk.
//!
//! This crate simulates growing families of noncrossing chords of the unit
//! disk ("figelas": finite geodesic laminations) together with the
//! self-similar fragmentation processes that describe their fragment masses,
//! and ships a statistical verification layer that reproduces the closed-form
//! constants and scaling laws of the underlying theory.
//!
//! The main pieces:
//!
//! * [`geometry`]: angles on the unit circle, chords, crossing predicates,
//!   arc sets (fragment boundaries) and Hausdorff distances between chord
//!   sets.
//! * [`lamination`]: the figela state itself; chord insertion, fragment
//!   genealogy, dual trees, heights and separating fragments.
//! * [`engine`]: continuous-time simulation. Each fragment of mass `m` splits
//!   at rate `m^alpha`; the chord feet are i.i.d. uniform on the fragment's
//!   boundary arcs. Includes the discrete rejection sampler and exact
//!   coupling across several values of `alpha`.
//! * [`fragmentation`]: abstract mass fragmentations driven by a dislocation
//!   measure, Malthusian exponents and the associated martingales.
//! * [`polygon`]: discrete polygon models (recursive uniform diagonals and
//!   the permutation matching model).
//! * [`coding`]: laminations coded by continuous functions, Dyck-path
//!   excursions and chord extraction from sampled coding functions.
//! * [`analysis`]: Monte Carlo estimators, the height/mass scaling checks,
//!   the integral-operator fixed point, box-counting dimension and the
//!   self-similarity test.
//! * [`render`]: deterministic SVG output.
//! * [`cli`]: the thin command-line front end (`lamina` binary).
//!
//! Runnable walkthroughs for each capability live in the crate's `examples/`
//! directory; `cargo run --example simulate` is a good starting point.

pub mod acceptance;
pub mod analysis;
pub mod cli;
pub mod coding;
pub mod engine;
mod error;
pub mod fragmentation;
pub mod geometry;
pub mod lamination;
pub mod polygon;
pub mod render;
pub mod rng;
pub mod stats;

pub use error::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Positive root of `p^2 + 3p - 2`: the Malthusian exponent of the
/// disk-direction dislocation measure, `(sqrt(17) - 3) / 2`.
pub fn beta_star() -> f64 {
    (17.0_f64.sqrt() - 3.0) / 2.0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn beta_star_is_root_of_quadratic() {
        let b = beta_star();
        assert!((b * b + 3.0 * b - 2.0).abs() < 1e-15);
        assert!((b - 0.5615528128088303).abs() < 1e-15);
    }
}
