//! Binary self-similar fragmentation processes.
//!
//! A particle of mass `m` waits an exponential time of rate `m^alpha`, then
//! splits into masses `(R1 m, R2 m)` where `(R1, R2)` is drawn from a
//! dislocation measure with `1 > R1 >= R2 >= 0` and `R1 + R2 <= 1`.
//! Zero-mass children are dropped (the `0^0 = 0` convention: they contribute
//! to no power sum).
//!
//! Two measures are built in. `NuC` splits at a uniform point, returning
//! `(u, 1-u)` with `u` uniform on `[1/2, 1]`: the mass split of the disk
//! along a chord with independent uniform feet. `NuD` drops a uniform cut
//! point `U` into `[0,1]` and keeps each side only if it contains one of two
//! independent uniform marks: the law of the mass split seen along a chord
//! of the disk when the fragment carrying it splits. One side dies with
//! probability 2/3, so `NuD` loses mass.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::fmt;
use std::io::Write;
use std::sync::Arc;

use rayon::prelude::*;

use crate::engine::MASS_FLOOR;
use crate::rng::{self, SplitMix64};
use crate::{Error, Result};

/// Sampler type for custom dislocation measures.
pub type DislocationSampler = Arc<dyn Fn(&mut SplitMix64) -> (f64, f64) + Send + Sync>;
/// Closed-form kappa evaluator for custom measures.
pub type KappaEvaluator = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A binary dislocation measure: the law of the mass fractions `(s1, s2)`
/// handed to the two children at a split.
#[derive(Clone)]
pub enum DislocationMeasure {
    /// `(u, 1-u)`, `u` uniform on `[1/2, 1]`. Conservative.
    NuC,
    /// Uniform cut point, each side kept iff it holds one of two uniform
    /// marks; lost sides return mass 0.
    NuD,
    /// User-supplied sampler, optionally with a closed-form kappa.
    Custom {
        sampler: DislocationSampler,
        kappa: Option<KappaEvaluator>,
    },
}

impl fmt::Debug for DislocationMeasure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DislocationMeasure::NuC => write!(f, "NuC"),
            DislocationMeasure::NuD => write!(f, "NuD"),
            DislocationMeasure::Custom { kappa, .. } => f
                .debug_struct("Custom")
                .field("closed_form_kappa", &kappa.is_some())
                .finish(),
        }
    }
}

/// Draws ranked child mass fractions `(s1, s2)`, `s1 >= s2`.
pub fn sample_dislocation(m: &DislocationMeasure, rng: &mut SplitMix64) -> (f64, f64) {
    let out = match m {
        DislocationMeasure::NuC => {
            let u = 0.5 + 0.5 * rng.next_f64();
            // 1 - u is exact for u in [1/2, 1], so s1 + s2 == 1 exactly.
            (u, 1.0 - u)
        }
        DislocationMeasure::NuD => {
            let u = rng.next_f64();
            let x1 = rng.next_f64();
            let x2 = rng.next_f64();
            let keep_left = x1 < u || x2 < u;
            let keep_right = x1 >= u || x2 >= u;
            match (keep_left, keep_right) {
                (true, true) => (u.max(1.0 - u), u.min(1.0 - u)),
                (true, false) => (u, 0.0),
                (false, true) => (1.0 - u, 0.0),
                (false, false) => unreachable!("marks lie somewhere"),
            }
        }
        DislocationMeasure::Custom { sampler, .. } => sampler(rng),
    };
    debug_assert!(
        out.0 < 1.0 && out.0 >= out.1 && out.1 >= 0.0 && out.0 + out.1 <= 1.0 && out.0 > 0.0,
        "dislocation sample out of range: {out:?}"
    );
    out
}

/// `s^p` under the convention `0^0 = 0`.
fn pow0(s: f64, p: f64) -> f64 {
    if s == 0.0 {
        0.0
    } else {
        s.powf(p)
    }
}

/// How kappa is evaluated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KappaMode {
    ClosedForm,
    /// Fixed sample budget with a fixed seed: evaluations at different `p`
    /// reuse the same draws, so monotonicity in `p` is preserved exactly.
    MonteCarlo { samples: usize, seed: u64 },
}

/// The exponent function `kappa(p) = E[1 - s1^p - s2^p]` of a dislocation
/// measure. Continuous, increasing, with limit 1 at infinity; its positive
/// root is the Malthusian exponent.
#[derive(Debug, Clone)]
pub struct KappaFn {
    pub measure: DislocationMeasure,
    pub mode: KappaMode,
}

impl KappaFn {
    pub fn closed_form(measure: DislocationMeasure) -> KappaFn {
        KappaFn {
            measure,
            mode: KappaMode::ClosedForm,
        }
    }

    pub fn monte_carlo(measure: DislocationMeasure, samples: usize, seed: u64) -> KappaFn {
        KappaFn {
            measure,
            mode: KappaMode::MonteCarlo { samples, seed },
        }
    }
}

const KAPPA_MC_BLOCK: usize = 1 << 14;

/// Evaluates `kappa(p)`.
pub fn kappa(k: &KappaFn, p: f64) -> Result<f64> {
    if p < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "kappa needs p >= 0, got {p}"
        )));
    }
    match k.mode {
        KappaMode::ClosedForm => match &k.measure {
            DislocationMeasure::NuC => Ok((p - 1.0) / (p + 1.0)),
            DislocationMeasure::NuD => Ok((p * p + 3.0 * p - 2.0) / (p * p + 5.0 * p + 6.0)),
            DislocationMeasure::Custom { kappa: Some(f), .. } => Ok(f(p)),
            DislocationMeasure::Custom { kappa: None, .. } => Err(Error::InvalidParameter(
                "custom measure has no closed-form kappa; use Monte Carlo mode".into(),
            )),
        },
        KappaMode::MonteCarlo { samples, seed } => {
            // Deterministic per-block seeds: the result is independent of
            // thread count and identical across calls.
            let n_blocks = samples.div_ceil(KAPPA_MC_BLOCK);
            let total: f64 = (0..n_blocks)
                .into_par_iter()
                .map(|b| {
                    let mut rng = SplitMix64::new(rng::mix(seed, b as u64));
                    let lo = b * KAPPA_MC_BLOCK;
                    let hi = ((b + 1) * KAPPA_MC_BLOCK).min(samples);
                    let mut acc = 0.0;
                    for _ in lo..hi {
                        let (s1, s2) = sample_dislocation(&k.measure, &mut rng);
                        acc += 1.0 - pow0(s1, p) - pow0(s2, p);
                    }
                    acc
                })
                .sum();
            Ok(total / samples as f64)
        }
    }
}

/// Root of `kappa` on `(0, inf)` by bisection to absolute tolerance 1e-12.
/// The upper bracket doubles from 1 until `kappa` turns positive.
pub fn malthusian(k: &KappaFn) -> Result<f64> {
    let at_zero = kappa(k, 0.0)?;
    if at_zero >= 0.0 {
        return Err(Error::NoMalthusianExponent {
            p: 0.0,
            value: at_zero,
        });
    }
    let mut lo = 0.0;
    let mut hi = 1.0;
    while kappa(k, hi)? <= 0.0 {
        lo = hi;
        hi *= 2.0;
        if hi > 1e6 {
            return Err(Error::NoMalthusianExponent {
                p: hi,
                value: kappa(k, hi)?,
            });
        }
    }
    while hi - lo > 1e-12 {
        let mid = 0.5 * (lo + hi);
        if kappa(k, mid)? <= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Ranked particle masses at one recorded time.
#[derive(Debug, Clone)]
pub struct FragState {
    pub time: f64,
    /// Nonincreasing, strictly positive.
    pub masses: Vec<f64>,
}

impl FragState {
    pub fn n_particles(&self) -> usize {
        self.masses.len()
    }

    pub fn total_mass(&self) -> f64 {
        self.masses.iter().sum()
    }

    pub fn largest(&self) -> f64 {
        self.masses.first().copied().unwrap_or(0.0)
    }
}

/// `sum of mass^p` over particles, `0^0 = 0`.
pub fn power_sum(s: &FragState, p: f64) -> f64 {
    s.masses.iter().map(|&m| pow0(m, p)).sum()
}

/// The unit-mean martingale `sum of mass^(p*)`.
pub fn malthusian_martingale(s: &FragState, p_star: f64) -> f64 {
    power_sum(s, p_star)
}

struct FragEvent {
    time: f64,
    mass: f64,
    key: u64,
}

impl PartialEq for FragEvent {
    fn eq(&self, other: &Self) -> bool {
        self.time == other.time && self.key == other.key
    }
}
impl Eq for FragEvent {}
impl PartialOrd for FragEvent {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for FragEvent {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .time
            .partial_cmp(&self.time)
            .expect("event times are finite")
            .then_with(|| other.key.cmp(&self.key))
    }
}

/// Runs the fragmentation from a single particle of mass 1, recording ranked
/// mass snapshots at the requested times. Randomness is keyed by genealogy
/// label exactly as in the chord engine.
pub fn run_fragmentation(
    alpha: f64,
    m: &DislocationMeasure,
    t_max: f64,
    seed: u64,
    record_at: &[f64],
) -> Result<Vec<FragState>> {
    if alpha < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "alpha must be nonnegative, got {alpha}"
        )));
    }
    let mut record = record_at.to_vec();
    record.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut recorded = 0usize;
    let mut snapshots = Vec::with_capacity(record.len());

    let mut heap: BinaryHeap<FragEvent> = BinaryHeap::new();
    // Live masses; emptied slots are swapped away on death.
    let mut live: Vec<f64> = Vec::new();

    let schedule = |heap: &mut BinaryHeap<FragEvent>, birth: f64, mass: f64, key: u64| {
        if mass < MASS_FLOOR {
            return false;
        }
        let mut stream = rng::label_stream(key);
        let eps = stream.next_exp();
        let time = birth + eps * mass.powf(-alpha);
        if !time.is_finite() {
            return false;
        }
        heap.push(FragEvent { time, mass, key });
        true
    };

    // Sub-floor particles stay live but unscheduled: they persist in every
    // later snapshot and never split.
    schedule(&mut heap, 0.0, 1.0, rng::root_key(seed));
    live.push(1.0);
    let snapshot = |live: &[f64], time: f64, snapshots: &mut Vec<FragState>| {
        let mut masses = live.to_vec();
        masses.sort_by(|a, b| b.partial_cmp(a).unwrap());
        snapshots.push(FragState { time, masses });
    };

    loop {
        let next_time = heap.peek().map(|e| e.time);
        let bound = match next_time {
            Some(t) if t <= t_max => t,
            _ => {
                while recorded < record.len() && record[recorded] <= t_max {
                    snapshot(&live, record[recorded], &mut snapshots);
                    recorded += 1;
                }
                break;
            }
        };
        while recorded < record.len() && record[recorded] < bound {
            snapshot(&live, record[recorded], &mut snapshots);
            recorded += 1;
        }
        let ev = heap.pop().expect("peeked event exists");
        // Remove the dying particle's mass (match by value; duplicates are
        // interchangeable for the ranked state).
        let idx = live
            .iter()
            .position(|&v| v == ev.mass)
            .expect("dying particle is live");
        live.swap_remove(idx);
        // The label stream replays the waiting-time draw, then feeds the
        // dislocation sampler; children derive their own keys.
        let mut stream = rng::label_stream(ev.key);
        let _eps = stream.next_exp();
        let (s1, s2) = sample_dislocation(m, &mut stream);
        for (bit, frac) in [(0u8, s1), (1u8, s2)] {
            let child_mass = frac * ev.mass;
            if child_mass == 0.0 {
                continue;
            }
            schedule(&mut heap, ev.time, child_mass, rng::child_key(ev.key, bit));
            live.push(child_mass);
        }
    }
    Ok(snapshots)
}

/// Writes snapshots as CSV: time, particle count, total mass, Malthusian
/// power sum, and the eight largest masses (blank when absent).
pub fn write_snapshots_csv<W: Write>(
    states: &[FragState],
    p_star: f64,
    mut w: W,
) -> Result<()> {
    writeln!(
        w,
        "time,n_particles,sum_mass,sum_mass_pstar,m1,m2,m3,m4,m5,m6,m7,m8"
    )?;
    for s in states {
        write!(
            w,
            "{},{},{},{}",
            s.time,
            s.n_particles(),
            s.total_mass(),
            malthusian_martingale(s, p_star)
        )?;
        for i in 0..8 {
            match s.masses.get(i) {
                Some(m) => write!(w, ",{m}")?,
                None => write!(w, ",")?,
            }
        }
        writeln!(w)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats;
    use approx::assert_abs_diff_eq;

    #[test]
    fn nu_c_moments_and_exact_conservation() {
        let mut rng = SplitMix64::new(3);
        let n = 100_000;
        let mut sum1 = 0.0;
        for _ in 0..n {
            let (s1, s2) = sample_dislocation(&DislocationMeasure::NuC, &mut rng);
            assert!(s1 + s2 == 1.0, "NuC must conserve mass exactly");
            assert!((0.5..1.0).contains(&s1));
            sum1 += s1;
        }
        // E[s1] = 3/4, sd of the mean = sqrt(1/48/n).
        let tol = 3.0 * (1.0 / 48.0 / n as f64).sqrt();
        assert_abs_diff_eq!(sum1 / n as f64, 0.75, epsilon = tol);
    }

    #[test]
    fn nu_d_case_probability_and_conditional_density() {
        let mut rng = SplitMix64::new(4);
        let n = 100_000;
        let mut lost = 0usize;
        let mut sum = 0.0;
        let mut solo: Vec<f64> = Vec::new();
        for _ in 0..n {
            let (s1, s2) = sample_dislocation(&DislocationMeasure::NuD, &mut rng);
            if s2 == 0.0 {
                lost += 1;
                solo.push(s1);
            }
            sum += s1 + s2;
        }
        // One side lost with probability 2/3.
        let p = lost as f64 / n as f64;
        let tol = 3.0 * (2.0 / 9.0 / n as f64).sqrt();
        assert_abs_diff_eq!(p, 2.0 / 3.0, epsilon = tol);
        // E[s1 + s2] = 5/6 = 1 - kappa(1).
        assert_abs_diff_eq!(sum / n as f64, 5.0 / 6.0, epsilon = 0.005);
        // Surviving mass given a lost side has density 3m^2 on (0,1).
        let d = stats::ks_statistic(&solo, |x| (x.clamp(0.0, 1.0)).powi(3)).unwrap();
        assert!(
            stats::ks_pvalue(d, solo.len()) > 0.01,
            "KS rejected 3m^2 conditional density: D = {d}"
        );
    }

    #[test]
    fn kappa_closed_forms() {
        let kc = KappaFn::closed_form(DislocationMeasure::NuC);
        let kd = KappaFn::closed_form(DislocationMeasure::NuD);
        assert_abs_diff_eq!(kappa(&kc, 1.0).unwrap(), 0.0);
        assert_abs_diff_eq!(kappa(&kd, 0.0).unwrap(), -1.0 / 3.0);
        assert_abs_diff_eq!(kappa(&kd, 1.0).unwrap(), 1.0 / 6.0);
        assert_abs_diff_eq!(kappa(&kd, crate::beta_star()).unwrap(), 0.0, epsilon = 1e-15);
        // Monotone increasing on a grid.
        for k in [&kc, &kd] {
            let mut prev = f64::NEG_INFINITY;
            for i in 0..60 {
                let v = kappa(k, i as f64 * 0.1).unwrap();
                assert!(v > prev);
                prev = v;
            }
        }
        assert!(kappa(&kc, -0.5).is_err());
    }

    #[test]
    fn kappa_nu_c_matches_quadrature() {
        // Simpson integration of 2*(1 - u^p - (1-u)^p) over [1/2, 1], after
        // the substitution 1-u = t^16 which removes the endpoint singularity
        // of (1-u)^p for small p.
        let quad = |p: f64| {
            let n = 4_000;
            let t_hi = 0.5f64.powf(1.0 / 16.0);
            let h = t_hi / n as f64;
            let f = |t: f64| {
                let s2 = t.powi(16);
                16.0 * t.powi(15) * 2.0 * (1.0 - (1.0 - s2).powf(p) - s2.powf(p))
            };
            let mut acc = f(0.0) + f(t_hi);
            for i in 1..n {
                acc += if i % 2 == 1 { 4.0 } else { 2.0 } * f(i as f64 * h);
            }
            acc * h / 3.0
        };
        let kc = KappaFn::closed_form(DislocationMeasure::NuC);
        for p in [0.3, 1.0, 2.0, 5.0] {
            assert_abs_diff_eq!(kappa(&kc, p).unwrap(), quad(p), epsilon = 1e-8);
        }
    }

    #[test]
    fn kappa_monte_carlo_agrees_and_is_deterministic() {
        let k = KappaFn::monte_carlo(DislocationMeasure::NuD, 200_000, 12);
        let closed = KappaFn::closed_form(DislocationMeasure::NuD);
        for p in [0.5, 1.0, 2.0] {
            let mc = kappa(&k, p).unwrap();
            assert_abs_diff_eq!(mc, kappa(&closed, p).unwrap(), epsilon = 0.01);
            // Common random numbers: same draws on every call.
            assert_eq!(mc.to_bits(), kappa(&k, p).unwrap().to_bits());
        }
        // Monotonicity holds exactly under common random numbers.
        let mut prev = f64::NEG_INFINITY;
        for i in 0..30 {
            let v = kappa(&k, i as f64 * 0.2).unwrap();
            assert!(v > prev);
            prev = v;
        }
    }

    #[test]
    fn malthusian_exponents() {
        let kc = KappaFn::closed_form(DislocationMeasure::NuC);
        assert_abs_diff_eq!(malthusian(&kc).unwrap(), 1.0, epsilon = 1e-9);
        let kd = KappaFn::closed_form(DislocationMeasure::NuD);
        assert_abs_diff_eq!(malthusian(&kd).unwrap(), crate::beta_star(), epsilon = 1e-9);
        // Symmetric halving: kappa(p) = 1 - 2^{1-p}, root at 1.
        let half = DislocationMeasure::Custom {
            sampler: Arc::new(|_rng: &mut SplitMix64| (0.5, 0.5)),
            kappa: None,
        };
        let k = KappaFn::monte_carlo(half, 100, 1);
        assert_abs_diff_eq!(malthusian(&k).unwrap(), 1.0, epsilon = 1e-9);
        // Pure erosion never crosses zero at p = 0: no exponent.
        let erosion = DislocationMeasure::Custom {
            sampler: Arc::new(|_rng: &mut SplitMix64| (0.9, 0.0)),
            kappa: None,
        };
        let k = KappaFn::monte_carlo(erosion, 100, 1);
        assert!(matches!(
            malthusian(&k),
            Err(Error::NoMalthusianExponent { .. })
        ));
    }

    #[test]
    fn conservative_run_preserves_mass_at_all_times() {
        let snaps = run_fragmentation(
            1.0,
            &DislocationMeasure::NuC,
            50.0,
            7,
            &[1.0, 5.0, 10.0, 25.0, 50.0],
        )
        .unwrap();
        assert_eq!(snaps.len(), 5);
        for s in &snaps {
            assert!((s.total_mass() - 1.0).abs() < 1e-12, "t = {}", s.time);
            assert!(s.masses.windows(2).all(|w| w[0] >= w[1]));
            // p* = 1: the martingale is identically 1 along every path.
            assert!((malthusian_martingale(s, 1.0) - 1.0).abs() < 1e-12);
        }
        // Particle counts never decrease for a conservative measure.
        for w in snaps.windows(2) {
            assert!(w[1].n_particles() >= w[0].n_particles());
        }
    }

    #[test]
    fn lossy_run_mass_nonincreasing_and_martingale_mean() {
        let beta = crate::beta_star();
        let mut totals = [0.0f64; 3];
        let mut count_martingale = Vec::new();
        let reps = 400;
        for rep in 0..reps {
            let snaps = run_fragmentation(
                0.0,
                &DislocationMeasure::NuD,
                6.0,
                rng::replica_seed(100, rep),
                &[1.0, 3.0, 6.0],
            )
            .unwrap();
            let mut prev_mass = 1.0;
            for (i, s) in snaps.iter().enumerate() {
                assert!(s.total_mass() <= prev_mass + 1e-12);
                prev_mass = s.total_mass();
                totals[i] += malthusian_martingale(s, beta);
            }
            // alpha = 0, p = 0: e^{t/3} scaling of the count.
            count_martingale
                .push((-6.0f64 / 3.0).exp() * snaps[2].n_particles() as f64);
        }
        for (i, &t) in totals.iter().enumerate() {
            let mean = t / reps as f64;
            assert!(
                (mean - 1.0).abs() < 0.1,
                "martingale mean at snapshot {i} drifted: {mean}"
            );
        }
        let mean = stats::mean(&count_martingale);
        let se = stats::stderr_of_mean(&count_martingale);
        assert!(
            (mean - 1.0).abs() < 4.0 * se.max(1e-3),
            "count martingale mean {mean} (se {se})"
        );
    }

    #[test]
    fn power_sum_conventions() {
        let s = FragState {
            time: 1.0,
            masses: vec![0.5, 0.25],
        };
        assert_abs_diff_eq!(power_sum(&s, 0.0), 2.0);
        assert_abs_diff_eq!(power_sum(&s, 1.0), 0.75);
        assert_abs_diff_eq!(power_sum(&s, 2.0), 0.3125);
        let init = FragState {
            time: 0.0,
            masses: vec![1.0],
        };
        assert_abs_diff_eq!(malthusian_martingale(&init, 0.7), 1.0);
    }

    #[test]
    fn csv_snapshot_format() {
        let snaps = vec![
            FragState {
                time: 0.0,
                masses: vec![1.0],
            },
            FragState {
                time: 2.0,
                masses: vec![0.5, 0.3],
            },
        ];
        let mut buf = Vec::new();
        write_snapshots_csv(&snaps, 1.0, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            "time,n_particles,sum_mass,sum_mass_pstar,m1,m2,m3,m4,m5,m6,m7,m8"
        );
        assert_eq!(lines.next().unwrap(), "0,1,1,1,1,,,,,,,");
        assert_eq!(lines.next().unwrap(), "2,2,0.8,0.8,0.5,0.3,,,,,,");
    }

    #[test]
    fn lossy_count_growth_exponent() {
        // Mean particle count of the (2, nu_D) process grows like
        // t^{beta*/2}; log-log slope over t in [50, 800], 200 replicas.
        let ts: Vec<f64> = (0..8).map(|k| 50.0 * 16.0f64.powf(k as f64 / 7.0)).collect();
        let reps = 200usize;
        let mut per_t: Vec<Vec<f64>> = vec![Vec::with_capacity(reps); ts.len()];
        for i in 0..reps {
            let snaps = run_fragmentation(
                2.0,
                &DislocationMeasure::NuD,
                *ts.last().unwrap(),
                rng::replica_seed(401, i),
                &ts,
            )
            .unwrap();
            for (k, st) in snaps.iter().enumerate() {
                per_t[k].push(power_sum(st, 0.0));
            }
        }
        let pts: Vec<(f64, f64, f64)> = per_t
            .iter()
            .zip(&ts)
            .map(|(col, &t)| (t, stats::mean(col), stats::stderr_of_mean(col)))
            .collect();
        let series = crate::analysis::StatSeries::new(pts, reps, 401).unwrap();
        let (slope, se) = crate::analysis::estimate_exponent(&series, 50.0, 800.0).unwrap();
        let target = malthusian(&KappaFn::closed_form(DislocationMeasure::NuD)).unwrap() / 2.0;
        assert!(
            (slope - target).abs() < 0.03,
            "count slope {slope} +/- {se}, want {target}"
        );
    }
}
