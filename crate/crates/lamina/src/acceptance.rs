//! The numbered verification suite.
//!
//! Fifteen criteria pin the crate's behavior to closed-form constants,
//! scaling laws and exact structural invariants. Every tolerance and
//! replica count is written out here; `replicas_scale` shrinks replica
//! counts for smoke runs but never touches horizons or tolerances.
//!
//! Each criterion reports two verdicts. `pass` is the full criterion.
//! `gating_pass` is the portion treated as CI-gating: it differs from
//! `pass` only for the dimension criterion (soft by construction: the
//! estimate carries finite-size bias and a miss triggers review, not
//! failure) and for the matching-model uniqueness sub-check (the premise
//! that a free partner vertex is unique has a five-vertex counterexample,
//! so the sampler counts ambiguous steps instead of asserting; the count
//! is reported here and is never zero at this size).

use std::time::Instant;

use serde::Serialize;

use crate::analysis::{
    self, box_dimension, child_ends_chi_square, ends_chain, ends_one_step_mean, estimate_exponent,
    estimate_h1, estimate_h1_uniform, estimate_m1, first_moment, height_series, mass_coding_grid,
    self_similarity_test, verify_operator_fixed_point,
};
use crate::beta_star;
use crate::coding::code_lamination;
use crate::engine::{simulate, simulate_coupled, simulate_rejection, EngineConfig, StopRule};
use crate::fragmentation::{
    kappa, malthusian, malthusian_martingale, run_fragmentation, DislocationMeasure, KappaFn,
};
use crate::geometry::{chord_set_hausdorff, Angle};
use crate::lamination::Figela;
use crate::polygon::{indices_cross, sample_permutation_matching, sample_uniform_recursive};
use crate::rng::{mix, replica_seed, SplitMix64};
use crate::stats;
use crate::Result;

/// Suite-wide knobs. The seed fixes every draw; the scale multiplies
/// replica counts only.
#[derive(Debug, Clone, Copy)]
pub struct AcceptanceConfig {
    pub replicas_scale: f64,
    pub seed: u64,
}

impl Default for AcceptanceConfig {
    fn default() -> AcceptanceConfig {
        AcceptanceConfig {
            replicas_scale: 1.0,
            seed: 23,
        }
    }
}

impl AcceptanceConfig {
    fn reps(&self, full: usize) -> usize {
        ((full as f64 * self.replicas_scale).round() as usize).max(8)
    }

    fn criterion_seed(&self, id: u64) -> u64 {
        mix(self.seed, id)
    }
}

/// One criterion's outcome.
#[derive(Debug, Clone, Serialize)]
pub struct CriterionReport {
    pub id: u32,
    pub name: &'static str,
    /// Every sub-check holds.
    pub pass: bool,
    /// The CI-gating sub-checks hold (see module docs).
    pub gating_pass: bool,
    pub detail: String,
    /// Wall-clock time; excluded from serialized reports so that report
    /// files are byte-deterministic given (flags, seed).
    #[serde(skip)]
    pub seconds: f64,
}

impl CriterionReport {
    fn finish(
        id: u32,
        name: &'static str,
        pass: bool,
        gating_pass: bool,
        detail: String,
        started: Instant,
    ) -> CriterionReport {
        CriterionReport {
            id,
            name,
            pass,
            gating_pass,
            detail,
            seconds: started.elapsed().as_secs_f64(),
        }
    }

    /// One human-readable line, stable format.
    pub fn line(&self) -> String {
        let verdict = match (self.pass, self.gating_pass) {
            (true, _) => "PASS",
            (false, true) => "FAIL (non-gating)",
            (false, false) => "FAIL",
        };
        format!(
            "criterion {:02} {:<17} {:<28} {} [{:.1}s]",
            self.id, verdict, self.name, self.detail, self.seconds
        )
    }
}

const SQRT_PI: f64 = 1.7724538509055159;

/// Runs all fifteen criteria in order.
pub fn run_all(cfg: &AcceptanceConfig) -> Result<Vec<CriterionReport>> {
    run_all_with(cfg, |_| {})
}

/// Runs all fifteen criteria in order, invoking `on_report` as each one
/// completes (the full suite takes minutes; callers can stream progress).
pub fn run_all_with<F>(cfg: &AcceptanceConfig, mut on_report: F) -> Result<Vec<CriterionReport>>
where
    F: FnMut(&CriterionReport),
{
    let criteria: [fn(&AcceptanceConfig) -> Result<CriterionReport>; 15] = [
        c01_rejection_count,
        c02_continuous_count,
        c03_rate_zero_count_law,
        c04_malthusian_exponents,
        c05_kappa_monte_carlo,
        c06_martingale_means,
        c07_first_moment,
        c08_operator_fixed_point,
        c09_height_exponent,
        c10_rate_zero_height_mean,
        c11_ends_chain,
        c12_structural_invariants,
        c13_coding_reconstruction,
        c14_dimension_estimates,
        c15_self_similarity,
    ];
    let mut reports = Vec::with_capacity(criteria.len());
    for run in criteria {
        let r = run(cfg)?;
        on_report(&r);
        reports.push(r);
    }
    Ok(reports)
}

/// Criterion 1: the kept-chord count of the rejection sampler grows like
/// sqrt(pi n).
fn c01_rejection_count(cfg: &AcceptanceConfig) -> Result<CriterionReport> {
    let t0 = Instant::now();
    let n = 100_000usize;
    let out = simulate_rejection(n, cfg.criterion_seed(1), &[])?;
    let ratio = out.n_kept as f64 / (n as f64).sqrt();
    let pass = (1.684..=1.861).contains(&ratio);
    let detail = format!(
        "kept {} of {n}, ratio {ratio:.4}, want [1.684, 1.861] around sqrt(pi) = {SQRT_PI:.4}",
        out.n_kept
    );
    Ok(CriterionReport::finish(
        1,
        "rejection count law",
        pass,
        pass,
        detail,
        t0,
    ))
}

/// Criterion 2: mean chord counts at T = 400 match Gamma(1/a)/Gamma(2/a):
/// sqrt(pi T) at rate exponent 2, T at exponent 1.
fn c02_continuous_count(cfg: &AcceptanceConfig) -> Result<CriterionReport> {
    let t0 = Instant::now();
    let reps = cfg.reps(200);
    let t = 400.0;
    let s2 = analysis::count_series(2.0, &[t], reps, cfg.criterion_seed(2))?;
    let s1 = analysis::count_series(1.0, &[t], reps, cfg.criterion_seed(102))?;
    let r2 = s2.points[0].1 / t.sqrt();
    let r1 = s1.points[0].1 / t;
    let ok2 = (r2 - SQRT_PI).abs() <= 0.05 * SQRT_PI;
    let ok1 = (r1 - 1.0).abs() <= 0.05;
    let detail = format!(
        "alpha 2: count/sqrt(T) = {r2:.4} (want {SQRT_PI:.4} +/- 5%); \
         alpha 1: count/T = {r1:.4} (want 1 +/- 5%); {reps} replicas"
    );
    Ok(CriterionReport::finish(
        2,
        "continuous-time count law",
        ok1 && ok2,
        ok1 && ok2,
        detail,
        t0,
    ))
}

/// Criterion 3: at rate exponent 0 the scaled count e^{-t} #S(t) is
/// asymptotically Exp(1); Kolmogorov-Smirnov at the 1% level.
fn c03_rate_zero_count_law(cfg: &AcceptanceConfig) -> Result<CriterionReport> {
    let t0 = Instant::now();
    let reps = cfg.reps(1000);
    let t = 8.0f64;
    let scale = (-t).exp();
    let xs: Vec<f64> = (0..reps)
        .map(|i| {
            let c = EngineConfig::new(
                0.0,
                StopRule::TMax(t),
                replica_seed(cfg.criterion_seed(3), i),
            );
            Ok(scale * simulate(&c, &[])?.figela.n_chords() as f64)
        })
        .collect::<Result<_>>()?;
    let d = stats::ks_statistic(&xs, |x| if x <= 0.0 { 0.0 } else { 1.0 - (-x).exp() })?;
    let p = stats::ks_pvalue(d, xs.len());
    let pass = p > 0.01;
    let detail = format!("KS D = {d:.4}, p = {p:.4} over {reps} replicas at t = {t}");
    Ok(CriterionReport::finish(
        3,
        "rate-zero count limit law",
        pass,
        pass,
        detail,
        t0,
    ))
}

/// Criterion 4: bisection recovers both Malthusian exponents to 1e-9.
fn c04_malthusian_exponents(_cfg: &AcceptanceConfig) -> Result<CriterionReport> {
    let t0 = Instant::now();
    let pc = malthusian(&KappaFn::closed_form(DislocationMeasure::NuC))?;
    let pd = malthusian(&KappaFn::closed_form(DislocationMeasure::NuD))?;
    let okc = (pc - 1.0).abs() < 1e-9;
    let okd = (pd - beta_star()).abs() < 1e-9;
    let detail = format!(
        "conservative root {pc:.12} (want 1), lossy root {pd:.12} (want {:.12})",
        beta_star()
    );
    Ok(CriterionReport::finish(
        4,
        "malthusian exponents",
        okc && okd,
        okc && okd,
        detail,
        t0,
    ))
}

/// Criterion 5: Monte Carlo kappa agrees with the closed form for the
/// lossy measure within 0.01 at p in {0.5, 1, 2}.
fn c05_kappa_monte_carlo(cfg: &AcceptanceConfig) -> Result<CriterionReport> {
    let t0 = Instant::now();
    let samples = cfg.reps(1_000_000);
    let mc = KappaFn::monte_carlo(DislocationMeasure::NuD, samples, cfg.criterion_seed(5));
    let closed = KappaFn::closed_form(DislocationMeasure::NuD);
    let mut worst = 0.0f64;
    for p in [0.5, 1.0, 2.0] {
        worst = worst.max((kappa(&mc, p)? - kappa(&closed, p)?).abs());
    }
    let pass = worst <= 0.01;
    let detail = format!("max |mc - closed| = {worst:.5} over p in {{0.5, 1, 2}}, {samples} samples");
    Ok(CriterionReport::finish(
        5,
        "kappa closed form vs mc",
        pass,
        pass,
        detail,
        t0,
    ))
}

/// Criterion 6: unit-mean martingales. (a) The Malthusian power sum of the
/// separating-mass fragmentation at T in {1, 5, 20}, rate exponents
/// {0, 1, 2}. (b) e^{-t/3}(H(1,V)+1) for the rate-zero process at
/// t in {3, 6, 9}, V uniform.
fn c06_martingale_means(cfg: &AcceptanceConfig) -> Result<CriterionReport> {
    let t0 = Instant::now();
    let b = beta_star();
    let reps = cfg.reps(10_000);
    let mut worst_z = 0.0f64;
    let mut all_ok = true;
    for (k, &alpha) in [0.0, 1.0, 2.0].iter().enumerate() {
        for (j, &t) in [1.0, 5.0, 20.0].iter().enumerate() {
            let s = cfg.criterion_seed(600 + (k * 3 + j) as u64);
            let vals: Vec<f64> = (0..reps)
                .map(|i| {
                    let snaps = run_fragmentation(
                        alpha,
                        &DislocationMeasure::NuD,
                        t,
                        replica_seed(s, i),
                        &[t],
                    )?;
                    Ok(malthusian_martingale(&snaps[0], b))
                })
                .collect::<Result<_>>()?;
            let mean = stats::mean(&vals);
            let se = stats::stderr_of_mean(&vals).max(1e-12);
            let z = (mean - 1.0).abs() / se;
            worst_z = worst_z.max(z);
            all_ok &= z <= 3.0;
        }
    }
    let mut worst_zh = 0.0f64;
    for (j, &t) in [3.0, 6.0, 9.0].iter().enumerate() {
        let (mean, se) = estimate_h1_uniform(t, reps, cfg.criterion_seed(650 + j as u64))?;
        let z = (mean - 1.0).abs() / se.max(1e-12);
        worst_zh = worst_zh.max(z);
        all_ok &= z <= 3.0;
    }
    let detail = format!(
        "mass martingale worst |z| = {worst_z:.2} over 9 (alpha, T) pairs; \
         height martingale worst |z| = {worst_zh:.2} over t in {{3, 6, 9}}; {reps} replicas, 3 sigma"
    );
    Ok(CriterionReport::finish(
        6,
        "martingale means",
        all_ok,
        all_ok,
        detail,
        t0,
    ))
}

/// Criterion 7: the mass functional at fixed boundary points matches the
/// gamma closed form within 5%.
fn c07_first_moment(cfg: &AcceptanceConfig) -> Result<CriterionReport> {
    let t0 = Instant::now();
    let reps = cfg.reps(10_000);
    let rows = estimate_m1(&[0.25, 0.5], 400.0, 2.0, reps, cfg.criterion_seed(7))?;
    let mut all_ok = true;
    let mut parts = Vec::new();
    for (r, mean, _se) in rows {
        let target = first_moment(r);
        let ok = (mean - target).abs() <= 0.05 * target;
        all_ok &= ok;
        parts.push(format!("r = {r}: {mean:.4} vs {target:.4}"));
    }
    let detail = format!("{} ({reps} replicas, +/- 5%)", parts.join("; "));
    Ok(CriterionReport::finish(
        7,
        "first-moment closed form",
        all_ok,
        all_ok,
        detail,
        t0,
    ))
}

/// Criterion 8: the first-moment candidate is a fixed point of the
/// integral operator; the wrong exponent is not.
fn c08_operator_fixed_point(_cfg: &AcceptanceConfig) -> Result<CriterionReport> {
    let t0 = Instant::now();
    let rep = verify_operator_fixed_point(128)?;
    let ok_res = rep.max_residual < 1e-4;
    let ok_norm = rep.kernel_norm_error < 1e-6;
    let ok_neg = rep.negative_control_residual > 1e-2;
    let detail = format!(
        "residual {:.2e} (< 1e-4), kernel norm error {:.2e} (< 1e-6), negative control {:.2e} (> 1e-2)",
        rep.max_residual, rep.kernel_norm_error, rep.negative_control_residual
    );
    let pass = ok_res && ok_norm && ok_neg;
    Ok(CriterionReport::finish(
        8,
        "operator fixed point",
        pass,
        pass,
        detail,
        t0,
    ))
}

/// Criterion 9: the log-log slope of the mean antipodal height at rate
/// exponent 2 equals half the Malthusian exponent.
fn c09_height_exponent(cfg: &AcceptanceConfig) -> Result<CriterionReport> {
    let t0 = Instant::now();
    let reps = cfg.reps(100);
    let ts: Vec<f64> = (0..8)
        .map(|k| 50.0 * 16.0f64.powf(k as f64 / 7.0))
        .collect();
    let series = height_series(2.0, 0.5, &ts, reps, cfg.criterion_seed(9))?;
    let (slope, se) = estimate_exponent(&series, 50.0, 800.0)?;
    let target = beta_star() / 2.0;
    let pass = (slope - target).abs() <= 0.03;
    // The t <= 800 window sits in a transient regime where the measured
    // slope runs high; a late window documents the limit the criterion is
    // aiming at without entering the verdict.
    let tail_ts: Vec<f64> = (0..7).map(|k| 1e4 * 4.0f64.powf(k as f64)).collect();
    let tail = height_series(2.0, 0.5, &tail_ts, reps, cfg.criterion_seed(909))?;
    let (tail_slope, tail_se) = estimate_exponent(&tail, 1e4, 4.2e7)?;
    let detail = format!(
        "slope {slope:.4} +/- {se:.4} over t in [50, 800], want {target:.5} +/- 0.03; \
         same estimator over t in [1e4, 4e7]: {tail_slope:.4} +/- {tail_se:.4}; \
         {reps} replicas x 8 horizons"
    );
    Ok(CriterionReport::finish(
        9,
        "height exponent",
        pass,
        pass,
        detail,
        t0,
    ))
}

/// Criterion 10: the scaled antipodal height of the rate-zero process has
/// mean 4/pi.
fn c10_rate_zero_height_mean(cfg: &AcceptanceConfig) -> Result<CriterionReport> {
    let t0 = Instant::now();
    let reps = cfg.reps(2000);
    let (mean, se) = estimate_h1(0.5, 10.0, reps, cfg.criterion_seed(10))?;
    let target = 4.0 / std::f64::consts::PI;
    let pass = (mean - target).abs() <= 0.15 * target;
    let detail =
        format!("mean {mean:.4} +/- {se:.4}, want {target:.4} +/- 15%; {reps} replicas at t = 10");
    Ok(CriterionReport::finish(
        10,
        "rate-zero height mean",
        pass,
        pass,
        detail,
        t0,
    ))
}

/// Criterion 11: the ends chain. Exact one-step mean (k + 2)/2 for
/// k <= 50; the doubling martingale from state 4; the child-ends law.
fn c11_ends_chain(cfg: &AcceptanceConfig) -> Result<CriterionReport> {
    let t0 = Instant::now();
    let mut exact_ok = true;
    for k in 1..=50u64 {
        let (num, den) = ends_one_step_mean(k);
        exact_ok &= 2 * num == (k as u128 + 2) * den;
    }

    let reps = cfg.reps(100_000);
    let n_steps = 12usize;
    let mut per_step: Vec<Vec<f64>> = vec![Vec::with_capacity(reps); n_steps];
    for i in 0..reps {
        let chain = ends_chain(n_steps, 4, replica_seed(cfg.criterion_seed(11), i))?;
        for (n, slot) in per_step.iter_mut().enumerate() {
            let x = chain.trajectory[n + 1] as f64;
            slot.push(2.0f64.powi(n as i32 + 1) * (x - 2.0));
        }
    }
    let mut worst_z = 0.0f64;
    for slot in &per_step {
        let mean = stats::mean(slot);
        let se = stats::stderr_of_mean(slot).max(1e-12);
        worst_z = worst_z.max((mean - 2.0).abs() / se);
    }
    let mc_ok = worst_z <= 3.0;

    let fig_reps = cfg.reps(40);
    let figs: Vec<Figela> = (0..fig_reps)
        .map(|i| {
            let c = EngineConfig::new(
                0.0,
                StopRule::TMax(6.5),
                replica_seed(cfg.criterion_seed(111), i),
            );
            Ok(simulate(&c, &[])?.figela)
        })
        .collect::<Result<_>>()?;
    let p = child_ends_chi_square(&figs, 8)?;
    let chi_ok = p > 0.01;

    let pass = exact_ok && mc_ok && chi_ok;
    let detail = format!(
        "one-step means exact to k = 50: {exact_ok}; martingale worst |z| = {worst_z:.2} \
         over 12 steps ({reps} chains); child-ends chi-square p = {p:.4}"
    );
    Ok(CriterionReport::finish(
        11,
        "ends chain",
        pass,
        pass,
        detail,
        t0,
    ))
}

/// Criterion 12: exact structural invariants. Dual-tree heights against
/// brute-force crossing counts; the height triangle inequality; coupled
/// inclusion across rate exponents; recursive-triangulation shape; and the
/// matching model's uniqueness premise (counted, not asserted: a
/// five-vertex arrival order already admits two valid partners, so
/// ambiguous steps are tallied and this sub-check reports their rate).
fn c12_structural_invariants(cfg: &AcceptanceConfig) -> Result<CriterionReport> {
    let t0 = Instant::now();
    let phi = 0.618_033_988_749_894_9_f64;
    let queries: Vec<Angle> = (1..=20)
        .map(|k| Angle::new((k as f64 * phi).fract()))
        .collect();

    // (a) dual-tree distance equals the brute-force crossing count.
    let n_figs = cfg.reps(500);
    let n_triples = cfg.reps(10_000);
    let n_coupled = cfg.reps(50);
    let n_matching = cfg.reps(100);
    let mut figs = Vec::new();
    for i in 0..n_figs {
        let alpha = [0.0, 1.0, 2.0][i % 3];
        let c = EngineConfig::new(
            alpha,
            StopRule::ChordBudget(60),
            replica_seed(cfg.criterion_seed(12), i),
        );
        figs.push(simulate(&c, &[])?.figela);
    }
    let mut height_mismatch = 0usize;
    for f in &figs {
        for i in 0..queries.len() {
            for j in i + 1..queries.len() {
                if f.height(queries[i], queries[j])? != f.height_brute(queries[i], queries[j])? {
                    height_mismatch += 1;
                }
            }
        }
    }

    // (b) triangle inequality over random triples.
    let mut tri_violations = 0usize;
    let mut rng = SplitMix64::new(cfg.criterion_seed(122));
    for _ in 0..n_triples {
        let f = &figs[rng.next_below(figs.len() as u64) as usize];
        let (x, y, z) = (
            Angle::new(rng.next_f64()),
            Angle::new(rng.next_f64()),
            Angle::new(rng.next_f64()),
        );
        if f.height(x, z)? > f.height(x, y)? + f.height(y, z)? {
            tri_violations += 1;
        }
    }

    // (c) coupled runs are nested as the rate exponent grows.
    let mut nesting_breaks = 0usize;
    for i in 0..n_coupled {
        let outs = simulate_coupled(
            &[0.0, 1.0, 2.0],
            StopRule::TMax(5.0),
            replica_seed(cfg.criterion_seed(123), i),
            &[],
        )?;
        let k0 = outs[0].figela.chord_bit_keys();
        let k1 = outs[1].figela.chord_bit_keys();
        let k2 = outs[2].figela.chord_bit_keys();
        if !k2.is_subset(&k1) || !k1.is_subset(&k0) {
            nesting_breaks += 1;
        }
    }

    // (d) recursive triangulations: n - 3 pairwise-noncrossing diagonals,
    // every face a triangle.
    let mut tri_shape_ok = true;
    for (n, s) in [(7u32, 0u64), (25, 1), (1000, 2), (10_000, 3)] {
        let st = sample_uniform_recursive(n, mix(cfg.criterion_seed(124), s))?;
        tri_shape_ok &= st.diagonals.len() == (n - 3) as usize
            && st.fragments.iter().all(|f| f.len() == 3);
        for a in 0..st.diagonals.len() {
            for b in a + 1..st.diagonals.len() {
                if indices_cross(n, st.diagonals[a].feet, st.diagonals[b].feet) {
                    tri_shape_ok = false;
                }
            }
        }
    }

    // (e) matching-model ambiguity count over 100 runs at n = 10^4.
    let mut tie_events = 0usize;
    for i in 0..n_matching {
        let st = sample_permutation_matching(10_000, replica_seed(cfg.criterion_seed(125), i))?;
        tie_events += st.tie_events;
    }
    let unique_ok = tie_events == 0;

    let core_ok =
        height_mismatch == 0 && tri_violations == 0 && nesting_breaks == 0 && tri_shape_ok;
    let pass = core_ok && unique_ok;
    let pairs = n_figs * queries.len() * (queries.len() - 1) / 2;
    let detail = format!(
        "height mismatches {height_mismatch}/{pairs}, triangle violations \
         {tri_violations}/{n_triples}, nesting breaks {nesting_breaks}/{n_coupled}, \
         triangulation shape ok {tri_shape_ok}; matching ambiguity count {tie_events} \
         over {n_matching} runs at n = 10000 (uniqueness premise fails by \
         counterexample; counted, not asserted)"
    );
    Ok(CriterionReport::finish(
        12,
        "structural invariants",
        pass,
        core_ok,
        detail,
        t0,
    ))
}

/// Criterion 13: the lamination coded from the sampled mass functional
/// reconstructs the chord set: replica-median Hausdorff distance below
/// 0.15 at T = 400 and nonincreasing along T in {50, 100, 200, 400}.
fn c13_coding_reconstruction(cfg: &AcceptanceConfig) -> Result<CriterionReport> {
    let t0 = Instant::now();
    let reps = cfg.reps(15);
    let b = beta_star();
    let mut medians = Vec::new();
    for (k, &t) in [50.0, 100.0, 200.0, 400.0].iter().enumerate() {
        let mut dists = Vec::with_capacity(reps);
        for i in 0..reps {
            let c = EngineConfig::new(
                2.0,
                StopRule::TMax(t),
                replica_seed(cfg.criterion_seed(1300 + k as u64), i),
            );
            let fig = simulate(&c, &[])?.figela;
            let g = mass_coding_grid(&fig, 2048, b)?;
            let coded = code_lamination(&g, 0.0)?;
            dists.push(chord_set_hausdorff(&fig.chords(), &coded.chords, 1e-3)?);
        }
        medians.push(stats::median(&dists));
    }
    let last = *medians.last().expect("four horizons");
    let small_ok = last < 0.15;
    let mono_ok = medians.windows(2).all(|w| w[1] <= w[0] + 1e-12);
    let pass = small_ok && mono_ok;
    let detail = format!(
        "median Hausdorff at T = 50/100/200/400: {} (want final < 0.15, nonincreasing); {reps} replicas",
        medians
            .iter()
            .map(|d| format!("{d:.3}"))
            .collect::<Vec<_>>()
            .join("/")
    );
    Ok(CriterionReport::finish(
        13,
        "coding reconstruction",
        pass,
        pass,
        detail,
        t0,
    ))
}

/// Criterion 14 (soft): box-counting estimates. The chord set of a long
/// rate-2 run should read near 1 + the Malthusian exponent; the coded
/// excursion lamination near 3/2. Finite size biases both, so a miss is
/// reported but does not gate.
fn c14_dimension_estimates(cfg: &AcceptanceConfig) -> Result<CriterionReport> {
    let t0 = Instant::now();
    let c = EngineConfig::new(2.0, StopRule::TMax(800.0), cfg.criterion_seed(14));
    let fig = simulate(&c, &[])?.figela;
    let fig_scales: Vec<f64> = (0..7).map(|k| 0.04 * 2.0f64.powf(k as f64 / 2.0)).collect();
    let (dim_fig, _) = box_dimension(&fig.chords(), &fig_scales)?;

    let g = crate::coding::sample_excursion(100_000, cfg.criterion_seed(141))?;
    let coded = code_lamination(&g, 0.0)?;
    let exc_scales: Vec<f64> = (0..7)
        .map(|k| 0.0025 * 100.0f64.powf(k as f64 / 6.0))
        .collect();
    let (dim_exc, _) = box_dimension(&coded.chords, &exc_scales)?;

    let ok_fig = (1.40..=1.70).contains(&dim_fig);
    let ok_exc = (1.35..=1.65).contains(&dim_exc);
    let pass = ok_fig && ok_exc;
    let detail = format!(
        "chord-set estimate {dim_fig:.3} (want [1.40, 1.70], limit {:.3}); \
         excursion estimate {dim_exc:.3} (want [1.35, 1.65], limit 1.5); soft",
        beta_star() + 1.0
    );
    Ok(CriterionReport::finish(
        14,
        "dimension estimates",
        pass,
        true,
        detail,
        t0,
    ))
}

/// Criterion 15: the recursive decomposition of the mass functional. Direct
/// and composed samples agree by two-sample KS at t in {0.3, 0.5, 0.7}
/// (Bonferroni across the three points); composing with exponent 0.5
/// instead of the Malthusian exponent is detected.
fn c15_self_similarity(cfg: &AcceptanceConfig) -> Result<CriterionReport> {
    let t0 = Instant::now();
    let reps = cfg.reps(10_000);
    let grid = [0.3, 0.5, 0.7];
    let seed = cfg.criterion_seed(15);
    let rep = self_similarity_test(400.0, &grid, reps, seed, beta_star())?;
    let min_p = rep
        .per_t
        .iter()
        .map(|p| p.p_value)
        .fold(f64::INFINITY, f64::min);
    let main_ok = min_p > 0.01 / grid.len() as f64;

    // The negative control needs sample size for power: below 2000
    // replicas per side a two-sample KS cannot reliably reject the
    // perturbed exponent, so scaled-down smoke runs skip it.
    let (neg_ok, neg_note) = if reps >= 2000 {
        let neg = self_similarity_test(400.0, &grid, reps, seed, 0.5)?;
        let neg_min_p = neg
            .per_t
            .iter()
            .map(|p| p.p_value)
            .fold(f64::INFINITY, f64::min);
        (
            neg_min_p < 0.01,
            format!("negative-control min p = {neg_min_p:.2e} (want < 0.01)"),
        )
    } else {
        (true, "negative control skipped below 2000 replicas".into())
    };

    let pass = main_ok && neg_ok;
    let detail = format!(
        "min p = {min_p:.4} (want > {:.4}); {neg_note}; {reps} replicas per side",
        0.01 / grid.len() as f64
    );
    Ok(CriterionReport::finish(
        15,
        "self-similarity",
        pass,
        pass,
        detail,
        t0,
    ))
}
