//! Continuous-time simulation of figela processes and the rejection model.
//!
//! In the figela process with index `alpha`, each live fragment of mass `m`
//! splits after an exponential waiting time of rate `m^alpha`, along a chord
//! whose feet are drawn independently and uniformly from the fragment's
//! boundary arcs. Randomness is keyed by genealogy label, not by draw order:
//! fragment `u` owns a stream seeded from its label, from which it draws its
//! waiting time and the two foot fractions, and its children derive their
//! own keys from `u`'s. Runs with the same seed but different `alpha` then
//! realize the same labelled tree of candidate splits and differ only in
//! timing, which makes the processes nested: whenever `alpha' >= alpha`,
//! every chord of the `alpha'` run at time `t` is a chord of the `alpha` run
//! at time `t`, bit for bit.
//!
//! The rejection model draws i.i.d. uniform chords and keeps each one iff it
//! crosses none of the chords kept so far, which holds iff both feet fall in
//! the same live fragment.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::geometry::{Angle, Chord};
use crate::lamination::{Figela, FragmentId};
use crate::rng::{self, SplitMix64};
use crate::{Error, Result};

/// Fragments lighter than this are frozen instead of scheduled. At this mass
/// the rate factor `m^-alpha` overflows long before the fragment could
/// matter for any observable.
pub const MASS_FLOOR: f64 = 1e-15;

/// When to stop the event loop.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StopRule {
    /// Process every split with time at most this.
    TMax(f64),
    /// Stop once this many chords have been inserted.
    ChordBudget(usize),
}

#[derive(Debug, Clone)]
pub struct EngineConfig {
    pub alpha: f64,
    pub stop: StopRule,
    pub seed: u64,
    /// Times at which to record snapshots; sorted internally.
    pub snapshots_at: Vec<f64>,
    /// Also record ranked separating masses per query at each snapshot.
    pub record_separating: bool,
}

impl EngineConfig {
    pub fn new(alpha: f64, stop: StopRule, seed: u64) -> EngineConfig {
        EngineConfig {
            alpha,
            stop,
            seed,
            snapshots_at: Vec::new(),
            record_separating: false,
        }
    }

    pub fn with_snapshots(mut self, times: &[f64]) -> EngineConfig {
        self.snapshots_at = times.to_vec();
        self
    }
}

/// State summary at one snapshot time.
#[derive(Debug, Clone)]
pub struct Snapshot {
    pub time: f64,
    pub n_chords: usize,
    pub n_live: usize,
    /// Height of each query pair, i.e. chords crossed so far.
    pub heights: Vec<u64>,
    /// Ranked separating masses per query, if requested.
    pub separating: Option<Vec<Vec<f64>>>,
}

#[derive(Debug, Clone)]
pub struct SimOutput {
    pub figela: Figela,
    pub snapshots: Vec<Snapshot>,
    /// Time of the last processed split, 0 if none.
    pub final_time: f64,
    /// Final height of each query pair.
    pub heights: Vec<u64>,
    /// Fragments frozen at the mass floor or by rate overflow.
    pub n_frozen: usize,
    /// Splits skipped because both feet collided on the same angle.
    pub n_foot_collisions: usize,
}

struct Event {
    time: f64,
    id: FragmentId,
    key: u64,
    f1: f64,
    f2: f64,
}

impl PartialEq for Event {
    fn eq(&self, other: &Self) -> bool {
        self.time == other.time && self.id == other.id
    }
}
impl Eq for Event {}
impl PartialOrd for Event {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Event {
    fn cmp(&self, other: &Self) -> Ordering {
        // Min-heap on (time, id): reversed so BinaryHeap pops earliest.
        other
            .time
            .partial_cmp(&self.time)
            .expect("event times are finite")
            .then_with(|| other.id.cmp(&self.id))
    }
}

struct Driver<'a> {
    figela: Figela,
    heap: BinaryHeap<Event>,
    alpha: f64,
    queries: &'a [Chord],
    heights: Vec<u64>,
    n_frozen: usize,
    n_foot_collisions: usize,
}

impl<'a> Driver<'a> {
    fn new(alpha: f64, seed: u64, queries: &'a [Chord]) -> Driver<'a> {
        let figela = Figela::new();
        let mut driver = Driver {
            heap: BinaryHeap::new(),
            alpha,
            queries,
            heights: vec![0; queries.len()],
            n_frozen: 0,
            n_foot_collisions: 0,
            figela,
        };
        let root = driver.figela.root();
        driver.schedule(root, rng::root_key(seed));
        driver
    }

    /// Draws the label's waiting time and foot fractions, then queues the
    /// split. Draw order per label is fixed (waiting time, then feet), so
    /// identical labels produce identical draws across runs.
    fn schedule(&mut self, id: FragmentId, key: u64) {
        let frag = self.figela.fragment(id);
        let mass = frag.mass();
        if mass < MASS_FLOOR {
            self.n_frozen += 1;
            return;
        }
        let mut stream = rng::label_stream(key);
        let eps = stream.next_exp();
        let f1 = stream.next_f64();
        let f2 = stream.next_f64();
        let time = frag.birth_time() + eps * mass.powf(-self.alpha);
        if !time.is_finite() {
            self.n_frozen += 1;
            return;
        }
        self.heap.push(Event {
            time,
            id,
            key,
            f1,
            f2,
        });
    }

    /// Executes one queued split. Returns the split time.
    fn step(&mut self, ev: Event) -> Result<f64> {
        let trace = self.figela.fragment(ev.id).trace();
        let a = trace.point_at_fraction(ev.f1);
        let b = trace.point_at_fraction(ev.f2);
        if a.value() == b.value() {
            self.n_foot_collisions += 1;
            return Ok(ev.time);
        }
        let (c0, c1) = self.figela.insert_chord(ev.id, a, b, ev.time)?;
        let inserted = Chord::new(a, b).expect("feet are distinct");
        for (h, q) in self.heights.iter_mut().zip(self.queries) {
            if inserted.crosses(q) {
                *h += 1;
            }
        }
        self.schedule(c0, rng::child_key(ev.key, 0));
        self.schedule(c1, rng::child_key(ev.key, 1));
        Ok(ev.time)
    }

    fn snapshot(&self, time: f64, record_separating: bool) -> Result<Snapshot> {
        let separating = if record_separating {
            let mut per_query = Vec::with_capacity(self.queries.len());
            for q in self.queries {
                per_query.push(self.figela.separating_masses(q.a(), q.b())?);
            }
            Some(per_query)
        } else {
            None
        };
        Ok(Snapshot {
            time,
            n_chords: self.figela.n_chords(),
            n_live: self.figela.n_live(),
            heights: self.heights.clone(),
            separating,
        })
    }
}

/// Runs the figela process to the stop rule, tracking the height of each
/// query pair incrementally.
pub fn simulate(cfg: &EngineConfig, queries: &[(Angle, Angle)]) -> Result<SimOutput> {
    if cfg.alpha < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "alpha must be nonnegative, got {}",
            cfg.alpha
        )));
    }
    let query_chords: Vec<Chord> = queries
        .iter()
        .map(|&(x, y)| Chord::new(x, y))
        .collect::<Result<_>>()?;
    let mut snaps_at = cfg.snapshots_at.clone();
    snaps_at.sort_by(|p, q| p.partial_cmp(q).unwrap());
    let mut snaps_done = 0usize;

    let mut driver = Driver::new(cfg.alpha, cfg.seed, &query_chords);
    let mut snapshots = Vec::with_capacity(snaps_at.len());
    let mut final_time = 0.0;

    loop {
        let next_time = driver.heap.peek().map(|e| e.time);
        let stop_now = match (cfg.stop, next_time) {
            (_, None) => true,
            (StopRule::TMax(t_max), Some(t)) => t > t_max,
            (StopRule::ChordBudget(n), _) => driver.figela.n_chords() >= n,
        };
        // Snapshots whose time precedes every unprocessed event see the
        // current state. Under TMax all remaining snapshot times <= t_max
        // are valid once the queue runs past t_max.
        let snap_bound = match (stop_now, cfg.stop, next_time) {
            (true, StopRule::TMax(t_max), _) => Some(t_max),
            (true, _, None) => Some(f64::INFINITY),
            (_, _, Some(t)) => Some(t),
            _ => None,
        };
        if let Some(bound) = snap_bound {
            while snaps_done < snaps_at.len() && snaps_at[snaps_done] < bound {
                snapshots.push(driver.snapshot(snaps_at[snaps_done], cfg.record_separating)?);
                snaps_done += 1;
            }
            // A snapshot exactly at an event time includes that event, so
            // only the strict inequality above is flushed during the loop;
            // at stop time the boundary snapshot is valid too.
            if stop_now {
                while snaps_done < snaps_at.len() && snaps_at[snaps_done] <= bound {
                    snapshots.push(driver.snapshot(snaps_at[snaps_done], cfg.record_separating)?);
                    snaps_done += 1;
                }
            }
        }
        if stop_now {
            break;
        }
        let ev = driver.heap.pop().expect("peeked event exists");
        final_time = driver.step(ev)?;
    }

    Ok(SimOutput {
        snapshots,
        final_time,
        heights: driver.heights,
        n_frozen: driver.n_frozen,
        n_foot_collisions: driver.n_foot_collisions,
        figela: driver.figela,
    })
}

/// Runs the same labelled randomness at several `alpha` values. Outputs are
/// index-aligned with `alphas`; chord sets are nested from larger to smaller
/// `alpha`.
pub fn simulate_coupled(
    alphas: &[f64],
    stop: StopRule,
    seed: u64,
    queries: &[(Angle, Angle)],
) -> Result<Vec<SimOutput>> {
    alphas
        .iter()
        .map(|&alpha| {
            let cfg = EngineConfig::new(alpha, stop, seed);
            simulate(&cfg, queries)
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct RejectionOutput {
    pub figela: Figela,
    pub n_candidates: usize,
    pub n_kept: usize,
    /// `(candidates seen, kept so far)` at each requested checkpoint.
    pub kept_at: Vec<(usize, usize)>,
}

/// Domain tag separating the rejection model's candidate stream from the
/// figela process streams under a shared seed.
const REJECTION_STREAM: u64 = 0x7e3e_c710_5b1d_9a42;

/// Draws `n` i.i.d. uniform chords and keeps each iff it crosses no kept
/// chord. Point location walks the genealogy, so each candidate costs the
/// height of its feet rather than the number of kept chords.
pub fn simulate_rejection(n: usize, seed: u64, checkpoints: &[usize]) -> Result<RejectionOutput> {
    let mut rng = SplitMix64::new(rng::mix(rng::root_key(seed), REJECTION_STREAM));
    let mut figela = Figela::new();
    let mut kept_at = Vec::with_capacity(checkpoints.len());
    let mut cps = checkpoints.to_vec();
    cps.sort_unstable();
    let mut cp_idx = 0usize;
    for i in 1..=n {
        let a = Angle::new(rng.next_f64());
        let b = Angle::new(rng.next_f64());
        if a.value() != b.value() {
            let fa = figela.fragment_containing(a);
            let fb = figela.fragment_containing(b);
            if fa == fb {
                figela.insert_chord(fa, a, b, i as f64)?;
            }
        }
        while cp_idx < cps.len() && cps[cp_idx] == i {
            kept_at.push((i, figela.n_chords()));
            cp_idx += 1;
        }
    }
    Ok(RejectionOutput {
        n_candidates: n,
        n_kept: figela.n_chords(),
        kept_at,
        figela,
    })
}
