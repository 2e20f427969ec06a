//! Laminations coded by continuous functions: the pseudo-distance d_g, chord
//! extraction from near-equal value pairs, a uniform discrete excursion
//! sampler, and the triangle-face maximality check for discrete chord sets.

use std::io::{BufRead, Write};

use crate::geometry::{Angle, Chord};
use crate::polygon::{indices_cross, is_diagonal};
use crate::rng::SplitMix64;
use crate::{Error, Result};

/// A nonnegative piecewise-linear function on [0,1] vanishing at both ends,
/// given by samples at strictly increasing abscissas.
#[derive(Debug, Clone)]
pub struct CodingFunction {
    ts: Vec<f64>,
    gs: Vec<f64>,
}

impl CodingFunction {
    pub fn new(samples: &[(f64, f64)]) -> Result<CodingFunction> {
        if samples.len() < 2 {
            return Err(Error::Coding("need at least two samples".into()));
        }
        let (ts, gs): (Vec<f64>, Vec<f64>) = samples.iter().copied().unzip();
        if ts[0] != 0.0 || *ts.last().unwrap() != 1.0 {
            return Err(Error::Coding(format!(
                "abscissas must span [0,1], got [{}, {}]",
                ts[0],
                ts.last().unwrap()
            )));
        }
        if ts.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::Coding("abscissas must be strictly increasing".into()));
        }
        if gs.iter().any(|&g| !(g >= 0.0)) {
            return Err(Error::Coding("values must be nonnegative".into()));
        }
        if gs[0] != 0.0 || *gs.last().unwrap() != 0.0 {
            return Err(Error::Coding("endpoint values must be zero".into()));
        }
        Ok(CodingFunction { ts, gs })
    }

    /// Uniform-grid constructor: value i sits at t = i / (len - 1).
    pub fn from_grid(gs: &[f64]) -> Result<CodingFunction> {
        let n = gs.len();
        if n < 2 {
            return Err(Error::Coding("need at least two samples".into()));
        }
        let ts: Vec<f64> = (0..n).map(|i| i as f64 / (n - 1) as f64).collect();
        CodingFunction::new(&ts.into_iter().zip(gs.iter().copied()).collect::<Vec<_>>())
    }

    pub fn abscissas(&self) -> &[f64] {
        &self.ts
    }

    pub fn values(&self) -> &[f64] {
        &self.gs
    }

    /// Linear interpolation; the argument is clamped to [0,1].
    pub fn eval(&self, t: f64) -> f64 {
        let t = t.clamp(0.0, 1.0);
        let hi = self.ts.partition_point(|&x| x < t);
        if hi == 0 {
            return self.gs[0];
        }
        if self.ts[hi] == t {
            return self.gs[hi];
        }
        let (t0, t1) = (self.ts[hi - 1], self.ts[hi]);
        let (g0, g1) = (self.gs[hi - 1], self.gs[hi]);
        g0 + (g1 - g0) * (t - t0) / (t1 - t0)
    }

    /// Minimum of the interpolant over [s, t]: attained at a breakpoint or
    /// at an endpoint of the interval.
    fn min_on(&self, s: f64, t: f64) -> f64 {
        let (lo, hi) = if s <= t { (s, t) } else { (t, s) };
        let mut m = self.eval(lo).min(self.eval(hi));
        let from = self.ts.partition_point(|&x| x <= lo);
        let to = self.ts.partition_point(|&x| x < hi);
        for i in from..to {
            m = m.min(self.gs[i]);
        }
        m
    }

    /// Twice the empirical modulus of continuity at the grid spacing: the
    /// default chord-extraction tolerance for sampled functions.
    pub fn adaptive_tolerance(&self) -> f64 {
        2.0 * self
            .gs
            .windows(2)
            .map(|w| (w[1] - w[0]).abs())
            .fold(0.0, f64::max)
    }
}

/// d_g(s, t) = g(s) + g(t) - 2 min over [s ^ t, s v t]: the pseudo-distance
/// whose zero pairs define the coded lamination.
pub fn pseudo_distance(g: &CodingFunction, s: f64, t: f64) -> f64 {
    g.eval(s) + g.eval(t) - 2.0 * g.min_on(s, t)
}

/// Chords extracted from a coding function on its sample grid.
#[derive(Debug, Clone)]
pub struct CodedChordSet {
    pub chords: Vec<Chord>,
    /// Grid-index pairs behind each chord, same order.
    pub pairs: Vec<(usize, usize)>,
}

/// Extracts chords from near-equal value pairs on the sample grid.
///
/// A "run" is a maximal set of grid points within `tol` of a common level
/// with no interior dip below level - tol; each consecutive pair of a run
/// yields one chord. On integer-valued excursions with tol = 0 this is
/// exactly the matching of up-steps to down-steps. The pair joining t = 0
/// to t = 1 is a single circle point, not a chord, and is dropped.
pub fn code_lamination(g: &CodingFunction, tol: f64) -> Result<CodedChordSet> {
    if !(tol >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "tolerance must be nonnegative, got {tol}"
        )));
    }
    let ts = g.abscissas();
    let gs = g.values();
    // Stack of open runs: (anchor level, position of latest member). Levels
    // increase up the stack; a run survives exactly while no later point
    // dips below its anchor by more than tol.
    let mut stack: Vec<(f64, usize)> = Vec::new();
    let mut chords = Vec::new();
    let mut pairs = Vec::new();
    for (j, &gj) in gs.iter().enumerate() {
        while let Some(&(level, _)) = stack.last() {
            if level > gj + tol {
                stack.pop();
            } else {
                break;
            }
        }
        let mut joined = false;
        if let Some(entry) = stack.last_mut() {
            if (gj - entry.0).abs() <= tol {
                match Chord::new(Angle::new(ts[entry.1]), Angle::new(ts[j])) {
                    Ok(c) => {
                        chords.push(c);
                        pairs.push((entry.1, j));
                    }
                    Err(Error::DegenerateChord(_)) => {}
                    Err(e) => return Err(e),
                }
                entry.1 = j;
                joined = true;
            }
        }
        if !joined {
            stack.push((gj, j));
        }
    }
    Ok(CodedChordSet { chords, pairs })
}

/// Uniform Dyck path with the given number of +-1 steps, as grid heights
/// (length steps + 1, zeros at both ends, never negative). Cycle-lemma
/// construction: shuffle m up-steps and m + 1 down-steps, rotate to start
/// after the first minimum of the prefix walk, drop the final down-step.
pub fn sample_dyck_path(steps: usize, seed: u64) -> Result<Vec<i64>> {
    if steps < 2 || steps % 2 != 0 {
        return Err(Error::InvalidParameter(format!(
            "excursion needs a positive even step count, got {steps}"
        )));
    }
    let m = steps / 2;
    let mut walk: Vec<i64> = std::iter::repeat(1)
        .take(m)
        .chain(std::iter::repeat(-1).take(m + 1))
        .collect();
    let mut rng = SplitMix64::new(crate::rng::root_key(seed));
    rng.shuffle(&mut walk);
    let mut s = 0i64;
    let mut min = 0i64;
    let mut argmin = 0usize;
    for (k, &step) in walk.iter().enumerate() {
        s += step;
        if s < min {
            min = s;
            argmin = k + 1;
        }
    }
    let mut heights = Vec::with_capacity(steps + 1);
    let mut h = 0i64;
    heights.push(h);
    for k in 0..steps {
        h += walk[(argmin + k) % walk.len()];
        heights.push(h);
        debug_assert!(h >= 0);
    }
    debug_assert_eq!(*heights.last().unwrap(), 0);
    Ok(heights)
}

/// Uniform Dyck path scaled to a coding function: time by 1/steps, value by
/// 1/sqrt(steps). Converges in law to the normalized excursion.
pub fn sample_excursion(steps: usize, seed: u64) -> Result<CodingFunction> {
    let heights = sample_dyck_path(steps, seed)?;
    let scale = 1.0 / (steps as f64).sqrt();
    let gs: Vec<f64> = heights.iter().map(|&h| h as f64 * scale).collect();
    CodingFunction::from_grid(&gs)
}

/// True iff the chords (feet on the n-grid, pairwise noncrossing) cut the
/// n-gon into triangles only. Chords joining adjacent vertices are boundary
/// edges and are ignored. Crossing input is an error.
pub fn check_triangulation(chords: &[Chord], n: u32) -> Result<bool> {
    if n < 3 {
        return Err(Error::InvalidParameter(format!(
            "triangle check needs n >= 3, got {n}"
        )));
    }
    let mut diagonals: Vec<(u32, u32)> = Vec::new();
    for c in chords {
        let foot = |a: Angle| -> Result<u32> {
            let scaled = a.value() * n as f64;
            let k = scaled.round();
            if (scaled - k).abs() > 1e-9 {
                return Err(Error::Coding(format!(
                    "chord foot {} is not on the {n}-grid",
                    a.value()
                )));
            }
            Ok(k as u32 % n)
        };
        let (i, j) = (foot(c.a())?, foot(c.b())?);
        if is_diagonal(n, i, j) {
            diagonals.push((i.min(j), i.max(j)));
        }
    }
    diagonals.sort_unstable();
    diagonals.dedup();
    for x in 0..diagonals.len() {
        for y in x + 1..diagonals.len() {
            if indices_cross(n, diagonals[x], diagonals[y]) {
                return Err(Error::Coding(format!(
                    "chords {:?} and {:?} cross",
                    diagonals[x], diagonals[y]
                )));
            }
        }
    }
    let face: Vec<u32> = (0..n).collect();
    Ok(faces_are_triangles(&face, &diagonals))
}

fn faces_are_triangles(face: &[u32], diagonals: &[(u32, u32)]) -> bool {
    let m = face.len();
    if m <= 3 {
        return m == 3;
    }
    for &(i, j) in diagonals {
        let (Some(p), Some(q)) = (
            face.iter().position(|&v| v == i),
            face.iter().position(|&v| v == j),
        ) else {
            continue;
        };
        let (p, q) = (p.min(q), p.max(q));
        if q - p < 2 || q - p > m - 2 {
            continue;
        }
        let inner: Vec<u32> = face[p..=q].to_vec();
        let outer: Vec<u32> = face[q..]
            .iter()
            .chain(face[..=p].iter())
            .copied()
            .collect();
        return faces_are_triangles(&inner, diagonals) && faces_are_triangles(&outer, diagonals);
    }
    false
}

/// Writes the two-column CSV form: header line, then one `t,g` row per
/// sample. Floats use the shortest round-trip representation.
pub fn write_coding_csv<W: Write>(g: &CodingFunction, mut w: W) -> Result<()> {
    writeln!(w, "t,g")?;
    for (t, v) in g.abscissas().iter().zip(g.values()) {
        writeln!(w, "{t},{v}")?;
    }
    Ok(())
}

/// Reads the CSV form written by [`write_coding_csv`]. A non-numeric first
/// line is treated as the header.
pub fn read_coding_csv<R: BufRead>(r: R) -> Result<CodingFunction> {
    let mut samples = Vec::new();
    for (lineno, line) in r.lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() || (lineno == 0 && line.starts_with('t')) {
            continue;
        }
        let mut cols = line.split(',');
        let parse = |field: Option<&str>| -> Result<f64> {
            field
                .ok_or_else(|| Error::MalformedInput(format!("line {}: missing column", lineno + 1)))?
                .trim()
                .parse::<f64>()
                .map_err(|e| Error::MalformedInput(format!("line {}: {e}", lineno + 1)))
        };
        let t = parse(cols.next())?;
        let g = parse(cols.next())?;
        samples.push((t, g));
    }
    CodingFunction::new(&samples)
}
