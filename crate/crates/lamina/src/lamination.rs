//! Figelas: finite laminations of the disk built by recursive chord insertion.
//!
//! A figela is a finite set of pairwise noncrossing chords. Its fragments are
//! the connected components of the disk minus the chords; each fragment is a
//! convex region whose boundary alternates between circle arcs ("ends") and
//! chords. Fragments carry genealogy labels: inserting a chord into fragment
//! `u` kills it and creates children `u0` and `u1`, where child `u0` is the
//! side swept counterclockwise from the first to the second foot. Feet drawn
//! in random order therefore assign the labels by a fair coin.
//!
//! The height of a pair of boundary points is the number of chords crossed by
//! the chord joining them; it equals the graph distance between their
//! fragments in the dual tree (fragments adjacent when they share a bounding
//! chord), which is checked in tests rather than assumed.

use std::collections::HashMap;
use std::collections::VecDeque;
use std::fmt;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::geometry::{Angle, ArcSet, Chord};
use crate::{Error, Result};

/// Genealogy label: a binary word, empty at the root.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FragmentLabel {
    bits: Vec<u8>,
}

impl FragmentLabel {
    pub fn root() -> FragmentLabel {
        FragmentLabel { bits: Vec::new() }
    }

    pub fn child(&self, bit: u8) -> FragmentLabel {
        debug_assert!(bit <= 1);
        let mut bits = Vec::with_capacity(self.bits.len() + 1);
        bits.extend_from_slice(&self.bits);
        bits.push(bit);
        FragmentLabel { bits }
    }

    pub fn depth(&self) -> usize {
        self.bits.len()
    }

    pub fn parse(s: &str) -> Result<FragmentLabel> {
        let mut bits = Vec::with_capacity(s.len());
        for c in s.chars() {
            match c {
                '0' => bits.push(0),
                '1' => bits.push(1),
                _ => {
                    return Err(Error::MalformedInput(format!(
                        "fragment label must be a binary word, got {s:?}"
                    )))
                }
            }
        }
        Ok(FragmentLabel { bits })
    }
}

impl fmt::Display for FragmentLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in &self.bits {
            write!(f, "{b}")?;
        }
        Ok(())
    }
}

/// Arena index of a fragment within one [`Figela`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FragmentId(u32);

impl FragmentId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Clone)]
struct SplitInfo {
    /// Feet in insertion order; child 0 is the counterclockwise side.
    feet: (Angle, Angle),
    children: (FragmentId, FragmentId),
}

/// One fragment of the figela, dead or alive.
#[derive(Debug, Clone)]
pub struct Fragment {
    label: FragmentLabel,
    trace: ArcSet,
    mass: f64,
    ends: usize,
    birth_time: f64,
    split: Option<SplitInfo>,
}

impl Fragment {
    pub fn label(&self) -> &FragmentLabel {
        &self.label
    }
    pub fn trace(&self) -> &ArcSet {
        &self.trace
    }
    /// Normalized circle length of the boundary arcs.
    pub fn mass(&self) -> f64 {
        self.mass
    }
    /// Number of boundary arcs; 0 for the initial disk.
    pub fn ends(&self) -> usize {
        self.ends
    }
    pub fn birth_time(&self) -> f64 {
        self.birth_time
    }
    pub fn is_alive(&self) -> bool {
        self.split.is_none()
    }
    /// Children created when this fragment split; child 0 is the
    /// counterclockwise side from the first-drawn foot.
    pub fn children(&self) -> Option<(FragmentId, FragmentId)> {
        self.split.as_ref().map(|s| s.children)
    }
}

/// Record of one chord insertion, feet in insertion order.
#[derive(Debug, Clone, Copy)]
pub struct InsertRecord {
    pub time: f64,
    pub a: Angle,
    pub b: Angle,
    pub creator: FragmentId,
}

/// The lamination state: fragment arena plus the chord insertion log.
#[derive(Debug, Clone)]
pub struct Figela {
    fragments: Vec<Fragment>,
    inserts: Vec<InsertRecord>,
    n_live: usize,
}

impl Default for Figela {
    fn default() -> Self {
        Self::new()
    }
}

impl Figela {
    /// The empty figela: one live fragment, the whole disk.
    pub fn new() -> Figela {
        let trace = ArcSet::full_circle();
        let root = Fragment {
            label: FragmentLabel::root(),
            mass: trace.total_mass(),
            ends: trace.ends(),
            trace,
            birth_time: 0.0,
            split: None,
        };
        Figela {
            fragments: vec![root],
            inserts: Vec::new(),
            n_live: 1,
        }
    }

    pub fn root(&self) -> FragmentId {
        FragmentId(0)
    }

    pub fn fragment(&self, id: FragmentId) -> &Fragment {
        &self.fragments[id.index()]
    }

    pub fn n_chords(&self) -> usize {
        self.inserts.len()
    }

    pub fn n_live(&self) -> usize {
        self.n_live
    }

    /// All fragments in creation order, dead and alive.
    pub fn fragments(&self) -> &[Fragment] {
        &self.fragments
    }

    pub fn n_fragments_total(&self) -> usize {
        self.fragments.len()
    }

    pub fn inserts(&self) -> &[InsertRecord] {
        &self.inserts
    }

    /// Chords in insertion order.
    pub fn chords(&self) -> Vec<Chord> {
        self.inserts
            .iter()
            .map(|r| Chord::new(r.a, r.b).expect("stored chords are nondegenerate"))
            .collect()
    }

    /// Chord identities as exact foot bit pairs (smaller foot first). Two
    /// runs share a chord exactly when the keys match.
    pub fn chord_bit_keys(&self) -> std::collections::HashSet<(u64, u64)> {
        self.inserts
            .iter()
            .map(|r| {
                let (p, q) = (r.a.value().to_bits(), r.b.value().to_bits());
                if p <= q {
                    (p, q)
                } else {
                    (q, p)
                }
            })
            .collect()
    }

    /// Live fragments in arena (creation) order.
    pub fn live_ids(&self) -> Vec<FragmentId> {
        (0..self.fragments.len() as u32)
            .map(FragmentId)
            .filter(|id| self.fragments[id.index()].is_alive())
            .collect()
    }

    /// Splits a live fragment along the chord `[a b]`. Child 0 is the side
    /// swept counterclockwise from `a` to `b`; drawing the feet in random
    /// order therefore randomizes the labels. Returns `(child0, child1)`.
    pub fn insert_chord(
        &mut self,
        frag: FragmentId,
        a: Angle,
        b: Angle,
        time: f64,
    ) -> Result<(FragmentId, FragmentId)> {
        let parent = &self.fragments[frag.index()];
        if !parent.is_alive() {
            return Err(Error::FragmentNotAlive(parent.label.to_string()));
        }
        debug_assert!(time >= parent.birth_time);
        let (trace0, trace1) = parent.trace.split(a, b).map_err(|e| match e {
            Error::FootNotInFragment { foot, .. } => Error::FootNotInFragment {
                foot,
                label: parent.label.to_string(),
            },
            other => other,
        })?;
        let label = parent.label.clone();
        let id0 = FragmentId(self.fragments.len() as u32);
        let id1 = FragmentId(self.fragments.len() as u32 + 1);
        for (bit, trace) in [(0u8, trace0), (1u8, trace1)] {
            self.fragments.push(Fragment {
                label: label.child(bit),
                mass: trace.total_mass(),
                ends: trace.ends(),
                trace,
                birth_time: time,
                split: None,
            });
        }
        self.fragments[frag.index()].split = Some(SplitInfo {
            feet: (a, b),
            children: (id0, id1),
        });
        self.inserts.push(InsertRecord {
            time,
            a,
            b,
            creator: frag,
        });
        self.n_live += 1;
        Ok((id0, id1))
    }

    /// The live fragment whose boundary contains `x`, by walking the
    /// genealogy from the root. When `x` is a chord foot the half-open arc
    /// convention picks one side deterministically.
    pub fn fragment_containing(&self, x: Angle) -> FragmentId {
        let mut id = self.root();
        loop {
            match &self.fragments[id.index()].split {
                None => return id,
                Some(s) => {
                    let (a, b) = s.feet;
                    id = if a.ccw_to(x) < a.ccw_to(b) {
                        s.children.0
                    } else {
                        s.children.1
                    };
                }
            }
        }
    }

    /// Height of the pair `(x, y)`: the number of chords crossed by the
    /// chord `[x y]`, counted directly. `O(n)` reference implementation.
    pub fn height_brute(&self, x: Angle, y: Angle) -> Result<u64> {
        let query = Chord::new(x, y)?;
        Ok(self
            .inserts
            .iter()
            .filter(|r| {
                let c = Chord::new(r.a, r.b).expect("stored chords are nondegenerate");
                c.crosses(&query)
            })
            .count() as u64)
    }

    /// Height via the dual tree: the graph distance between the fragments
    /// containing `x` and `y`.
    pub fn height(&self, x: Angle, y: Angle) -> Result<u64> {
        if x.value() == y.value() {
            return Err(Error::DegenerateChord(x.value()));
        }
        let tree = self.dual_tree();
        tree.distance(self.fragment_containing(x), self.fragment_containing(y))
    }

    /// Live fragments whose closure meets the chord `[x y]`, ranked by
    /// decreasing mass (ties broken by creation order). There are height + 1
    /// of them.
    pub fn separating_fragments(&self, x: Angle, y: Angle) -> Result<Vec<FragmentId>> {
        let query = Chord::new(x, y)?;
        let mut out: Vec<FragmentId> = Vec::new();
        for id in self.live_ids() {
            let f = &self.fragments[id.index()];
            let hit = f.trace.contains(x)
                || f.trace.contains(y)
                || f.trace.gaps().iter().any(|&(p, q)| {
                    Chord::new(p, q)
                        .map(|c| c.crosses(&query))
                        .unwrap_or(false)
                });
            if hit {
                out.push(id);
            }
        }
        out.sort_by(|&p, &q| {
            let mp = self.fragments[p.index()].mass;
            let mq = self.fragments[q.index()].mass;
            mq.partial_cmp(&mp).unwrap().then(p.cmp(&q))
        });
        Ok(out)
    }

    /// Masses of the separating fragments, ranked nonincreasing.
    pub fn separating_masses(&self, x: Angle, y: Angle) -> Result<Vec<f64>> {
        Ok(self
            .separating_fragments(x, y)?
            .iter()
            .map(|id| self.fragments[id.index()].mass)
            .collect())
    }

    /// Histogram of live fragment ends.
    pub fn ends_histogram(&self) -> std::collections::BTreeMap<usize, usize> {
        let mut h = std::collections::BTreeMap::new();
        for id in self.live_ids() {
            *h.entry(self.fragments[id.index()].ends).or_insert(0) += 1;
        }
        h
    }

    /// Sum of live fragment masses; 1 up to float drift.
    pub fn total_live_mass(&self) -> f64 {
        self.fragments
            .iter()
            .filter(|f| f.is_alive())
            .map(|f| f.mass)
            .sum()
    }

    /// Dual tree over the live fragments.
    pub fn dual_tree(&self) -> DualTree {
        let nodes = self.live_ids();
        let index: HashMap<FragmentId, usize> =
            nodes.iter().enumerate().map(|(i, &id)| (id, i)).collect();
        let mut adj: Vec<Vec<u32>> = vec![Vec::new(); nodes.len()];
        // Chords keyed by their exact foot bits; each bounding chord is
        // shared by exactly two live fragments.
        let mut by_chord: HashMap<(u64, u64), (usize, Option<usize>)> = HashMap::new();
        for (i, &id) in nodes.iter().enumerate() {
            for (p, q) in self.fragments[id.index()].trace.gaps() {
                let mut key = (p.value().to_bits(), q.value().to_bits());
                if key.0 > key.1 {
                    key = (key.1, key.0);
                }
                match by_chord.get_mut(&key) {
                    None => {
                        by_chord.insert(key, (i, None));
                    }
                    Some(entry) => {
                        debug_assert!(entry.1.is_none(), "chord shared by more than two fragments");
                        entry.1 = Some(i);
                    }
                }
            }
        }
        for (&_key, &(i, j)) in by_chord.iter() {
            if let Some(j) = j {
                adj[i].push(j as u32);
                adj[j].push(i as u32);
            }
        }
        // Deterministic neighbor order regardless of hash iteration.
        for list in adj.iter_mut() {
            list.sort_unstable();
        }
        let root = index[&self.fragment_containing(Angle::new(0.0))];
        DualTree {
            nodes,
            index,
            adj,
            root,
        }
    }
}

/// Dual tree of a figela: one node per live fragment, edges between
/// fragments sharing a bounding chord.
#[derive(Debug, Clone)]
pub struct DualTree {
    nodes: Vec<FragmentId>,
    index: HashMap<FragmentId, usize>,
    adj: Vec<Vec<u32>>,
    root: usize,
}

impl DualTree {
    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(|l| l.len()).sum::<usize>() / 2
    }

    /// Fragment containing the base point (angle 0).
    pub fn root(&self) -> FragmentId {
        self.nodes[self.root]
    }

    /// BFS graph distance between two fragments.
    pub fn distance(&self, from: FragmentId, to: FragmentId) -> Result<u64> {
        Ok(self.path(from, to)?.len() as u64 - 1)
    }

    /// BFS path between two fragments, inclusive of both.
    pub fn path(&self, from: FragmentId, to: FragmentId) -> Result<Vec<FragmentId>> {
        let (s, t) = match (self.index.get(&from), self.index.get(&to)) {
            (Some(&s), Some(&t)) => (s, t),
            _ => return Err(Error::FragmentNotAlive("dual tree query".into())),
        };
        if s == t {
            return Ok(vec![self.nodes[s]]);
        }
        let mut prev: Vec<u32> = vec![u32::MAX; self.nodes.len()];
        let mut queue = VecDeque::new();
        prev[s] = s as u32;
        queue.push_back(s);
        while let Some(v) = queue.pop_front() {
            if v == t {
                break;
            }
            for &w in &self.adj[v] {
                if prev[w as usize] == u32::MAX {
                    prev[w as usize] = v as u32;
                    queue.push_back(w as usize);
                }
            }
        }
        if prev[t] == u32::MAX {
            return Err(Error::InvalidParameter(
                "dual tree is disconnected".to_string(),
            ));
        }
        let mut path = vec![t];
        let mut v = t;
        while v != s {
            v = prev[v] as usize;
            path.push(v);
        }
        path.reverse();
        Ok(path.into_iter().map(|i| self.nodes[i]).collect())
    }
}

/// Header line of the JSONL chord format. `alpha` is absent for models
/// without a split-rate exponent (polygon models, coded laminations).
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct JsonlHeader {
    pub kind: String,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub alpha: Option<f64>,
}

/// One chord record. `u` is the genealogy label of the split fragment; the
/// feet are in insertion order so that reload reassigns the same child
/// labels. Polygon models also carry the exact rational feet.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct JsonlChord {
    pub u: String,
    pub a: f64,
    pub b: f64,
    pub t: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub num: Option<[u64; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub den: Option<u64>,
}

/// Writes header plus one record per insertion. Angles round-trip bit-exactly
/// (shortest-representation doubles).
pub fn write_jsonl<W: Write>(figela: &Figela, header: &JsonlHeader, mut w: W) -> Result<()> {
    serde_json::to_writer(&mut w, header)?;
    w.write_all(b"\n")?;
    for rec in figela.inserts() {
        let line = JsonlChord {
            u: figela.fragment(rec.creator).label().to_string(),
            a: rec.a.value(),
            b: rec.b.value(),
            t: rec.time,
            num: None,
            den: None,
        };
        serde_json::to_writer(&mut w, &line)?;
        w.write_all(b"\n")?;
    }
    Ok(())
}

/// Reads a JSONL stream as raw records, without replaying the genealogy.
/// Works for any producer of the format, including polygon models whose
/// chords share feet and therefore cannot rebuild a [`Figela`].
pub fn load_jsonl_chords<R: BufRead>(r: R) -> Result<(JsonlHeader, Vec<JsonlChord>)> {
    let mut lines = r.lines();
    let header_line = lines
        .next()
        .ok_or_else(|| Error::MalformedInput("empty JSONL input".into()))??;
    let header: JsonlHeader = serde_json::from_str(&header_line)?;
    let mut records = Vec::new();
    for (lineno, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: JsonlChord = serde_json::from_str(&line)
            .map_err(|e| Error::MalformedInput(format!("line {}: {e}", lineno + 2)))?;
        records.push(rec);
    }
    Ok((header, records))
}

/// Reads a JSONL stream written by [`write_jsonl`], replaying the insertions.
pub fn load_jsonl<R: BufRead>(r: R) -> Result<(JsonlHeader, Figela)> {
    let mut lines = r.lines();
    let header_line = lines
        .next()
        .ok_or_else(|| Error::MalformedInput("empty JSONL input".into()))??;
    let header: JsonlHeader = serde_json::from_str(&header_line)?;
    let mut figela = Figela::new();
    let mut live_by_label: HashMap<FragmentLabel, FragmentId> = HashMap::new();
    live_by_label.insert(FragmentLabel::root(), figela.root());
    for (lineno, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: JsonlChord = serde_json::from_str(&line).map_err(|e| {
            Error::MalformedInput(format!("line {}: {e}", lineno + 2))
        })?;
        let label = FragmentLabel::parse(&rec.u)?;
        let id = *live_by_label.get(&label).ok_or_else(|| {
            Error::MalformedInput(format!(
                "line {}: fragment {} is not alive",
                lineno + 2,
                rec.u
            ))
        })?;
        let (c0, c1) = figela.insert_chord(id, Angle::new(rec.a), Angle::new(rec.b), rec.t)?;
        live_by_label.remove(&label);
        live_by_label.insert(label.child(0), c0);
        live_by_label.insert(label.child(1), c1);
    }
    Ok((header, figela))
}
