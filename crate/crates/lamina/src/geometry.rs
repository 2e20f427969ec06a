//! Circle geometry: angles, chords, arc sets and distances.
//!
//! Angles are points of the unit circle parameterized by `[0, 1)` (the point
//! is `exp(2 i pi r)`). A chord is an unordered pair of distinct angles. Two
//! chords cross when their open straight segments intersect; chords sharing a
//! foot do not cross.
//!
//! An [`ArcSet`] is the trace of a fragment on the circle: an ordered list of
//! disjoint half-open arcs, stored in counterclockwise traversal order. Arc
//! endpoints are propagated verbatim through splits so that two fragments
//! adjacent along a chord hold bit-identical foot values.

use crate::rng::SplitMix64;
use crate::{Error, Result};

/// A point of the unit circle, by its normalized angle in `[0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Angle(f64);

impl Angle {
    /// Wraps any finite value into `[0, 1)`.
    pub fn new(r: f64) -> Angle {
        debug_assert!(r.is_finite());
        let mut v = r.rem_euclid(1.0);
        if v >= 1.0 {
            // rem_euclid can return exactly 1.0 for tiny negative inputs.
            v = 0.0;
        }
        Angle(v)
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }

    /// Cartesian coordinates on the unit circle.
    pub fn to_xy(self) -> (f64, f64) {
        let t = 2.0 * std::f64::consts::PI * self.0;
        (t.cos(), t.sin())
    }

    /// Counterclockwise distance from `self` to `other`, in `[0, 1)`.
    #[inline]
    pub fn ccw_to(self, other: Angle) -> f64 {
        let d = other.0 - self.0;
        if d < 0.0 {
            d + 1.0
        } else {
            d
        }
    }
}

/// Chord of the disk between two distinct boundary points. Feet are kept
/// sorted, so `(0.9, 0.1)` and `(0.1, 0.9)` are the same chord.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Chord {
    a: Angle,
    b: Angle,
}

impl Chord {
    pub fn new(x: Angle, y: Angle) -> Result<Chord> {
        if x.value() == y.value() {
            return Err(Error::DegenerateChord(x.value()));
        }
        if x.value() < y.value() {
            Ok(Chord { a: x, b: y })
        } else {
            Ok(Chord { a: y, b: x })
        }
    }

    /// Convenience constructor from raw angle values; panics on degenerate
    /// input, so only use it with known-distinct values.
    pub fn from_values(x: f64, y: f64) -> Chord {
        Chord::new(Angle::new(x), Angle::new(y)).expect("distinct feet")
    }

    #[inline]
    pub fn a(&self) -> Angle {
        self.a
    }

    #[inline]
    pub fn b(&self) -> Angle {
        self.b
    }

    /// True when `x` lies strictly inside the open arc `(a, b)` (the side
    /// not containing angle 0, since feet are sorted).
    #[inline]
    pub fn strictly_inside(&self, x: Angle) -> bool {
        self.a.value() < x.value() && x.value() < self.b.value()
    }

    /// Whether the open segments of the two chords intersect. Chords sharing
    /// a foot never cross; a chord never crosses itself.
    pub fn crosses(&self, other: &Chord) -> bool {
        if self.a == other.a || self.a == other.b || self.b == other.a || self.b == other.b {
            return false;
        }
        self.strictly_inside(other.a) != self.strictly_inside(other.b)
    }

    /// Euclidean endpoints of the segment.
    pub fn endpoints_xy(&self) -> ((f64, f64), (f64, f64)) {
        (self.a.to_xy(), self.b.to_xy())
    }

    /// Euclidean length of the segment.
    pub fn segment_length(&self) -> f64 {
        let ((x0, y0), (x1, y1)) = self.endpoints_xy();
        ((x1 - x0).powi(2) + (y1 - y0).powi(2)).sqrt()
    }
}

/// One circular arc `[start, end)`, counterclockwise; wraps through 0 when
/// `end <= start`. `start == end` encodes the full circle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CircArc {
    start: f64,
    end: f64,
}

impl CircArc {
    pub fn new(start: Angle, end: Angle) -> CircArc {
        CircArc {
            start: start.value(),
            end: end.value(),
        }
    }

    pub fn full() -> CircArc {
        CircArc {
            start: 0.0,
            end: 0.0,
        }
    }

    #[inline]
    pub fn start(&self) -> Angle {
        Angle(self.start)
    }

    #[inline]
    pub fn end(&self) -> Angle {
        Angle(self.end)
    }

    #[inline]
    pub fn is_full(&self) -> bool {
        self.start == self.end
    }

    /// Arc length as a fraction of the circle, in `(0, 1]`.
    #[inline]
    pub fn len(&self) -> f64 {
        if self.is_full() {
            1.0
        } else if self.end > self.start {
            self.end - self.start
        } else {
            (1.0 - self.start) + self.end
        }
    }

    /// Offset of `x` along the arc from `start`, in `[0, 1)`.
    #[inline]
    fn offset_of(&self, x: Angle) -> f64 {
        Angle(self.start).ccw_to(x)
    }

    /// Exact half-open membership: plain comparisons, no float arithmetic,
    /// so arcs that partition the circle classify every double exactly once.
    #[inline]
    pub fn contains(&self, x: Angle) -> bool {
        let v = x.value();
        if self.is_full() {
            true
        } else if self.start < self.end {
            self.start <= v && v < self.end
        } else {
            v >= self.start || v < self.end
        }
    }

    /// Largest representable angle strictly before `end`, wrapping at 0.
    fn last_inside(&self) -> Angle {
        let v = if self.end == 0.0 {
            f64::from_bits(1.0f64.to_bits() - 1)
        } else {
            f64::from_bits(self.end.to_bits() - 1)
        };
        Angle(v)
    }

    /// Point at counterclockwise offset `off` from the start (`off < len`).
    /// Always lands inside the arc: on arcs a few ulps wide, `start + off`
    /// rounds onto or past the excluded `end` at observable rates, and such
    /// points are clamped to the last angle inside.
    #[inline]
    pub fn point_at(&self, off: f64) -> Angle {
        debug_assert!(off > -1e-12 && off < self.len() + 1e-12);
        let p = Angle::new(self.start + off.max(0.0));
        if self.contains(p) {
            p
        } else {
            self.last_inside()
        }
    }

    /// Sub-arc `[x, y)`; `None` when empty (`x == y`). Both endpoints must
    /// lie on the arc with `x` before `y` in traversal order (not checked).
    fn piece(x: Angle, y: Angle) -> Option<CircArc> {
        if x.value() == y.value() {
            None
        } else {
            Some(CircArc::new(x, y))
        }
    }
}

/// Boundary trace of a fragment: disjoint arcs in counterclockwise traversal
/// order. The full disk has one full arc and, by convention, zero ends.
#[derive(Debug, Clone, PartialEq)]
pub struct ArcSet {
    arcs: Vec<CircArc>,
}

impl ArcSet {
    /// Trace of the whole disk.
    pub fn full_circle() -> ArcSet {
        ArcSet {
            arcs: vec![CircArc::full()],
        }
    }

    /// Builds an arc set from explicit arcs. Arcs must be pairwise disjoint;
    /// they are stored in circular order of their starting points. Adjacent
    /// arcs are deliberately not merged: each given arc counts as one end.
    pub fn from_arcs(mut arcs: Vec<CircArc>) -> ArcSet {
        arcs.sort_by(|p, q| p.start.partial_cmp(&q.start).unwrap());
        ArcSet { arcs }
    }

    #[inline]
    pub fn arcs(&self) -> &[CircArc] {
        &self.arcs
    }

    /// Total arc length (the fragment mass).
    pub fn total_mass(&self) -> f64 {
        self.arcs.iter().map(|a| a.len()).sum()
    }

    /// Number of boundary components; 0 for the full disk.
    pub fn ends(&self) -> usize {
        if self.arcs.len() == 1 && self.arcs[0].is_full() {
            0
        } else {
            self.arcs.len()
        }
    }

    pub fn contains(&self, x: Angle) -> bool {
        self.arcs.iter().any(|a| a.contains(x))
    }

    /// Point at mass-coordinate `pos` in `[0, total_mass)`, walking the arcs
    /// in traversal order.
    pub fn point_at_mass(&self, pos: f64) -> Angle {
        let mut rest = pos;
        for arc in &self.arcs {
            let l = arc.len();
            if rest < l {
                return arc.point_at(rest);
            }
            rest -= l;
        }
        // Float-sum slack: land at the end of the last arc.
        let last = self.arcs.last().expect("nonempty arc set");
        last.point_at(last.len() * (1.0 - 1e-12))
    }

    /// Uniform point on the trace: arc chosen proportionally to length, then
    /// uniform inside.
    pub fn sample_uniform(&self, rng: &mut SplitMix64) -> Angle {
        self.point_at_mass(rng.next_f64() * self.total_mass())
    }

    /// Point at fraction `f` in `[0, 1)` of the total mass.
    pub fn point_at_fraction(&self, f: f64) -> Angle {
        self.point_at_mass(f * self.total_mass())
    }

    fn locate(&self, x: Angle) -> Option<usize> {
        self.arcs.iter().position(|a| a.contains(x))
    }

    /// Splits the trace along the chord `[a b]` into the side swept
    /// counterclockwise from `a` to `b` and the complementary side. Both feet
    /// must lie on the trace. Arc endpoints equal to `a` and `b` are written
    /// verbatim into the children, so sibling fragments share exact foot
    /// values.
    pub fn split(&self, a: Angle, b: Angle) -> Result<(ArcSet, ArcSet)> {
        if a.value() == b.value() {
            return Err(Error::DegenerateChord(a.value()));
        }
        let ia = self
            .locate(a)
            .ok_or(Error::FootNotInFragment { foot: a.value(), label: String::new() })?;
        let ib = self
            .locate(b)
            .ok_or(Error::FootNotInFragment { foot: b.value(), label: String::new() })?;

        let n = self.arcs.len();
        let mut side_in: Vec<CircArc> = Vec::new();
        let mut side_out: Vec<CircArc> = Vec::new();

        if ia == ib && self.arcs[ia].is_full() {
            // The full circle: its stored endpoint is artificial, so both
            // sides are single arcs.
            side_in.extend(CircArc::piece(a, b));
            side_out.extend(CircArc::piece(b, a));
        } else if ia == ib {
            let arc = self.arcs[ia];
            let off_a = arc.offset_of(a);
            let off_b = arc.offset_of(b);
            if off_a < off_b {
                // a -> b without leaving the arc.
                side_in.extend(CircArc::piece(a, b));
                side_out.extend(CircArc::piece(b, arc.end()));
                for k in 1..n {
                    side_out.push(self.arcs[(ia + k) % n]);
                }
                side_out.extend(CircArc::piece(arc.start(), a));
            } else {
                // a -> b wraps through every other arc.
                side_in.extend(CircArc::piece(a, arc.end()));
                for k in 1..n {
                    side_in.push(self.arcs[(ia + k) % n]);
                }
                side_in.extend(CircArc::piece(arc.start(), b));
                side_out.extend(CircArc::piece(b, a));
            }
        } else {
            let arc_a = self.arcs[ia];
            let arc_b = self.arcs[ib];
            side_in.extend(CircArc::piece(a, arc_a.end()));
            let mut k = (ia + 1) % n;
            while k != ib {
                side_in.push(self.arcs[k]);
                k = (k + 1) % n;
            }
            side_in.extend(CircArc::piece(arc_b.start(), b));

            side_out.extend(CircArc::piece(b, arc_b.end()));
            let mut k = (ib + 1) % n;
            while k != ia {
                side_out.push(self.arcs[k]);
                k = (k + 1) % n;
            }
            side_out.extend(CircArc::piece(arc_a.start(), a));
        }

        Ok((ArcSet { arcs: side_in }, ArcSet { arcs: side_out }))
    }

    /// Gaps between consecutive arcs, i.e. the bounding chords of the
    /// fragment, as `(end of arc, start of next arc)` foot pairs. Zero-length
    /// gaps (shared endpoints, and the full circle) are skipped.
    pub fn gaps(&self) -> Vec<(Angle, Angle)> {
        let n = self.arcs.len();
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            let x = self.arcs[i].end();
            let y = self.arcs[(i + 1) % n].start();
            if x.value() != y.value() {
                out.push((x, y));
            }
        }
        out
    }
}

/// Distance from a point to a segment, all in the plane.
fn point_segment_distance(p: (f64, f64), s0: (f64, f64), s1: (f64, f64)) -> f64 {
    let (px, py) = p;
    let (x0, y0) = s0;
    let (x1, y1) = s1;
    let dx = x1 - x0;
    let dy = y1 - y0;
    let len2 = dx * dx + dy * dy;
    let t = if len2 == 0.0 {
        0.0
    } else {
        (((px - x0) * dx + (py - y0) * dy) / len2).clamp(0.0, 1.0)
    };
    let qx = x0 + t * dx;
    let qy = y0 + t * dy;
    ((px - qx).powi(2) + (py - qy).powi(2)).sqrt()
}

fn directed_hausdorff(from: &[Chord], to: &[Chord], resolution: f64) -> f64 {
    let mut worst = 0.0f64;
    for c in from {
        let (p0, p1) = c.endpoints_xy();
        let steps = (c.segment_length() / resolution).ceil().max(1.0) as usize;
        for k in 0..=steps {
            let t = k as f64 / steps as f64;
            let p = (p0.0 + t * (p1.0 - p0.0), p0.1 + t * (p1.1 - p0.1));
            let mut best = f64::INFINITY;
            for d in to {
                let (q0, q1) = d.endpoints_xy();
                let dist = point_segment_distance(p, q0, q1);
                if dist < best {
                    best = dist;
                }
                if best < 1e-13 {
                    // Snap projection round-off to an exact zero.
                    best = 0.0;
                    break;
                }
            }
            if best > worst {
                worst = best;
            }
        }
    }
    worst
}

/// Hausdorff distance between the unions of two chord sets, computed by
/// discretizing each chord at the given resolution and taking max-min point
/// distances against the other set's exact segments. Duplicate chords are
/// harmless. Errors on an empty input set.
pub fn chord_set_hausdorff(a: &[Chord], b: &[Chord], resolution: f64) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptyChordSet);
    }
    if !(resolution > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "hausdorff resolution must be positive, got {resolution}"
        )));
    }
    Ok(directed_hausdorff(a, b, resolution).max(directed_hausdorff(b, a, resolution)))
}
