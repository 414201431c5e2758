//! Integer directions on the torus.
//!
//! Every non-zero lattice vector is an integer multiple of exactly one
//! canonical direction `(a, b)` with `gcd(|a|, |b|) = 1` and either `a > 0`
//! or `(a, b) = (0, 1)`. Closed geodesics `t -> x + t v` are described by
//! such vectors, and [`direction_set`] returns the smallest family of
//! canonical directions that reaches every Fourier coefficient in the box
//! `[-N, N]^2`.

use std::collections::{HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Result, TorusError};

/// A point of the plane; on the torus it is read modulo 1.
pub type Point = [f64; 2];

pub(crate) fn gcd(mut a: i64, mut b: i64) -> i64 {
    a = a.abs();
    b = b.abs();
    while b != 0 {
        let r = a % b;
        a = b;
        b = r;
    }
    a
}

/// Non-zero integer direction of a closed geodesic.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct IntDirection {
    v1: i64,
    v2: i64,
}

impl IntDirection {
    pub fn new(v1: i64, v2: i64) -> Result<Self> {
        if v1 == 0 && v2 == 0 {
            return Err(TorusError::invalid("direction must be non-zero"));
        }
        Ok(IntDirection { v1, v2 })
    }

    pub fn v1(&self) -> i64 {
        self.v1
    }

    pub fn v2(&self) -> i64 {
        self.v2
    }

    /// Euclidean length, which is also the length of the closed geodesic.
    pub fn norm(&self) -> f64 {
        (self.v1 as f64).hypot(self.v2 as f64)
    }

    pub fn as_vec(&self) -> [f64; 2] {
        [self.v1 as f64, self.v2 as f64]
    }
}

impl From<ReducedDirection> for IntDirection {
    fn from(d: ReducedDirection) -> Self {
        IntDirection { v1: d.a, v2: d.b }
    }
}

/// Canonical representative of a rational direction.
///
/// Invariant: `gcd(|a|, |b|) = 1` and either `a > 0` or `(a, b) = (0, 1)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "(i64, i64)", into = "(i64, i64)")]
pub struct ReducedDirection {
    a: i64,
    b: i64,
}

impl ReducedDirection {
    pub const HORIZONTAL: ReducedDirection = ReducedDirection { a: 1, b: 0 };
    pub const VERTICAL: ReducedDirection = ReducedDirection { a: 0, b: 1 };

    /// Accepts only pairs that are already canonical.
    pub fn new(a: i64, b: i64) -> Result<Self> {
        let d = reduce(IntDirection::new(a, b)?);
        if d.a != a || d.b != b {
            return Err(TorusError::invalid(format!(
                "({a}, {b}) is not a canonical direction (expected ({}, {}))",
                d.a, d.b
            )));
        }
        Ok(d)
    }

    pub fn a(&self) -> i64 {
        self.a
    }

    pub fn b(&self) -> i64 {
        self.b
    }

    pub fn norm(&self) -> f64 {
        (self.a as f64).hypot(self.b as f64)
    }

    pub fn dot(&self, k: FourierIndex) -> i64 {
        self.a * k.k1 + self.b * k.k2
    }
}

impl TryFrom<(i64, i64)> for ReducedDirection {
    type Error = TorusError;

    fn try_from((a, b): (i64, i64)) -> Result<Self> {
        ReducedDirection::new(a, b)
    }
}

impl From<ReducedDirection> for (i64, i64) {
    fn from(d: ReducedDirection) -> Self {
        (d.a, d.b)
    }
}

impl fmt::Display for ReducedDirection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.a, self.b)
    }
}

/// Frequency on the integer lattice. `k = 0` is allowed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FourierIndex {
    pub k1: i64,
    pub k2: i64,
}

impl FourierIndex {
    pub const ZERO: FourierIndex = FourierIndex { k1: 0, k2: 0 };

    pub fn new(k1: i64, k2: i64) -> Self {
        FourierIndex { k1, k2 }
    }

    pub fn is_zero(&self) -> bool {
        self.k1 == 0 && self.k2 == 0
    }

    pub fn norm_sq(&self) -> i64 {
        self.k1 * self.k1 + self.k2 * self.k2
    }

    pub fn neg(&self) -> FourierIndex {
        FourierIndex { k1: -self.k1, k2: -self.k2 }
    }

    /// The Japanese bracket `(1 + |k|^2)^(1/2)`.
    pub fn bracket(&self) -> f64 {
        (1.0 + self.norm_sq() as f64).sqrt()
    }
}

/// Canonical direction parallel to `v`.
pub fn reduce(v: IntDirection) -> ReducedDirection {
    let g = gcd(v.v1, v.v2);
    let (mut a, mut b) = (v.v1 / g, v.v2 / g);
    if a < 0 || (a == 0 && b < 0) {
        a = -a;
        b = -b;
    }
    ReducedDirection { a, b }
}

/// Projective height `max(|a|, |b|)`.
pub fn height(d: ReducedDirection) -> i64 {
    d.a.abs().max(d.b.abs())
}

/// Canonical direction perpendicular to a non-zero frequency.
///
/// The zero frequency is perpendicular to everything; callers that need a
/// representative for it use [`ReducedDirection::HORIZONTAL`].
pub fn perp_direction(k: FourierIndex) -> Result<ReducedDirection> {
    if k.is_zero() {
        return Err(TorusError::invalid("the zero frequency has no distinguished perpendicular direction"));
    }
    Ok(reduce(IntDirection { v1: -k.k2, v2: k.k1 }))
}

/// The directions needed to reach every coefficient in `[-N, N]^2`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DirectionSet {
    radius: i64,
    dirs: Vec<ReducedDirection>,
    index: HashMap<ReducedDirection, usize>,
}

impl DirectionSet {
    /// Builds a set from an explicit list, rejecting duplicates.
    pub fn from_directions(radius: i64, dirs: Vec<ReducedDirection>) -> Result<Self> {
        let mut index = HashMap::with_capacity(dirs.len());
        for (i, d) in dirs.iter().enumerate() {
            if index.insert(*d, i).is_some() {
                return Err(TorusError::invalid(format!("duplicate direction {d}")));
            }
        }
        Ok(DirectionSet { radius, dirs, index })
    }

    pub fn radius(&self) -> i64 {
        self.radius
    }

    pub fn len(&self) -> usize {
        self.dirs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dirs.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &ReducedDirection> {
        self.dirs.iter()
    }

    pub fn as_slice(&self) -> &[ReducedDirection] {
        &self.dirs
    }

    pub fn contains(&self, d: &ReducedDirection) -> bool {
        self.index.contains_key(d)
    }

    pub fn position(&self, d: &ReducedDirection) -> Option<usize> {
        self.index.get(d).copied()
    }
}

/// The direction set `V_N`: both axes, every coprime `(a, b)` with
/// `1 <= a, b <= N`, and the mirror images `(a, -b)`.
///
/// Order: axes, then the positive quadrant lexicographically, then the
/// mirrored quadrant in the same order.
pub fn direction_set(n: i64) -> Result<DirectionSet> {
    if n < 1 {
        return Err(TorusError::invalid(format!("direction set radius must be >= 1, got {n}")));
    }
    let mut positive = Vec::new();
    for a in 1..=n {
        for b in 1..=n {
            if gcd(a, b) == 1 {
                positive.push(ReducedDirection { a, b });
            }
        }
    }
    let mut dirs = Vec::with_capacity(2 * positive.len() + 2);
    dirs.push(ReducedDirection::HORIZONTAL);
    dirs.push(ReducedDirection::VERTICAL);
    dirs.extend(positive.iter().copied());
    dirs.extend(positive.iter().map(|d| ReducedDirection { a: d.a, b: -d.b }));
    DirectionSet::from_directions(n, dirs)
}

/// Counts projective classes of height at most `n` by exhaustive search.
pub fn phi_bruteforce(n: i64) -> usize {
    let mut seen = HashSet::new();
    for x in -n..=n {
        for y in -n..=n {
            if x == 0 && y == 0 {
                continue;
            }
            let g = gcd(x, y);
            let (mut a, mut b) = (x / g, y / g);
            if a < 0 || (a == 0 && b < 0) {
                a = -a;
                b = -b;
            }
            if a.abs().max(b.abs()) <= n {
                seen.insert((a, b));
            }
        }
    }
    seen.len()
}

/// A chord of a closed geodesic inside the unit square.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Segment {
    pub start: Point,
    pub end: Point,
    pub length: f64,
}

impl Segment {
    pub fn midpoint(&self) -> Point {
        [0.5 * (self.start[0] + self.end[0]), 0.5 * (self.start[1] + self.end[1])]
    }
}

const BREAK_TOL: f64 = 1e-12;

/// Parameters `t` in `(0, 1)` where `x + t v` crosses a unit-cell edge,
/// sorted and with coincident crossings (corner hits) merged.
pub(crate) fn break_points(x: Point, v: IntDirection) -> Vec<f64> {
    let mut ts = Vec::with_capacity((v.v1.abs() + v.v2.abs() + 2) as usize);
    for (xi, vi) in [(x[0], v.v1), (x[1], v.v2)] {
        if vi == 0 {
            continue;
        }
        let vf = vi as f64;
        let (lo, hi) = if vi > 0 { (xi, xi + vf) } else { (xi + vf, xi) };
        let mut m = lo.floor() as i64;
        while (m as f64) <= hi {
            let t = (m as f64 - xi) / vf;
            if t > BREAK_TOL && t < 1.0 - BREAK_TOL {
                ts.push(t);
            }
            m += 1;
        }
    }
    ts.sort_by(f64::total_cmp);
    ts.dedup_by(|b, a| (*b - *a).abs() <= BREAK_TOL * a.abs().max(1.0));
    ts
}

fn snap_unit(c: f64) -> f64 {
    if c.abs() <= BREAK_TOL {
        0.0
    } else if (c - 1.0).abs() <= BREAK_TOL {
        1.0
    } else {
        c.clamp(0.0, 1.0)
    }
}

fn chord(x: Point, v: IntDirection, t0: f64, t1: f64) -> Segment {
    let [v1, v2] = v.as_vec();
    let tm = 0.5 * (t0 + t1);
    let shift = [(x[0] + tm * v1).floor(), (x[1] + tm * v2).floor()];
    let start = [snap_unit(x[0] + t0 * v1 - shift[0]), snap_unit(x[1] + t0 * v2 - shift[1])];
    let end = [snap_unit(x[0] + t1 * v1 - shift[0]), snap_unit(x[1] + t1 * v2 - shift[1])];
    let length = (end[0] - start[0]).hypot(end[1] - start[1]);
    Segment { start, end, length }
}

/// Splits the closed geodesic `{x + t v mod 1 : t in [0, 1]}` into chords
/// of the unit square, ordered by `t`.
///
/// Each chord runs from boundary to boundary. When `x` lies strictly inside
/// the square the piece after the last crossing and the piece before the
/// first crossing are one chord; it is emitted once, last.
pub fn geodesic_segments(x: Point, v: IntDirection) -> Vec<Segment> {
    let breaks = break_points(x, v);
    let on_edge = (v.v1 != 0 && x[0] == x[0].floor()) || (v.v2 != 0 && x[1] == x[1].floor());
    let mut out = Vec::with_capacity(breaks.len() + 1);
    if on_edge || breaks.is_empty() {
        let mut t0 = 0.0;
        for &t in breaks.iter().chain(std::iter::once(&1.0)) {
            let s = chord(x, v, t0, t);
            if s.length > 0.0 {
                out.push(s);
            }
            t0 = t;
        }
    } else {
        for w in breaks.windows(2) {
            let s = chord(x, v, w[0], w[1]);
            if s.length > 0.0 {
                out.push(s);
            }
        }
        let s = chord(x, v, breaks[breaks.len() - 1], 1.0 + breaks[0]);
        if s.length > 0.0 {
            out.push(s);
        }
    }
    out
}
