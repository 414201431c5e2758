//! Forward models producing X-ray data over closed geodesics of the torus.
//!
//! * [`xray_pixel`]: exact integration over a periodically extended pixel grid.
//! * [`xray_quadrature`]: adaptive quadrature of an analytic phantom.
//! * [`torus_project`]: re-expression of a Euclidean parallel-beam sinogram
//!   ([`radon_simulate`]) as torus data.
//!
//! [`acquire`] samples any of them on the equispaced start points used by
//! the reconstruction, and [`add_noise`] applies the additive Gaussian model.

use std::collections::HashMap;
use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Result, TorusError};
use crate::lattice::{self, geodesic_segments, reduce, DirectionSet, IntDirection, Point, ReducedDirection};
use crate::phantom::{AnalyticPhantom, PixelPhantom};
use crate::quadrature;

/// Centre of the unit square, the reference point for ray offsets.
pub const DOMAIN_CENTER: Point = [0.5, 0.5];

/// Default absolute tolerance for [`xray_quadrature`].
pub const DEFAULT_QUADRATURE_TOL: f64 = 1e-9;

/// Default number of rays per projection angle.
pub const DEFAULT_RAYS: usize = 729;

/// Integral over `t in [0, 1]` of the periodically extended grid along
/// `a + t d`, with exact cell intersection lengths.
pub(crate) fn walk_integral(p: &PixelPhantom, a: Point, d: [f64; 2]) -> f64 {
    let n = p.n();
    let nf = n as f64;
    // Per axis: current cell (unwrapped), step, wrapped index, next crossing.
    let setup = |a: f64, d: f64| -> (i64, i64, f64) {
        if d > 0.0 {
            let c = (a * nf).floor() as i64;
            (c, 1, ((c + 1) as f64 / nf - a) / d)
        } else if d < 0.0 {
            let c = (a * nf).ceil() as i64 - 1;
            (c, -1, (c as f64 / nf - a) / d)
        } else {
            ((a * nf).floor() as i64, 0, f64::INFINITY)
        }
    };
    let (mut cx, sx, mut tx) = setup(a[0], d[0]);
    let (mut cy, sy, mut ty) = setup(a[1], d[1]);
    let ni = n as i64;
    let mut jx = cx.rem_euclid(ni) as usize;
    let mut iy = cy.rem_euclid(ni) as usize;
    let values = p.values();
    let mut t = 0.0;
    let mut acc = 0.0;
    loop {
        let tn = tx.min(ty).min(1.0);
        acc += values[iy * n + jx] * (tn - t);
        if tn >= 1.0 {
            break;
        }
        if tx <= tn {
            cx += sx;
            jx = if sx > 0 {
                if jx + 1 == n { 0 } else { jx + 1 }
            } else if jx == 0 {
                n - 1
            } else {
                jx - 1
            };
            let edge = if sx > 0 { cx + 1 } else { cx };
            tx = (edge as f64 / nf - a[0]) / d[0];
        }
        if ty <= tn {
            cy += sy;
            iy = if sy > 0 {
                if iy + 1 == n { 0 } else { iy + 1 }
            } else if iy == 0 {
                n - 1
            } else {
                iy - 1
            };
            let edge = if sy > 0 { cy + 1 } else { cy };
            ty = (edge as f64 / nf - a[1]) / d[1];
        }
        t = tn;
    }
    acc
}

/// Forward model A1: `(1/|v|) sum_i d_i f_i` over the pixels crossed by the
/// segment `{x + t v : t in [0, 1]}` of the periodically extended grid.
pub fn xray_pixel(p: &PixelPhantom, x: Point, v: IntDirection) -> f64 {
    walk_integral(p, x, v.as_vec())
}

fn wrap_unit(c: f64) -> f64 {
    let w = c - c.floor();
    if w >= 1.0 {
        0.0
    } else {
        w
    }
}

fn cross(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

/// Forward model A2: `int_0^1 f([x + t v]) dt` by adaptive quadrature.
///
/// Panels start at every unit-cell crossing and at every crossing of the
/// phantom's declared edge lines, so piecewise-constant phantoms are
/// integrated exactly panel by panel.
pub fn xray_quadrature(p: &dyn AnalyticPhantom, x: Point, v: IntDirection, tol: f64) -> Result<f64> {
    let edges = p.edges();
    xray_quadrature_with_edges(p, &edges, x, v, tol)
}

fn xray_quadrature_with_edges(
    p: &dyn AnalyticPhantom,
    edges: &[crate::phantom::EdgeLine],
    x: Point,
    v: IntDirection,
    tol: f64,
) -> Result<f64> {
    if !(tol > 0.0) {
        return Err(TorusError::invalid(format!("quadrature tolerance must be positive, got {tol}")));
    }
    let vv = v.as_vec();
    let cells = lattice::break_points(x, v);
    let mut breaks = Vec::with_capacity((cells.len() + 2) * (edges.len() + 1));
    let mut t0 = 0.0;
    breaks.push(0.0);
    for &t1 in cells.iter().chain(std::iter::once(&1.0)) {
        if !edges.is_empty() {
            let tm = 0.5 * (t0 + t1);
            let base = [x[0] - (x[0] + tm * vv[0]).floor(), x[1] - (x[1] + tm * vv[1]).floor()];
            let first = breaks.len();
            for e in edges {
                let denom = cross(e.dir, vv);
                if denom == 0.0 {
                    continue;
                }
                let t = cross(e.dir, [e.point[0] - base[0], e.point[1] - base[1]]) / denom;
                if t > t0 && t < t1 {
                    breaks.push(t);
                }
            }
            breaks[first..].sort_by(f64::total_cmp);
        }
        breaks.push(t1);
        t0 = t1;
    }
    let f = |t: f64| p.value(wrap_unit(x[0] + t * vv[0]), wrap_unit(x[1] + t * vv[1]));
    quadrature::integrate(f, &breaks, tol, quadrature::DEFAULT_MAX_PANELS)
}

/// One parallel-beam projection: ray offsets and line integrals.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Projection {
    /// Angle of the rays from the y-axis, counterclockwise, in `[0, pi)`.
    pub angle: f64,
    pub offsets: Vec<f64>,
    pub values: Vec<f64>,
}

impl Projection {
    /// Unit vector along the rays: `(-sin a, cos a)`.
    pub fn ray_direction(&self) -> [f64; 2] {
        ray_direction(self.angle)
    }
}

fn ray_direction(angle: f64) -> [f64; 2] {
    let (s, c) = angle.sin_cos();
    [-s, c]
}

/// Projection angle whose rays run parallel to `v`, normalized to `[0, pi)`.
pub fn ray_angle(v: IntDirection) -> f64 {
    let d = reduce(v);
    let mut a = (-(d.a() as f64)).atan2(d.b() as f64);
    if a < 0.0 {
        a += PI;
    }
    if a >= PI {
        a -= PI;
    }
    a
}

const ANGLE_TOL: f64 = 1e-12;

/// Parallel-beam data. A ray at angle `a` with offset `c` is the line of
/// points `p` with `u x (p - O) = c`, where `u` is the ray direction and `O`
/// the centre of the unit square.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct EuclideanSinogram {
    projections: Vec<Projection>,
}

impl EuclideanSinogram {
    pub fn new(mut projections: Vec<Projection>) -> Result<Self> {
        for p in &projections {
            if p.offsets.len() < 2 {
                return Err(TorusError::invalid(format!("projection at {} has fewer than 2 rays", p.angle)));
            }
            if p.offsets.len() != p.values.len() {
                return Err(TorusError::invalid(format!("projection at {}: offsets and values differ in length", p.angle)));
            }
            if p.offsets.windows(2).any(|w| !(w[1] > w[0])) {
                return Err(TorusError::invalid(format!("projection at {}: offsets not strictly increasing", p.angle)));
            }
        }
        projections.sort_by(|a, b| a.angle.total_cmp(&b.angle));
        Ok(EuclideanSinogram { projections })
    }

    pub fn projections(&self) -> &[Projection] {
        &self.projections
    }

    pub fn find_angle(&self, angle: f64) -> Option<&Projection> {
        let i = self.projections.partition_point(|p| p.angle < angle - ANGLE_TOL);
        self.projections.get(i).filter(|p| (p.angle - angle).abs() <= ANGLE_TOL)
    }

    pub fn projection_for(&self, v: IntDirection) -> Option<&Projection> {
        self.find_angle(ray_angle(v))
    }

    /// Adds independent `N(0, sigma^2)` noise to every ray value.
    pub fn with_noise(&self, spec: NoiseSpec) -> Result<Self> {
        let normal = spec.distribution()?;
        let mut out = self.clone();
        if let Some(normal) = normal {
            for (i, p) in out.projections.iter_mut().enumerate() {
                let mut rng = spec.stream(i as u64);
                for v in &mut p.values {
                    *v += normal.sample(&mut rng);
                }
            }
        }
        Ok(out)
    }
}

/// Equispaced ray offsets spanning `[-sqrt(2)/2, sqrt(2)/2]`.
pub fn ray_offsets(m: usize) -> Vec<f64> {
    let h = 2.0 * FRAC_1_SQRT_2 / (m - 1) as f64;
    (0..m).map(|k| -FRAC_1_SQRT_2 + k as f64 * h).collect()
}

/// Line integral of the (non-periodic) grid along one ray of the unit square.
fn chord_integral(p: &PixelPhantom, angle: f64, offset: f64) -> f64 {
    let u = ray_direction(angle);
    let normal = [-u[1], u[0]];
    let base = [DOMAIN_CENTER[0] + offset * normal[0], DOMAIN_CENTER[1] + offset * normal[1]];
    let (mut s0, mut s1) = (f64::NEG_INFINITY, f64::INFINITY);
    for k in 0..2 {
        if u[k].abs() < 1e-15 {
            if base[k] < 0.0 || base[k] > 1.0 {
                return 0.0;
            }
        } else {
            let a = (0.0 - base[k]) / u[k];
            let b = (1.0 - base[k]) / u[k];
            s0 = s0.max(a.min(b));
            s1 = s1.min(a.max(b));
        }
    }
    let len = s1 - s0;
    if !(len > 0.0) {
        return 0.0;
    }
    let start = [
        (base[0] + s0 * u[0]).clamp(0.0, 1.0),
        (base[1] + s0 * u[1]).clamp(0.0, 1.0),
    ];
    walk_integral(p, start, [len * u[0], len * u[1]]) * len
}

/// Simulates parallel-beam data of a pixel grid: `m` equispaced rays per
/// angle, each value the exact chord integral through the unit square.
pub fn radon_simulate(p: &PixelPhantom, angles: &[f64], m: usize) -> Result<EuclideanSinogram> {
    if m < 2 {
        return Err(TorusError::invalid(format!("need at least 2 rays per angle, got {m}")));
    }
    let offsets = ray_offsets(m);
    let projections = angles
        .par_iter()
        .map(|&angle| {
            let angle = angle.rem_euclid(PI);
            let values = offsets.iter().map(|&c| chord_integral(p, angle, c)).collect();
            Projection { angle, offsets: offsets.clone(), values }
        })
        .collect();
    EuclideanSinogram::new(projections)
}

/// Ray angles for every direction of a set.
pub fn direction_angles(dirs: &DirectionSet) -> Vec<f64> {
    dirs.iter().map(|d| ray_angle((*d).into())).collect()
}

/// Linear interpolation between the two rays nearest to offset `d`; zero
/// when `d` is not straddled by them.
fn interpolate_rays(offsets: &[f64], values: &[f64], d: f64) -> f64 {
    let m = offsets.len();
    let pos = offsets.partition_point(|&c| c < d);
    let nearest = |cands: &[Option<usize>]| -> Option<usize> {
        let mut best: Option<usize> = None;
        for &k in cands.iter().flatten() {
            match best {
                None => best = Some(k),
                Some(b) => {
                    let (dk, db) = ((offsets[k] - d).abs(), (offsets[b] - d).abs());
                    if dk < db || (dk == db && k < b) {
                        best = Some(k);
                    }
                }
            }
        }
        best
    };
    let idx = |k: isize| if k >= 0 && (k as usize) < m { Some(k as usize) } else { None };
    let Some(k1) = nearest(&[idx(pos as isize - 1), idx(pos as isize)]) else {
        return 0.0;
    };
    let Some(k2) = nearest(&[idx(k1 as isize - 1), idx(k1 as isize + 1)]) else {
        return 0.0;
    };
    let (c1, c2) = (offsets[k1], offsets[k2]);
    let span = (c1 - c2).abs();
    let (e1, e2) = ((c1 - d).abs(), (c2 - d).abs());
    if e1 + e2 > span * (1.0 + 1e-12) {
        return 0.0;
    }
    (e2 / span) * values[k1] + (e1 / span) * values[k2]
}

/// Forward model A_T2: splits the geodesic into chords of the unit square and
/// reads each chord's line integral from the sinogram by interpolating the
/// two nearest rays.
pub fn torus_project(s: &EuclideanSinogram, x: Point, v: IntDirection) -> Result<f64> {
    let proj = s.projection_for(v).ok_or(TorusError::MissingDirection(reduce(v)))?;
    let u = proj.ray_direction();
    let mut acc = 0.0;
    for seg in geodesic_segments(x, v) {
        let m = seg.midpoint();
        let d = cross(u, [m[0] - DOMAIN_CENTER[0], m[1] - DOMAIN_CENTER[1]]);
        acc += interpolate_rays(&proj.offsets, &proj.values, d);
    }
    Ok(acc / v.norm())
}

/// Axis along which a direction's profile is sampled.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    /// `h_v(x) = I_v f(x, 0)`.
    X,
    /// `g_v(y) = I_v f(0, y)`.
    Y,
}

impl Axis {
    /// The sampling axis used for a direction: `y` for `(1, 0)`, `x` otherwise.
    pub fn for_direction(d: ReducedDirection) -> Axis {
        if d == ReducedDirection::HORIZONTAL {
            Axis::Y
        } else {
            Axis::X
        }
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Axis::X => "x",
            Axis::Y => "y",
        })
    }
}

impl FromStr for Axis {
    type Err = TorusError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "x" => Ok(Axis::X),
            "y" => Ok(Axis::Y),
            _ => Err(TorusError::invalid(format!("unknown axis '{s}'"))),
        }
    }
}

/// Placement of sample points within each of the `n_d` sub-intervals.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Rule {
    /// Offsets `l / n_d`.
    Left,
    /// Offsets `l / n_d + 1 / (2 n_d)`.
    Mid,
}

impl Rule {
    pub fn offset(&self, l: usize, n_d: usize) -> f64 {
        let n = n_d as f64;
        match self {
            Rule::Left => l as f64 / n,
            Rule::Mid => (l as f64 + 0.5) / n,
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Rule::Left => "left",
            Rule::Mid => "mid",
        })
    }
}

impl FromStr for Rule {
    type Err = TorusError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "left" => Ok(Rule::Left),
            "mid" => Ok(Rule::Mid),
            _ => Err(TorusError::invalid(format!("unknown rule '{s}' (expected left or mid)"))),
        }
    }
}

/// Samples of one direction's X-ray profile.
#[derive(Clone, Debug, PartialEq)]
pub struct Profile {
    pub direction: ReducedDirection,
    pub axis: Axis,
    pub values: Vec<f64>,
}

/// The torus sinogram: one sampled profile per direction.
#[derive(Clone, Debug, PartialEq)]
pub struct GeodesicSamples {
    n_d: usize,
    rule: Rule,
    profiles: Vec<Profile>,
    index: HashMap<ReducedDirection, usize>,
}

impl GeodesicSamples {
    pub fn new(n_d: usize, rule: Rule, profiles: Vec<Profile>) -> Result<Self> {
        if n_d == 0 {
            return Err(TorusError::invalid("n_d must be >= 1"));
        }
        let mut index = HashMap::with_capacity(profiles.len());
        for (i, p) in profiles.iter().enumerate() {
            if p.values.len() != n_d {
                return Err(TorusError::invalid(format!(
                    "profile {} has {} samples, expected {n_d}",
                    p.direction,
                    p.values.len()
                )));
            }
            if p.axis != Axis::for_direction(p.direction) {
                return Err(TorusError::invalid(format!("profile {} sampled along the wrong axis", p.direction)));
            }
            if p.values.iter().any(|v| !v.is_finite()) {
                return Err(TorusError::invalid(format!("profile {} has non-finite samples", p.direction)));
            }
            if index.insert(p.direction, i).is_some() {
                return Err(TorusError::invalid(format!("duplicate profile {}", p.direction)));
            }
        }
        Ok(GeodesicSamples { n_d, rule, profiles, index })
    }

    pub fn n_d(&self) -> usize {
        self.n_d
    }

    pub fn rule(&self) -> Rule {
        self.rule
    }

    pub fn profiles(&self) -> &[Profile] {
        &self.profiles
    }

    pub fn profile(&self, d: &ReducedDirection) -> Option<&Profile> {
        self.index.get(d).map(|&i| &self.profiles[i])
    }

    pub fn len(&self) -> usize {
        self.profiles.len() * self.n_d
    }

    pub fn is_empty(&self) -> bool {
        self.profiles.is_empty()
    }

    /// Start point of sample `l` of a profile.
    pub fn start_point(&self, axis: Axis, l: usize) -> Point {
        start_point(axis, self.rule.offset(l, self.n_d))
    }
}

fn start_point(axis: Axis, s: f64) -> Point {
    match axis {
        Axis::X => [s, 0.0],
        Axis::Y => [0.0, s],
    }
}

/// Which forward model [`acquire`] evaluates.
#[derive(Clone, Copy)]
pub enum ForwardModel<'a> {
    Pixel(&'a PixelPhantom),
    Quadrature { phantom: &'a dyn AnalyticPhantom, tol: f64 },
    TorusProjection(&'a EuclideanSinogram),
}

impl ForwardModel<'_> {
    pub fn evaluate(&self, x: Point, v: IntDirection) -> Result<f64> {
        match *self {
            ForwardModel::Pixel(p) => Ok(xray_pixel(p, x, v)),
            ForwardModel::Quadrature { phantom, tol } => xray_quadrature(phantom, x, v, tol),
            ForwardModel::TorusProjection(s) => torus_project(s, x, v),
        }
    }
}

/// Samples every direction's profile at `n_d` equispaced start points.
pub fn acquire(model: ForwardModel<'_>, dirs: &DirectionSet, n_d: usize, rule: Rule) -> Result<GeodesicSamples> {
    if n_d == 0 {
        return Err(TorusError::invalid("n_d must be >= 1"));
    }
    let edges = match model {
        ForwardModel::Quadrature { phantom, .. } => phantom.edges(),
        _ => Vec::new(),
    };
    let profiles = dirs
        .as_slice()
        .par_iter()
        .map(|&d| {
            let axis = Axis::for_direction(d);
            let v: IntDirection = d.into();
            if let ForwardModel::TorusProjection(s) = model {
                s.projection_for(v).ok_or(TorusError::MissingDirection(d))?;
            }
            let values = (0..n_d)
                .map(|l| {
                    let x = start_point(axis, rule.offset(l, n_d));
                    match model {
                        ForwardModel::Quadrature { phantom, tol } => {
                            xray_quadrature_with_edges(phantom, &edges, x, v, tol)
                        }
                        _ => model.evaluate(x, v),
                    }
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(Profile { direction: d, axis, values })
        })
        .collect::<Result<Vec<_>>>()?;
    GeodesicSamples::new(n_d, rule, profiles)
}

/// Additive Gaussian noise `N(0, sigma^2)` with a fixed seed.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub sigma: f64,
    pub seed: u64,
}

impl NoiseSpec {
    pub fn new(sigma: f64, seed: u64) -> Result<Self> {
        let spec = NoiseSpec { sigma, seed };
        spec.distribution()?;
        Ok(spec)
    }

    fn distribution(&self) -> Result<Option<Normal<f64>>> {
        if !(self.sigma >= 0.0) || !self.sigma.is_finite() {
            return Err(TorusError::invalid(format!("noise sigma must be finite and >= 0, got {}", self.sigma)));
        }
        if self.sigma == 0.0 {
            return Ok(None);
        }
        Normal::new(0.0, self.sigma).map(Some).map_err(|e| TorusError::invalid(e.to_string()))
    }

    /// Independent stream for one direction (or projection).
    fn stream(&self, index: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(index);
        rng
    }
}

/// Adds independent Gaussian draws to every sample. Sample `l` of the
/// `i`-th profile always receives draw `l` of stream `i`, so the result does
/// not depend on evaluation order.
pub fn add_noise(d: &GeodesicSamples, spec: NoiseSpec) -> Result<GeodesicSamples> {
    let Some(normal) = spec.distribution()? else {
        return Ok(d.clone());
    };
    let mut out = d.clone();
    out.profiles.par_iter_mut().enumerate().for_each(|(i, p)| {
        let mut rng = spec.stream(i as u64);
        for v in &mut p.values {
            *v += normal.sample(&mut rng);
        }
    });
    Ok(out)
}
