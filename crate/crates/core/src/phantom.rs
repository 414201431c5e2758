//! Test phantoms: the analytic Flag, a pixelized Shepp–Logan head, and the
//! pixel grid type shared by the forward models.

use std::f64::consts::PI;

use crate::error::{Result, TorusError};
use crate::lattice::Point;

/// Square grid of attenuation values on the unit square.
///
/// Cell `(i, j)` covers `[j/n, (j+1)/n) x [i/n, (i+1)/n)`; row `i = 0` is at
/// the bottom. Storage is row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct PixelPhantom {
    n: usize,
    values: Vec<f64>,
}

impl PixelPhantom {
    pub fn new(n: usize, values: Vec<f64>) -> Result<Self> {
        if n == 0 {
            return Err(TorusError::invalid("grid size must be >= 1"));
        }
        if values.len() != n * n {
            return Err(TorusError::invalid(format!(
                "expected {} values for a {n}x{n} grid, got {}",
                n * n,
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(TorusError::invalid(format!("non-finite value at index {i}")));
        }
        Ok(PixelPhantom { n, values })
    }

    pub fn constant(n: usize, c: f64) -> Result<Self> {
        PixelPhantom::new(n, vec![c; n * n])
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let mut values = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                values.push(f(i, j));
            }
        }
        PixelPhantom::new(n, values)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Value of row `i` (y), column `j` (x).
    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n + j]
    }

    /// Centre of cell `(i, j)` as an `(x, y)` point.
    pub fn cell_center(&self, i: usize, j: usize) -> Point {
        let h = 1.0 / self.n as f64;
        [(j as f64 + 0.5) * h, (i as f64 + 0.5) * h]
    }

    /// Cell-wise linear combination `a * self + b * other`.
    pub fn combine(&self, a: f64, other: &PixelPhantom, b: f64) -> Result<PixelPhantom> {
        if other.n != self.n {
            return Err(TorusError::invalid("grids differ in size"));
        }
        let values = self.values.iter().zip(&other.values).map(|(x, y)| a * x + b * y).collect();
        PixelPhantom::new(self.n, values)
    }

    pub fn min_max(&self) -> (f64, f64) {
        self.values
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)))
    }

    /// Integral over the unit square (grid sum times cell area).
    pub fn mass(&self) -> f64 {
        self.values.iter().sum::<f64>() / (self.n * self.n) as f64
    }
}

/// A straight line along which an analytic phantom may jump, given by a point
/// on it and its direction. Quadrature breaks its panels where a geodesic
/// chord crosses such a line.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EdgeLine {
    pub point: Point,
    pub dir: [f64; 2],
}

/// A phantom given in closed form on the unit square.
///
/// Evaluation is deterministic and bounded; points are read in the unit
/// square frame (callers wrap torus points into `[0, 1)` first).
pub trait AnalyticPhantom: Sync {
    fn value(&self, x: f64, y: f64) -> f64;

    fn tag(&self) -> String;

    /// Lines carrying every jump discontinuity; empty for smooth phantoms.
    fn edges(&self) -> Vec<EdgeLine> {
        Vec::new()
    }
}

fn rotate_about_center(x: f64, y: f64, theta: f64) -> (f64, f64) {
    let (s, c) = theta.sin_cos();
    let (dx, dy) = (x - 0.5, y - 0.5);
    (0.5 + c * dx - s * dy, 0.5 + s * dx + c * dy)
}

/// The Flag phantom rotated by `theta` (radians, counterclockwise) about
/// `(0.5, 0.5)`.
pub fn flag_value(x: f64, y: f64, theta: f64) -> f64 {
    let (x, y) = if theta == 0.0 { (x, y) } else { rotate_about_center(x, y, -theta) };
    let inside = x > 0.14 && x < 0.86 && y > 0.28 && y < 0.72;
    if !inside {
        return 0.0;
    }
    if (x > 0.34 && x < 0.46) || (y > 0.44 && y < 0.56) {
        0.3
    } else {
        0.9
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Flag {
    pub theta: f64,
}

impl Flag {
    pub fn new(theta: f64) -> Self {
        Flag { theta }
    }
}

impl AnalyticPhantom for Flag {
    fn value(&self, x: f64, y: f64) -> f64 {
        flag_value(x, y, self.theta)
    }

    fn tag(&self) -> String {
        format!("flag(theta={})", self.theta)
    }

    fn edges(&self) -> Vec<EdgeLine> {
        let (s, c) = self.theta.sin_cos();
        let rot = |p: [f64; 2]| {
            let (x, y) = rotate_about_center(p[0], p[1], self.theta);
            [x, y]
        };
        let mut out = Vec::with_capacity(8);
        for x0 in [0.14, 0.34, 0.46, 0.86] {
            out.push(EdgeLine { point: rot([x0, 0.5]), dir: [-s, c] });
        }
        for y0 in [0.28, 0.44, 0.56, 0.72] {
            out.push(EdgeLine { point: rot([0.5, y0]), dir: [c, s] });
        }
        out
    }
}

/// A constant phantom.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Constant(pub f64);

impl AnalyticPhantom for Constant {
    fn value(&self, _x: f64, _y: f64) -> f64 {
        self.0
    }

    fn tag(&self) -> String {
        format!("constant({})", self.0)
    }
}

/// `exp(-w |x - c|^2)` summed over lattice translates, a smooth function on
/// the torus.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PeriodicGaussian {
    pub center: Point,
    pub width: f64,
}

impl PeriodicGaussian {
    /// The bump `exp(-50 |x - (0.5, 0.5)|^2)` used throughout the tests.
    pub fn standard() -> Self {
        PeriodicGaussian { center: [0.5, 0.5], width: 50.0 }
    }

    fn shifts(&self) -> i32 {
        // For points of the unit square the omitted translates sum below 1e-17.
        ((40.0 / self.width).sqrt() - 0.5).ceil().max(1.0) as i32
    }

    /// Exact Fourier coefficient `(pi/w) exp(-pi^2 |k|^2 / w) e^{-2 pi i k.c}`.
    pub fn coefficient(&self, k1: i64, k2: i64) -> num_complex::Complex64 {
        let w = self.width;
        let ksq = (k1 * k1 + k2 * k2) as f64;
        let amp = PI / w * (-PI * PI * ksq / w).exp();
        let phase = -2.0 * PI * (k1 as f64 * self.center[0] + k2 as f64 * self.center[1]);
        num_complex::Complex64::from_polar(amp, phase)
    }
}

impl AnalyticPhantom for PeriodicGaussian {
    fn value(&self, x: f64, y: f64) -> f64 {
        let m = self.shifts();
        let mut acc = 0.0;
        for i in -m..=m {
            let dx = x - self.center[0] + i as f64;
            for j in -m..=m {
                let dy = y - self.center[1] + j as f64;
                acc += (-self.width * (dx * dx + dy * dy)).exp();
            }
        }
        acc
    }

    fn tag(&self) -> String {
        format!("periodic-gaussian(c=({}, {}), w={})", self.center[0], self.center[1], self.width)
    }
}

/// Wraps a closure as an analytic phantom without edges.
pub struct FnPhantom<F> {
    f: F,
    tag: String,
}

impl<F: Fn(f64, f64) -> f64 + Sync> FnPhantom<F> {
    pub fn new(tag: impl Into<String>, f: F) -> Self {
        FnPhantom { f, tag: tag.into() }
    }
}

impl<F: Fn(f64, f64) -> f64 + Sync> AnalyticPhantom for FnPhantom<F> {
    fn value(&self, x: f64, y: f64) -> f64 {
        (self.f)(x, y)
    }

    fn tag(&self) -> String {
        self.tag.clone()
    }
}

/// Cell-centre sampling of an analytic phantom.
pub fn rasterize(p: &dyn AnalyticPhantom, n: usize) -> Result<PixelPhantom> {
    if n == 0 {
        return Err(TorusError::invalid("grid size must be >= 1"));
    }
    let h = 1.0 / n as f64;
    PixelPhantom::from_fn(n, |i, j| p.value((j as f64 + 0.5) * h, (i as f64 + 0.5) * h))
}

/// Modified (high contrast) Shepp–Logan ellipses on `[-1, 1]^2`:
/// intensity, semi-axes, centre, rotation in degrees.
const SHEPP_LOGAN: [[f64; 6]; 10] = [
    [1.0, 0.69, 0.92, 0.0, 0.0, 0.0],
    [-0.8, 0.6624, 0.8740, 0.0, -0.0184, 0.0],
    [-0.2, 0.1100, 0.3100, 0.22, 0.0, -18.0],
    [-0.2, 0.1600, 0.4100, -0.22, 0.0, 18.0],
    [0.1, 0.2100, 0.2500, 0.0, 0.35, 0.0],
    [0.1, 0.0460, 0.0460, 0.0, 0.1, 0.0],
    [0.1, 0.0460, 0.0460, 0.0, -0.1, 0.0],
    [0.1, 0.0460, 0.0230, -0.08, -0.605, 0.0],
    [0.1, 0.0230, 0.0230, 0.0, -0.606, 0.0],
    [0.1, 0.0230, 0.0460, 0.06, -0.605, 0.0],
];

/// Shepp–Logan intensity at a point of the unit square.
pub fn shepp_logan_value(x: f64, y: f64) -> f64 {
    let (px, py) = (2.0 * x - 1.0, 2.0 * y - 1.0);
    let mut v = 0.0;
    for [amp, a, b, x0, y0, deg] in SHEPP_LOGAN {
        let (s, c) = deg.to_radians().sin_cos();
        let (dx, dy) = (px - x0, py - y0);
        let u = c * dx + s * dy;
        let w = -s * dx + c * dy;
        if (u / a).powi(2) + (w / b).powi(2) <= 1.0 {
            v += amp;
        }
    }
    // Cancellation such as 1 - 0.8 - 0.2 leaves rounding residue.
    v.clamp(0.0, 1.0)
}

pub fn shepp_logan(n: usize) -> Result<PixelPhantom> {
    if n < 16 {
        return Err(TorusError::invalid(format!("Shepp-Logan grid must be >= 16, got {n}")));
    }
    let h = 1.0 / n as f64;
    PixelPhantom::from_fn(n, |i, j| shepp_logan_value((j as f64 + 0.5) * h, (i as f64 + 0.5) * h))
}

/// Bilinear sample at `(x, y)`, reading zero outside the grid.
fn bilinear(p: &PixelPhantom, x: f64, y: f64) -> f64 {
    let n = p.n as f64;
    let fx = x * n - 0.5;
    let fy = y * n - 0.5;
    if fx <= -1.0 || fy <= -1.0 || fx >= n || fy >= n {
        return 0.0;
    }
    let j0 = fx.floor();
    let i0 = fy.floor();
    let (tx, ty) = (fx - j0, fy - i0);
    let (j0, i0) = (j0 as i64, i0 as i64);
    let at = |i: i64, j: i64| {
        if i < 0 || j < 0 || i >= p.n as i64 || j >= p.n as i64 {
            0.0
        } else {
            p.get(i as usize, j as usize)
        }
    };
    let mut v = 0.0;
    if tx < 1.0 && ty < 1.0 {
        v += (1.0 - tx) * (1.0 - ty) * at(i0, j0);
    }
    if tx > 0.0 {
        v += tx * (1.0 - ty) * at(i0, j0 + 1);
    }
    if ty > 0.0 {
        v += (1.0 - tx) * ty * at(i0 + 1, j0);
    }
    if tx > 0.0 && ty > 0.0 {
        v += tx * ty * at(i0 + 1, j0 + 1);
    }
    v
}

/// Rotates a grid image by `theta` (counterclockwise) about `(0.5, 0.5)`
/// with bilinear resampling; samples falling outside the frame read 0.
pub fn rotate_grid(p: &PixelPhantom, theta: f64) -> PixelPhantom {
    if theta == 0.0 {
        return p.clone();
    }
    let n = p.n;
    let h = 1.0 / n as f64;
    let mut values = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let (sx, sy) = rotate_about_center((j as f64 + 0.5) * h, (i as f64 + 0.5) * h, -theta);
            values.push(bilinear(p, sx, sy));
        }
    }
    PixelPhantom { n, values }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flag_examples() {
        assert_eq!(flag_value(0.40, 0.50, 0.0), 0.3);
        assert_eq!(flag_value(0.05, 0.50, 0.0), 0.0);
        assert_eq!(flag_value(0.20, 0.35, 0.0), 0.9);
        assert_eq!(flag_value(0.14, 0.35, 0.0), 0.0);
    }

    #[test]
    fn flag_rotation_quarter_turn() {
        // A point on the horizontal stripe maps onto the rotated vertical one.
        assert_eq!(flag_value(0.5, 0.20, PI / 2.0), flag_value(0.20, 0.5, 0.0));
        assert_eq!(flag_value(0.5, 0.20, PI / 2.0), 0.3);
    }

    #[test]
    fn flag_mirror_symmetry() {
        let mut state = 0x2545F4914F6CDD1Du64;
        let mut next = || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        for _ in 0..1000 {
            let (x, y) = (next(), next());
            assert_eq!(flag_value(x, y, 0.0), flag_value(x, 1.0 - y, 0.0));
        }
    }

    #[test]
    fn flag_edges_cover_discontinuities() {
        let edges = Flag::new(0.3).edges();
        assert_eq!(edges.len(), 8);
        for e in edges {
            let norm = e.dir[0].hypot(e.dir[1]);
            assert!((norm - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn rasterize_constant_and_flag() {
        let g = rasterize(&Constant(0.7), 9).unwrap();
        assert!(g.values().iter().all(|&v| v == 0.7));
        let f = rasterize(&Flag::new(0.0), 512).unwrap();
        // (0.40, 0.50) lies in column 204, row 255 or 256.
        let j = (0.40 * 512.0) as usize;
        let i = (0.50 * 512.0) as usize;
        assert_eq!(f.get(i, j), 0.3);
        let mut levels: Vec<f64> = f.values().to_vec();
        levels.sort_by(f64::total_cmp);
        levels.dedup();
        assert_eq!(levels, vec![0.0, 0.3, 0.9]);
    }

    #[test]
    fn rotated_flag_histogram_matches() {
        let count = |g: &PixelPhantom| {
            let mut c = [0usize; 3];
            for &v in g.values() {
                c[if v == 0.0 { 0 } else if v == 0.3 { 1 } else { 2 }] += 1;
            }
            c
        };
        let a = count(&rasterize(&Flag::new(0.0), 512).unwrap());
        let b = count(&rasterize(&Flag::new(PI / 4.0), 512).unwrap());
        let total = 512 * 512;
        for (x, y) in a.iter().zip(&b) {
            assert!((*x as f64 - *y as f64).abs() <= 0.02 * total as f64);
        }
    }

    #[test]
    fn shepp_logan_basics() {
        assert!(shepp_logan(8).is_err());
        let p = shepp_logan(256).unwrap();
        assert!(p.get(128, 128) > 0.0);
        assert_eq!(p.get(0, 0), 0.0);
        assert!(p.values().iter().all(|&v| (0.0..=1.0).contains(&v)));
    }

    #[test]
    fn shepp_logan_mass_is_resolution_stable() {
        let m1 = shepp_logan(256).unwrap().mass();
        let m2 = shepp_logan(512).unwrap().mass();
        assert!((m1 - m2).abs() <= 0.01 * m2, "{m1} vs {m2}");
    }

    #[test]
    fn rotate_identity_and_full_turn() {
        let p = shepp_logan(64).unwrap();
        assert_eq!(rotate_grid(&p, 0.0), p);
        let q = rotate_grid(&p, 2.0 * PI);
        for (a, b) in p.values().iter().zip(q.values()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    fn bump(n: usize) -> PixelPhantom {
        let g = FnPhantom::new("bump", |x, y| (-40.0 * ((x - 0.5).powi(2) + (y - 0.5).powi(2))).exp());
        rasterize(&g, n).unwrap()
    }

    #[test]
    fn rotate_round_trip_is_close() {
        let p = bump(128);
        let q = rotate_grid(&rotate_grid(&p, PI / 6.0), -PI / 6.0);
        let num: f64 = p.values().iter().zip(q.values()).map(|(a, b)| (a - b).powi(2)).sum();
        let den: f64 = p.values().iter().map(|a| a * a).sum();
        assert!((num / den).sqrt() < 0.05);
    }

    #[test]
    fn rotate_preserves_mass_for_centered_support() {
        let g = FnPhantom::new("disk", |x, y| {
            let r = ((x - 0.5).powi(2) + (y - 0.5).powi(2)).sqrt();
            if r < 0.45 { 1.0 - r } else { 0.0 }
        });
        let p = rasterize(&g, 200).unwrap();
        for theta in [0.3, 1.0, 2.5] {
            let q = rotate_grid(&p, theta);
            assert!((q.mass() - p.mass()).abs() <= 0.03 * p.mass());
        }
    }
}
