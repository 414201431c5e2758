//! Fourier side of the method.
//!
//! A geodesic profile sampled at `n_d` points is turned into Fourier
//! coefficients with a 1/N-normalized DFT; by the slice identity, the DFT
//! bin `k1` of the profile of a direction perpendicular to `k` is `f^(k)`.
//! The coefficient table is then filtered and evaluated as a trigonometric
//! polynomial at arbitrary points.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Result, TorusError};
use crate::forward::{Axis, GeodesicSamples, Rule};
use crate::lattice::{perp_direction, DirectionSet, FourierIndex, Point, ReducedDirection};
use crate::phantom::PixelPhantom;

/// `DFT(f)_k = (1/N) sum_l f_l exp(-2 pi i k l / N)` for `k = 0..N-1`.
pub fn dft_1d(values: &[Complex64]) -> Result<Vec<Complex64>> {
    if values.is_empty() {
        return Err(TorusError::invalid("DFT of an empty sequence"));
    }
    let n = values.len();
    let mut buf = values.to_vec();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let scale = 1.0 / n as f64;
    buf.iter_mut().for_each(|z| *z *= scale);
    Ok(buf)
}

/// Direct `O(N^2)` evaluation of the same transform.
pub fn dft_naive(values: &[Complex64]) -> Result<Vec<Complex64>> {
    if values.is_empty() {
        return Err(TorusError::invalid("DFT of an empty sequence"));
    }
    let n = values.len();
    Ok((0..n).map(|k| dft_bin(values, k as i64)).collect())
}

/// Single DFT bin; `k` is read modulo `N`.
pub fn dft_bin(values: &[Complex64], k: i64) -> Complex64 {
    let n = values.len();
    let k = k.rem_euclid(n as i64) as usize;
    let mut acc = Complex64::new(0.0, 0.0);
    for (l, v) in values.iter().enumerate() {
        // Reduce k*l mod N first to keep the angle small and exact.
        let kl = (k * l) % n;
        acc += v * Complex64::cis(-2.0 * PI * kl as f64 / n as f64);
    }
    acc / n as f64
}

/// Fourier coefficients on the lattice disc `B_r = {k : |k| <= r}`.
#[derive(Clone, Debug, PartialEq)]
pub struct FourierTable {
    radius: f64,
    half: i64,
    real: bool,
    keys: Vec<FourierIndex>,
    coeffs: Vec<Complex64>,
}

/// The lattice points of `B_r`, ordered by `(|k|, k1, k2)`.
pub fn disc_indices(r: f64) -> Vec<FourierIndex> {
    let half = r.floor() as i64;
    let r2 = r * r;
    let mut keys = Vec::new();
    for k1 in -half..=half {
        for k2 in -half..=half {
            if ((k1 * k1 + k2 * k2) as f64) <= r2 {
                keys.push(FourierIndex::new(k1, k2));
            }
        }
    }
    keys.sort_by_key(|k| (k.norm_sq(), k.k1, k.k2));
    keys
}

impl FourierTable {
    pub fn zeros(r: f64) -> Result<Self> {
        if !(r >= 0.0) || !r.is_finite() {
            return Err(TorusError::invalid(format!("table radius must be finite and >= 0, got {r}")));
        }
        let half = r.floor() as i64;
        let side = (2 * half + 1) as usize;
        Ok(FourierTable {
            radius: r,
            half,
            real: false,
            keys: disc_indices(r),
            coeffs: vec![Complex64::new(0.0, 0.0); side * side],
        })
    }

    /// Table over `B_r` filled from `(k, value)` pairs; keys outside the disc
    /// are rejected and missing keys read zero.
    pub fn from_entries(r: f64, entries: impl IntoIterator<Item = (FourierIndex, Complex64)>) -> Result<Self> {
        let mut t = FourierTable::zeros(r)?;
        for (k, z) in entries {
            t.set(k, z)?;
        }
        Ok(t)
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// Largest `|k1|` (and `|k2|`) present.
    pub fn half_width(&self) -> i64 {
        self.half
    }

    pub fn is_real(&self) -> bool {
        self.real
    }

    pub fn set_real(&mut self, real: bool) {
        self.real = real;
    }

    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }

    pub fn contains(&self, k: FourierIndex) -> bool {
        (k.norm_sq() as f64) <= self.radius * self.radius
    }

    #[inline]
    fn slot(&self, k: FourierIndex) -> usize {
        let side = 2 * self.half + 1;
        ((k.k1 + self.half) * side + (k.k2 + self.half)) as usize
    }

    pub fn get(&self, k: FourierIndex) -> Option<Complex64> {
        self.contains(k).then(|| self.coeffs[self.slot(k)])
    }

    pub fn set(&mut self, k: FourierIndex, z: Complex64) -> Result<()> {
        if !self.contains(k) {
            return Err(TorusError::invalid(format!("({}, {}) lies outside B_{}", k.k1, k.k2, self.radius)));
        }
        if !z.is_finite() {
            return Err(TorusError::invalid(format!("non-finite coefficient at ({}, {})", k.k1, k.k2)));
        }
        let s = self.slot(k);
        self.coeffs[s] = z;
        Ok(())
    }

    pub fn keys(&self) -> &[FourierIndex] {
        &self.keys
    }

    /// Entries in key order.
    pub fn iter(&self) -> impl Iterator<Item = (FourierIndex, Complex64)> + '_ {
        self.keys.iter().map(move |&k| (k, self.coeffs[self.slot(k)]))
    }

    /// Entry-wise map over the coefficients, keeping the real flag.
    pub fn map(&self, mut f: impl FnMut(FourierIndex, Complex64) -> Complex64) -> FourierTable {
        let mut out = self.clone();
        for &k in &self.keys {
            let s = self.slot(k);
            out.coeffs[s] = f(k, self.coeffs[s]);
        }
        out
    }

    /// Replaces `f^(k)` by the mean of `f^(k)` and `conj(f^(-k))` and flags
    /// the table real.
    pub fn symmetrize(&mut self) {
        let orig = self.coeffs.clone();
        for &k in &self.keys {
            let (s, m) = (self.slot(k), self.slot(k.neg()));
            self.coeffs[s] = 0.5 * (orig[s] + orig[m].conj());
        }
        self.real = true;
    }

    /// Largest entry-wise distance to another table over the union of keys.
    pub fn max_abs_diff(&self, other: &FourierTable) -> f64 {
        let zero = Complex64::new(0.0, 0.0);
        let a = self.iter().map(|(k, z)| (z - other.get(k).unwrap_or(zero)).norm());
        let b = other.iter().filter(|(k, _)| !self.contains(*k)).map(|(_, z)| z.norm());
        a.chain(b).fold(0.0, f64::max)
    }
}

/// Slice-supported data on `Z^2 x Q`: entries `(k, v)` with `k . v = 0` and
/// one shared value for `k = 0`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct DataTable {
    zero: Complex64,
    entries: BTreeMap<(FourierIndex, ReducedDirection), Complex64>,
}

impl DataTable {
    pub fn new() -> Self {
        DataTable::default()
    }

    pub fn zero(&self) -> Complex64 {
        self.zero
    }

    pub fn set_zero(&mut self, z: Complex64) {
        self.zero = z;
    }

    /// Stores `g^(k, v)`; fails off the slice `k . v = 0` and for `k = 0`.
    pub fn insert(&mut self, k: FourierIndex, v: ReducedDirection, z: Complex64) -> Result<()> {
        if k.is_zero() {
            return Err(TorusError::invalid("the k = 0 entry is shared; use set_zero"));
        }
        if v.dot(k) != 0 {
            return Err(TorusError::invalid(format!("({}, {}) is not perpendicular to {v}", k.k1, k.k2)));
        }
        self.entries.insert((k, v), z);
        Ok(())
    }

    pub fn get(&self, k: FourierIndex, v: ReducedDirection) -> Option<Complex64> {
        if k.is_zero() {
            return Some(self.zero);
        }
        self.entries.get(&(k, v)).copied()
    }

    pub fn entries(&self) -> impl Iterator<Item = (FourierIndex, ReducedDirection, Complex64)> + '_ {
        self.entries.iter().map(|(&(k, v), &z)| (k, v, z))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// `self - other` over the union of entries.
    pub fn sub(&self, other: &DataTable) -> DataTable {
        let mut out = self.clone();
        out.zero -= other.zero;
        for (&key, &z) in &other.entries {
            *out.entries.entry(key).or_default() -= z;
        }
        out
    }

    pub fn scale(&self, c: f64) -> DataTable {
        DataTable {
            zero: self.zero * c,
            entries: self.entries.iter().map(|(&key, &z)| (key, z * c)).collect(),
        }
    }
}

/// Which profile and DFT index carry `f^(k)`.
fn locate(k: FourierIndex) -> (ReducedDirection, i64) {
    if k.is_zero() {
        return (ReducedDirection::HORIZONTAL, 0);
    }
    let v = perp_direction(k).expect("k is non-zero");
    match Axis::for_direction(v) {
        Axis::Y => (v, k.k2),
        Axis::X => (v, k.k1),
    }
}

fn check_alias(index: i64, n_d: usize, allow_aliasing: bool) -> Result<()> {
    if !allow_aliasing && 2 * index.unsigned_abs() >= n_d as u64 {
        return Err(TorusError::Aliasing { index, n_d });
    }
    Ok(())
}

fn rule_phase(rule: Rule, index: i64, n_d: usize) -> Complex64 {
    match rule {
        Rule::Left => Complex64::new(1.0, 0.0),
        Rule::Mid => Complex64::cis(-PI * index as f64 / n_d as f64),
    }
}

/// Estimate of `f^(k)` from the sampled profile of the direction
/// perpendicular to `k` (left rule: the DFT bin; mid rule: the bin times
/// `exp(-pi i k_axis / n_d)`). `k = 0` reads bin 0 of the `(1, 0)` profile.
pub fn coeff_from_samples(d: &GeodesicSamples, k: FourierIndex, allow_aliasing: bool) -> Result<Complex64> {
    let (v, index) = locate(k);
    let profile = d.profile(&v).ok_or(TorusError::MissingDirection(v))?;
    check_alias(index, d.n_d(), allow_aliasing)?;
    let values: Vec<Complex64> = profile.values.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    Ok(rule_phase(d.rule(), index, d.n_d()) * dft_bin(&values, index))
}

/// Reconstructs the coefficient table over `B_r` from geodesic data.
///
/// Every unreachable `k` is reported at once. The data are real, so the
/// table is conjugate-symmetrized and flagged real.
pub fn reconstruct_table(d: &GeodesicSamples, r: f64, allow_aliasing: bool) -> Result<FourierTable> {
    let mut table = FourierTable::zeros(r)?;
    let n_d = d.n_d();
    let mut spectra: Vec<Option<Vec<Complex64>>> = vec![None; d.profiles().len()];
    let index_of: std::collections::HashMap<ReducedDirection, usize> =
        d.profiles().iter().enumerate().map(|(i, p)| (p.direction, i)).collect();
    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_forward(n_d);
    let mut missing = Vec::new();
    for &k in disc_indices(r).iter() {
        let (v, index) = locate(k);
        let Some(&pi) = index_of.get(&v) else {
            missing.push((k.k1, k.k2));
            continue;
        };
        check_alias(index, n_d, allow_aliasing)?;
        let spec = spectra[pi].get_or_insert_with(|| {
            let mut buf: Vec<Complex64> = d.profiles()[pi].values.iter().map(|&x| Complex64::new(x, 0.0)).collect();
            fft.process(&mut buf);
            let scale = 1.0 / n_d as f64;
            buf.iter_mut().for_each(|z| *z *= scale);
            buf
        });
        let bin = spec[index.rem_euclid(n_d as i64) as usize];
        table.set(k, rule_phase(d.rule(), index, n_d) * bin)?;
    }
    if !missing.is_empty() {
        return Err(TorusError::Unreachable(missing));
    }
    table.symmetrize();
    Ok(table)
}

/// The Tikhonov multiplier `(1 + alpha <k>^(2s))^(-1)`.
pub fn tikhonov_factor(k: FourierIndex, alpha: f64, s: f64) -> f64 {
    if alpha == 0.0 {
        return 1.0;
    }
    let b2 = 1.0 + k.norm_sq() as f64;
    1.0 / (1.0 + alpha * b2.powf(s))
}

/// Applies the closed-form Tikhonov filter entry-wise.
pub fn tikhonov_filter(t: &FourierTable, alpha: f64, s: f64) -> Result<FourierTable> {
    if !(alpha >= 0.0) || !alpha.is_finite() {
        return Err(TorusError::invalid(format!("alpha must be finite and >= 0, got {alpha}")));
    }
    if !s.is_finite() {
        return Err(TorusError::invalid("Sobolev index must be finite"));
    }
    if alpha == 0.0 {
        return Ok(t.clone());
    }
    Ok(t.map(|k, z| z * tikhonov_factor(k, alpha, s)))
}

fn twiddles(x: f64, half: i64) -> Vec<Complex64> {
    (-half..=half).map(|j| Complex64::cis(2.0 * PI * (j as f64) * x)).collect()
}

/// Evaluates `sum_k f^(k) exp(2 pi i k.x)` at arbitrary points.
pub fn evaluate_series(t: &FourierTable, points: &[Point]) -> Vec<Complex64> {
    let h = t.half;
    points
        .iter()
        .map(|p| {
            let e1 = twiddles(p[0], h);
            let e2 = twiddles(p[1], h);
            t.iter()
                .map(|(k, z)| z * e1[(k.k1 + h) as usize] * e2[(k.k2 + h) as usize])
                .sum()
        })
        .collect()
}

/// Evaluates the series at the cell centres of an `n x n` grid and keeps
/// the real parts.
pub fn evaluate_grid(t: &FourierTable, n: usize) -> Result<PixelPhantom> {
    if n == 0 {
        return Err(TorusError::invalid("grid size must be >= 1"));
    }
    let h = t.half;
    let side = (2 * h + 1) as usize;
    let centers: Vec<f64> = (0..n).map(|i| (i as f64 + 0.5) / n as f64).collect();
    let tw: Vec<Vec<Complex64>> = centers.iter().map(|&c| twiddles(c, h)).collect();
    // partial[i][k1] = sum_{k2} f^(k1, k2) e^{2 pi i k2 y_i}
    let mut values = vec![0.0; n * n];
    let mut partial = vec![Complex64::new(0.0, 0.0); side];
    for (i, ey) in tw.iter().enumerate() {
        partial.iter_mut().for_each(|z| *z = Complex64::new(0.0, 0.0));
        for (k, z) in t.iter() {
            partial[(k.k1 + h) as usize] += z * ey[(k.k2 + h) as usize];
        }
        for (j, ex) in tw.iter().enumerate() {
            let v: Complex64 = partial.iter().zip(ex).map(|(a, b)| a * b).sum();
            values[i * n + j] = v.re;
        }
    }
    PixelPhantom::new(n, values)
}

/// The slice transform on coefficient tables: `f^(k)` is copied to
/// `(k, perp(k))` when that direction belongs to `dirs`.
pub fn xray_table(t: &FourierTable, dirs: &DirectionSet) -> DataTable {
    let mut out = DataTable::new();
    for (k, z) in t.iter() {
        if k.is_zero() {
            out.set_zero(z);
            continue;
        }
        let v = perp_direction(k).expect("k is non-zero");
        if dirs.contains(&v) {
            out.insert(k, v, z).expect("perpendicular by construction");
        }
    }
    out
}

/// The slice transform with every direction of `Q` available.
pub fn xray_table_full(t: &FourierTable) -> DataTable {
    let mut out = DataTable::new();
    for (k, z) in t.iter() {
        if k.is_zero() {
            out.set_zero(z);
        } else {
            let v = perp_direction(k).expect("k is non-zero");
            out.insert(k, v, z).expect("perpendicular by construction");
        }
    }
    out
}

/// Adjoint of the slice transform, read back on `B_r`.
pub fn adjoint(d: &DataTable, r: f64) -> Result<FourierTable> {
    let mut t = FourierTable::zeros(r)?;
    for k in disc_indices(r) {
        let z = if k.is_zero() {
            d.zero()
        } else {
            let v = perp_direction(k).expect("k is non-zero");
            d.get(k, v).unwrap_or_default()
        };
        t.set(k, z)?;
    }
    Ok(t)
}
