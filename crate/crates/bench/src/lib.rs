//! Shared inputs for the benchmarks.

use torusct::*;

/// The flag phantom rasterized at `n`.
pub fn flag_grid(n: usize) -> PixelPhantom {
    rasterize(&Flag::new(0.3), n).expect("valid grid size")
}

/// Pixel-model data of the flag phantom on the radius-`r` direction set.
pub fn flag_samples(n: usize, r: i64, n_d: usize) -> GeodesicSamples {
    let dirs = direction_set(r).expect("valid radius");
    acquire(ForwardModel::Pixel(&flag_grid(n)), &dirs, n_d, Rule::Left).expect("valid acquisition")
}
