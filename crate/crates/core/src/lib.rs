//! X-ray tomography on the flat torus.
//!
//! Line integrals over closed geodesics `x + t v` (`v` an integer vector)
//! are simulated from phantoms, turned into Fourier coefficients through the
//! slice identity, regularized with a Sobolev-Tikhonov filter and evaluated
//! back on a grid.

// Range checks are written `!(x > 0.0)` so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod error;
pub mod forward;
pub mod io;
pub mod lattice;
pub mod phantom;
pub mod quadrature;
pub mod transform;

pub use error::{Result, TorusError};
pub use forward::{
    acquire, add_noise, radon_simulate, torus_project, xray_pixel, xray_quadrature, Axis, EuclideanSinogram,
    ForwardModel, GeodesicSamples, NoiseSpec, Profile, Projection, Rule,
};
pub use lattice::{
    direction_set, geodesic_segments, perp_direction, reduce, DirectionSet, FourierIndex, IntDirection, Point,
    ReducedDirection, Segment,
};
pub use phantom::{rasterize, rotate_grid, shepp_logan, AnalyticPhantom, Flag, PeriodicGaussian, PixelPhantom};
pub use transform::{
    adjoint, coeff_from_samples, dft_1d, evaluate_grid, evaluate_series, reconstruct_table, tikhonov_filter,
    xray_table, DataTable, FourierTable,
};
