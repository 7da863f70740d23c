//! Uniform-in-bandwidth local empirical processes.
//!
//! This crate evaluates the local empirical process
//! `G_n(K, h, z) = sum_i K((Z_i - z) / h^(1/d)) - E K((Z_1 - z) / h^(1/d))`
//! over kernel families, bandwidth nets and spatial grids, realizes the
//! Strassen-type limit ball `{J <= 1}` of its normalized version as a
//! Gram-matrix ellipsoid, and builds exact-constant confidence bands for
//! kernel density estimators. The [`harness`] module runs seeded Monte-Carlo
//! studies of the associated almost-sure limit laws.
//!
//! The crate is `no_std` and needs only `alloc`. File formats, threads and
//! the command line live in the companion `locband` crate.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod bandwidth;
pub mod density;
pub mod error;
pub mod geometry;
pub mod harness;
pub mod kde;
pub mod kernel;
pub mod poisson;
pub mod process;
pub mod quadrature;
pub mod rng;
pub mod sample;
pub mod selectors;
pub mod stats;
pub mod strassen;

pub use bandwidth::{check_crs, make_bandwidth_grid, BandwidthGrid, CrsReport};
pub use density::DensityModel;
pub use error::{Error, Result};
pub use geometry::{enlarge, make_spatial_grid, max_norm, BoxRegion, SpatialGrid};
pub use kernel::{Kernel, KernelFamily, QuadratureRule, Shape};
pub use sample::Sample;
pub use harness::{ExperimentConfig, StudyReport};
pub use strassen::{FiniteFunctional, GramEllipsoid};
