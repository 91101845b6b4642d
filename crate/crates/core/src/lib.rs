//! Core algorithms for dense exponential random graph models (ERGMs).
//!
//! The crate is `no_std` (it needs `alloc`) so it can be embedded anywhere;
//! file formats, the command line and parallel orchestration live in the
//! `ergm-lab` companion crate.
//!
//! Modules:
//!
//! - [`model`]: parameterizations, the mean-field maps `Φ`/`φ` and fixed-point
//!   region analysis.
//! - [`graph`]: bit-packed dense graphs, exact edge / two-star / triangle
//!   counts, injective homomorphism counts and O(degree) edge flips.
//! - [`sampler`]: Glauber dynamics, the edge-count preserving swap chain and
//!   exact enumeration for tiny `n`.
//! - [`theory`]: closed-form conditional moments, the edge CLT variance, the
//!   `1/n` edge-density correction and the discretized normal.
//! - [`stats`]: distances between integer laws, the smoothness functional,
//!   normality diagnostics, batch means and log-log rate fits.
#![no_std]
// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(test)]
extern crate std;

mod error;
pub mod graph;
pub(crate) mod math;
pub mod model;
pub mod sampler;
pub mod stats;
pub mod theory;

pub use error::{Error, Result};
pub use graph::{DenseGraph, RunningCounts};
pub use model::{Classification, ErgmParams, RegionReport, SubgraphSpec, Term};
pub use sampler::{ChainConfig, ChainKind, InitialState, SampleRecord};
pub use stats::{Pmf, RateFit};
pub use theory::MomentSet;
