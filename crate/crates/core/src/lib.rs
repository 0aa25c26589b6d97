//! Numerical core for studying determining forms of the 2D periodic
//! Navier–Stokes equations.
//!
//! Everything here is `no_std` + `alloc`: fields live in Fourier space on a
//! square periodic box, the nonlinear term is evaluated pseudo-spectrally with
//! 2/3-rule dealiasing, and the time integrators, interpolant operators,
//! nudging experiments and determining-form machinery are built on top.
//! File formats, the command line and parallel sweeps live in the `dform`
//! crate.
//!
//! Normalization: a field `u` is stored as coefficients `û(k)` with
//! `u(x) = Σ_k û(k) exp(i k·x)`, so that `|u|² = L² Σ_k |û(k)|²`.
#![no_std]
#![forbid(unsafe_code)]
// negated comparisons also reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod dform;
pub mod dynamics;
pub mod ensemble;
mod error;
pub mod fft;
pub mod field;
pub mod grid;
pub mod inequality;
pub mod interp;
pub mod ode;
pub mod params;
pub mod spectral;

pub use error::{Error, Result};
pub use field::{SpectralField, VectorField};
pub use grid::Grid;
pub use interp::{InterpolantKind, InterpolantSpec};
pub use params::{ForcingSpec, PhysicalParams};
pub use spectral::{NormBundle, Spectral};
