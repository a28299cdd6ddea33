//! Quantum harmonic analysis on a finite phase space.
//!
//! The phase space is the torus `Z_N x Z_N` with point measure `w = 1/N` and
//! length unit `l = 1/sqrt(N)`; signals live in `C^N`. On this lattice every
//! convolution identity between functions and operators is a finite sum, so
//! the identities hold to rounding error and can be tested as such.
//!
//! Module map:
//!
//! - [`lattice`]: the torus, domains, rasterized shapes, perimeter.
//! - [`finops`]: time-frequency shifts, parity, operator translation, STFT,
//!   Hermitian eigendecomposition.
//! - [`conv`]: function/operator convolutions and the autocorrelation `S~`.
//! - [`states`]: density operators (rank-one, thermal, mixtures, smoothed)
//!   and the `M*` norm.
//! - [`spectra`]: mixed-state localization operators and their spectra.
//! - [`accumulation`]: Cohen class distributions and accumulated
//!   distributions with their error metrics.
//! - [`experiments`]: seeded identity suite and parameter sweeps used by the
//!   `qha` binary.

pub mod accumulation;
pub mod conv;
pub mod error;
pub mod experiments;
pub mod finops;
pub mod grid;
pub mod lattice;
pub mod spectra;
pub mod states;

pub use error::{Error, Result};
pub use finops::{EigenDecomposition, OperatorMatrix, SignalVector};
pub use grid::PhaseSpaceFunction;
pub use lattice::{Domain, LatticePoint, PhaseLattice, ShapeSpec};
pub use states::DensityOperator;

pub use num_complex::Complex64;
