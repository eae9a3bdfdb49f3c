//! Laplace transforms of holomorphic germs at -infinity, their inversion,
//! and exponential partial sums of the resulting hyperfunctions.
//!
//! Germs live on log-type domains `{Re w < rho(|Im w|)}` (see [`geometry`]).
//! [`transform`] maps them to holomorphic functions on the complement of the
//! positive real axis, [`sums`] recovers exponential coefficients from the
//! jumps across that axis and [`analysis`] holds the local estimates used to
//! control those jumps.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod descriptor;
pub mod error;
pub mod fixtures;
pub mod geometry;
pub mod germs;
pub mod quadrature;
pub mod report;
pub mod sums;
pub mod transform;

pub use error::{Error, Result};
pub use geometry::{DomainProfile, GrowthFn};
pub use germs::{ExpSum, ExpTerm, Germ};
pub use num_complex::Complex64;
pub use quadrature::{QuadOptions, QuadResult};
pub use transform::{InverseConfig, LaplaceConfig};

/// Default random seed shared by every sampling routine.
pub const DEFAULT_SEED: u64 = 42;
