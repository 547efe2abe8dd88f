//! Partition selection primitives under δ-approximate (α, ε)-Rényi
//! differential privacy.
//!
//! A partition selection primitive is a release-probability function
//! `π(n)` of an item's true count with `π(0) = 0`. This crate computes:
//!
//! - exact and approximate Rényi divergences between finite discrete
//!   distributions, including the O(n log n) water-filling algorithm for
//!   the approximate divergence and a KKT certificate for its output
//!   ([`divergence`]);
//! - the optimal unweighted primitive `π*` built by iterating the maximal
//!   step map ([`primitive`]);
//! - approximate-RDP composition, conversion to approximate DP, and
//!   inverse calibration ([`accounting`]);
//! - the SNAPS weighted primitive `ψ_r` / `φ_r` for L^r-bounded
//!   contributions, with a seeded sampler ([`snaps`]);
//! - bounded-support additive-noise mechanisms: privacy evaluation,
//!   the noise distribution that reproduces `π*`, the optimal symmetric
//!   noise via a certified convex solve, and truncated Laplace/Gaussian
//!   baselines ([`additive`]).
//!
//! The crate is `no_std` (with `alloc`); all floating-point math routes
//! through `libm` so results do not depend on the host build.

#![cfg_attr(not(test), no_std)]
#![deny(unsafe_code)]

extern crate alloc;

pub mod accounting;
pub mod additive;
pub mod budget;
pub mod dist;
pub mod divergence;
pub mod error;
pub mod primitive;
pub mod snaps;

pub use budget::{DpBudget, RenyiBudget};
pub use dist::DiscreteDistribution;
pub use error::Error;
pub use primitive::PrimitiveTable;

/// Crate-wide result alias.
pub type Result<T> = core::result::Result<T, Error>;
