//! Numerical laboratory for 1+1-dimensional integrable quantum field theories
//! with a factorizing two-particle scattering function.
//!
//! The crate realizes the Zamolodchikov-Faddeev operators on a truncated,
//! rapidity-discretized S-symmetric Fock space and builds on top of it:
//!
//!   * [`kinematics`]: two-momenta, the shipped scattering functions and the
//!     causal geometry of 1+1-dimensional Minkowski space.
//!   * [`fock`]: grids, S-symmetric states, creation/annihilation operators,
//!     symmetry representations and a lazily composed operator type.
//!   * [`fields`]: smeared fields `φ(f)` and `φ′(f)` and the commutator harness
//!     used by every locality test.
//!   * [`expansion`]: normal-ordered series expansions of operators, in both
//!     directions.
//!   * [`formfactor`]: numerical checks of S-symmetry, S-periodicity, residue
//!     recursion and a growth probe for candidate form-factor families.
//!   * [`ising`]: the explicit local observables of the `S = -1` model.
//!
//! Kernels are data parallel through rayon when the `parallel` feature is
//! enabled (the default). Every reduction uses a fixed chunking, so results
//! are bitwise identical across thread counts and across the sequential build.

// `!(x > 0.0)` also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod expansion;
pub mod fields;
pub mod fock;
pub mod formfactor;
pub mod ising;
pub mod kinematics;
pub mod par;
pub mod quadrature;
pub mod serial;

pub use error::{Error, Result};
pub use num_complex::Complex64;

/// Shorthand used throughout the crate.
pub type C64 = Complex64;

/// Imaginary unit.
pub const I: C64 = C64::new(0.0, 1.0);
