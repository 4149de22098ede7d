//! Truncated S-symmetric Fock space over a finite rapidity grid.
//!
//! An `n`-particle amplitude is a dense rank-`n` tensor over grid indices,
//! stored row-major with the first rapidity as the slowest index. The inner
//! product weights every slot with the grid quadrature weight, and the
//! discretized delta function is `δ_ij / w_i`.

mod grid;
mod operator;
mod space;
mod state;
pub mod symmetrizer;
pub mod tensor;

pub use grid::RapidityGrid;
pub use operator::{FockOperator, Monomial, Side};
pub use space::{FockSpace, DEFAULT_MAX_ENTRIES};
pub use state::FockState;
