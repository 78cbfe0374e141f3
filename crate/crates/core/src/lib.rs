//! Exact harmonic analysis of Boolean functions on `{-1,1}^n`.
//!
//! The dense engine works on truth tables up to a configurable dimension cap
//! using an integer Walsh–Hadamard transform; all coefficients, influences and
//! probabilities come back as exact [`Dyadic`] rationals. Functions too large
//! to tabulate are handled by the Monte Carlo estimators in [`sampler`].

pub mod calculus;
pub mod cube;
pub mod dyadic;
pub mod error;
pub mod families;
pub mod format;
pub mod influence;
pub mod quad;
pub mod sampler;
pub mod verify;

pub use calculus::{DerivativeTable, HeatTable, Restriction};
pub use cube::{BooleanFunction, FourierTable, IndexSet, DEFAULT_MAX_N, HARD_MAX_N};
pub use dyadic::Dyadic;
pub use error::{Error, Result};
