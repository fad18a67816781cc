//! Radial reduction of the 2D nonlinear Dirac equation: time integration,
//! virial functionals and analytic oracles.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod decay;
pub mod dynamics;
pub mod error;
pub mod grid;
pub mod oracles;
pub mod par;
pub mod spinor;
pub mod virial;
pub mod weights;

pub use error::{Error, Result};
pub use grid::RadialGrid;
pub use spinor::{ModelSpec, Nonlinearity, SpinorField};
pub use weights::WeightFamily;
