//! Transfer matrices, Baxter Q-operators and their functional relations for the
//! twisted six-vertex model, built from explicit `U_q(sl2)` and q-oscillator data.

pub mod bethe;
pub mod error;
pub mod matrix;
pub mod operators;
pub mod qkernel;
pub mod relations;
pub mod reps;
pub mod transfer;

pub use error::{Error, Result};
pub use matrix::CMat;
pub use qkernel::{ModelParams, SpectralPoint};
