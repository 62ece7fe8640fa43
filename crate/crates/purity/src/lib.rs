//! Operational purity measures and distillation protocols on explicit
//! finite-dimensional quantum states.
//!
//! The crate computes the local purity `kappa = log d - H(rho)`, the one-way
//! distillable local purity `kappa_1way` and the classical deficit (one-way
//! distillable common randomness) on desk-scale states, and executes the
//! constructive protocols behind them: purity concentration through typical
//! subspaces, covering codes with pretty-good-measurement decoders, and the
//! six-step one-way local purity distillation protocol with exact pbit
//! accounting.
//!
//! Everything is dense complex linear algebra over [`nalgebra`]; all rates and
//! entropies are in bits. With the default `parallel` feature the hot loops
//! (optimizer restarts, batch property sweeps, per-bin decoder construction)
//! run on rayon; disabling the feature falls back to sequential execution
//! with identical results.

pub mod covering;
pub mod entropy;
mod error;
pub mod exec;
pub mod inequalities;
pub mod io;
pub mod povm_opt;
pub mod protocol;
pub mod qmat;
pub mod random;
pub mod tol;
pub mod typicality;

pub use error::{Error, Result};
