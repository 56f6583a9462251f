//! Bogoliubov theory for a weakly interacting Bose gas in the mean-field
//! limit, with two independent oracles: the closed-form torus spectrum and
//! exact diagonalization on a truncated bosonic Fock space.
//!
//! The pipeline is
//! [`hartree::solve_hartree`] → [`onebody::assemble_onebody`] →
//! [`bogoliubov::analyze`], and [`fock::verify_theorem`] compares its
//! predictions with many-body spectra.

pub mod bogoliubov;
pub mod cli;
pub mod domain;
pub mod error;
pub mod fock;
pub mod hartree;
pub mod linalg;
pub mod onebody;
pub mod torus;

pub use error::{Error, Result};
