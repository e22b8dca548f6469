//! Numerical toolkit for spectral perturbation of unitary matrices: spectral
//! calculus, double operator integrals, Schur multiplier norms, the spectral
//! shift function along e^{isA}U and its trace formula.

pub mod assign;
pub mod circlefn;
pub mod cli;
pub mod doi;
pub mod error;
pub mod flowderiv;
pub mod io;
pub mod multiplier;
pub mod spectra;
pub mod ssf;
pub mod suite;

pub use error::{Error, Result};
