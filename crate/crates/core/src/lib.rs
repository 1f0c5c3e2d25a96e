//! Exact verification of Butson-Hadamard matrices, spectra of their
//! associated unitary matrices, the scaled-power conjecture test, and an
//! exhaustive circulant search.

pub mod conjecture;
pub mod cyclotomic;
pub mod error;
pub mod matrices;
pub mod search;
pub mod spectra;

pub use error::{Error, Result};
