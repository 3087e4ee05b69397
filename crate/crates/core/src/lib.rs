//! Multilevel compressed sensing: subsampled Fourier and Walsh-Hadamard
//! sensing of wavelet coefficients, sparsity in levels, coherence and
//! RIP-in-levels diagnostics, and l1 recovery.
#![no_std]
extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod coherence;
pub mod error;
pub mod levels;
pub mod linalg;
pub mod operators;
pub mod sampling;
pub mod seed;
pub mod solver;
pub mod sparsity;

pub use error::{Error, Result};
pub use num_complex::Complex64;
