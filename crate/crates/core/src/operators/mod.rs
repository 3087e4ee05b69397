//! Implicit linear operators: unitary DFT, sequency-ordered Walsh–Hadamard,
//! periodic orthonormal wavelets, dense random ensembles, and their
//! composition into subsampled sensing operators.
//!
//! All operators are immutable after construction and take caller-provided
//! output buffers, so one instance can be shared across threads.

mod dense;
mod fft;
mod image;
mod sensing;
mod wavelet;
mod wht;

use alloc::vec::Vec;

pub use dense::{dense_random_operator, DenseEnsemble, Ensemble, DENSE_BUDGET};
pub use fft::{dft2_apply, dft_apply, Fft};
pub use image::Image2D;
pub use sensing::{Identity, SensingOperator, Shape, TransformKind};
pub use wavelet::{dwt2_forward, dwt2_inverse, dwt_forward, dwt_inverse, Wavelet, WaveletKind};
pub use wht::{wht2_apply, wht_apply, Wht};

use crate::linalg::C64;

/// Direction of a unitary transform.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Adjoint,
}

/// A linear map `C^cols -> C^rows` available through matrix-vector products.
pub trait LinearOperator: Send + Sync {
    fn rows(&self) -> usize;
    fn cols(&self) -> usize;

    /// `out = A x`; `x.len() == cols()`, `out.len() == rows()`.
    fn apply(&self, x: &[C64], out: &mut [C64]);

    /// `out = A^* y`; `y.len() == rows()`, `out.len() == cols()`.
    fn adjoint(&self, y: &[C64], out: &mut [C64]);

    /// True when `A A^* = I`, i.e. the rows are orthonormal.
    fn has_orthonormal_rows(&self) -> bool {
        false
    }

    /// Row Gram matrix `A A^*` (row-major `rows x rows`) when `A` is real and
    /// small enough to form it cheaply.
    fn real_row_gram(&self) -> Option<Vec<f64>> {
        None
    }
}
