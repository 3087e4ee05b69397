use alloc::vec::Vec;
use core::f64::consts::PI;
#[allow(unused_imports)]
use num_traits::Float;

use super::Direction;
use crate::error::{check_pow2, Result};
use crate::linalg::C64;

/// Radix-2 plan for the unitary DFT of a fixed power-of-two length.
///
/// Forward: `X_k = n^{-1/2} sum_j x_j exp(-2 pi i jk / n)`, rows in natural
/// order `k = 0..n`. The adjoint is the inverse.
#[derive(Debug, Clone)]
pub struct Fft {
    n: usize,
    twiddles: Vec<C64>,
    bitrev: Vec<u32>,
}

impl Fft {
    pub fn new(n: usize) -> Result<Self> {
        check_pow2(n, "DFT length")?;
        let twiddles = (0..n / 2)
            .map(|k| {
                let a = -2.0 * PI * k as f64 / n as f64;
                C64::new(a.cos(), a.sin())
            })
            .collect();
        let bits = n.trailing_zeros();
        let bitrev = (0..n as u32).map(|i| i.reverse_bits() >> (32 - bits)).collect();
        Ok(Self { n, twiddles, bitrev })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// In-place unitary transform of `data` (length `n`).
    pub fn process(&self, data: &mut [C64], dir: Direction) {
        let n = self.n;
        debug_assert_eq!(data.len(), n);
        for i in 0..n {
            let j = self.bitrev[i] as usize;
            if j > i {
                data.swap(i, j);
            }
        }
        let mut len = 2;
        while len <= n {
            let half = len / 2;
            let step = n / len;
            for start in (0..n).step_by(len) {
                for j in 0..half {
                    let w = self.twiddles[j * step];
                    let w = if dir == Direction::Adjoint { w.conj() } else { w };
                    let u = data[start + j];
                    let v = data[start + j + half] * w;
                    data[start + j] = u + v;
                    data[start + j + half] = u - v;
                }
            }
            len *= 2;
        }
        let scale = 1.0 / (n as f64).sqrt();
        data.iter_mut().for_each(|v| *v *= scale);
    }

    /// Separable 2D transform of a `n x n` row-major image.
    pub fn process_2d(&self, data: &mut [C64], dir: Direction, scratch: &mut Vec<C64>) {
        let n = self.n;
        debug_assert_eq!(data.len(), n * n);
        for row in data.chunks_exact_mut(n) {
            self.process(row, dir);
        }
        scratch.clear();
        scratch.resize(n, C64::new(0.0, 0.0));
        for c in 0..n {
            for r in 0..n {
                scratch[r] = data[r * n + c];
            }
            self.process(scratch, dir);
            for r in 0..n {
                data[r * n + c] = scratch[r];
            }
        }
    }
}

/// Unitary DFT (or its adjoint) of a power-of-two length signal.
pub fn dft_apply(x: &[C64], dir: Direction) -> Result<Vec<C64>> {
    let plan = Fft::new(x.len())?;
    let mut out = x.to_vec();
    plan.process(&mut out, dir);
    Ok(out)
}

/// Unitary 2D DFT of a `side x side` row-major image.
pub fn dft2_apply(x: &[C64], side: usize, dir: Direction) -> Result<Vec<C64>> {
    super::sensing::check_square(x.len(), side)?;
    let plan = Fft::new(side)?;
    let mut out = x.to_vec();
    plan.process_2d(&mut out, dir, &mut Vec::new());
    Ok(out)
}
