use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{check_pow2, Result};
use crate::linalg::C64;

/// Orthonormal Walsh–Hadamard transform with rows in sequency order
/// (row `s` has exactly `s` sign changes).
///
/// The sequency-ordered matrix is symmetric and orthogonal, so the transform
/// is its own adjoint and its own inverse.
#[derive(Debug, Clone)]
pub struct Wht {
    n: usize,
    /// `seq_to_nat[s]` is the Sylvester (natural) row holding sequency `s`.
    seq_to_nat: Vec<u32>,
}

impl Wht {
    pub fn new(n: usize) -> Result<Self> {
        check_pow2(n, "Walsh-Hadamard length")?;
        let bits = n.trailing_zeros();
        let seq_to_nat = (0..n as u32)
            .map(|s| {
                let gray = s ^ (s >> 1);
                gray.reverse_bits() >> (32 - bits)
            })
            .collect();
        Ok(Self { n, seq_to_nat })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Unnormalized in-place butterfly in Sylvester order.
    fn butterfly(data: &mut [C64]) {
        let n = data.len();
        let mut h = 1;
        while h < n {
            for start in (0..n).step_by(2 * h) {
                for j in start..start + h {
                    let a = data[j];
                    let b = data[j + h];
                    data[j] = a + b;
                    data[j + h] = a - b;
                }
            }
            h *= 2;
        }
    }

    /// In-place transform; `scratch` is resized as needed.
    pub fn process(&self, data: &mut [C64], scratch: &mut Vec<C64>) {
        debug_assert_eq!(data.len(), self.n);
        Self::butterfly(data);
        let scale = 1.0 / (self.n as f64).sqrt();
        scratch.clear();
        scratch.extend(self.seq_to_nat.iter().map(|&i| data[i as usize] * scale));
        data.copy_from_slice(scratch);
    }

    /// Natural (Sylvester) order transform, orthonormal.
    pub fn process_natural(&self, data: &mut [C64]) {
        Self::butterfly(data);
        let scale = 1.0 / (self.n as f64).sqrt();
        data.iter_mut().for_each(|v| *v *= scale);
    }

    /// Separable 2D sequency-ordered transform of a `n x n` image.
    pub fn process_2d(&self, data: &mut [C64], scratch: &mut Vec<C64>) {
        let n = self.n;
        let mut line = Vec::with_capacity(n);
        for row in data.chunks_exact_mut(n) {
            self.process(row, scratch);
        }
        for c in 0..n {
            line.clear();
            line.extend((0..n).map(|r| data[r * n + c]));
            self.process(&mut line, scratch);
            for r in 0..n {
                data[r * n + c] = line[r];
            }
        }
    }
}

/// Sequency-ordered orthonormal WHT of a power-of-two length signal.
pub fn wht_apply(x: &[C64]) -> Result<Vec<C64>> {
    let plan = Wht::new(x.len())?;
    let mut out = x.to_vec();
    plan.process(&mut out, &mut Vec::new());
    Ok(out)
}

/// Separable sequency-ordered WHT of a `side x side` row-major image.
pub fn wht2_apply(x: &[C64], side: usize) -> Result<Vec<C64>> {
    super::sensing::check_square(x.len(), side)?;
    let plan = Wht::new(side)?;
    let mut out = x.to_vec();
    plan.process_2d(&mut out, &mut Vec::new());
    Ok(out)
}
