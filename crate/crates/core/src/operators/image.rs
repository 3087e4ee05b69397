use alloc::vec::Vec;

use crate::error::{bail, Result};
use crate::linalg::C64;

/// Real-valued image, row-major, nominal range `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Image2D {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl Image2D {
    pub fn new(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 || data.len() != width * height {
            bail!(Dimension, "image {width}x{height} cannot hold {} samples", data.len());
        }
        if data.iter().any(|v| !v.is_finite()) {
            bail!(Parameter, "image samples must be finite");
        }
        Ok(Self { width, height, data })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.width + col]
    }

    /// Side length when the image is square with a power-of-two side.
    pub fn square_side(&self) -> Result<usize> {
        if self.width != self.height {
            bail!(Dimension, "expected a square image, got {}x{}", self.width, self.height);
        }
        crate::error::check_pow2(self.width, "image side")?;
        Ok(self.width)
    }

    pub fn to_complex(&self) -> Vec<C64> {
        crate::linalg::to_complex(&self.data)
    }

    /// Real parts of a complex row-major buffer.
    pub fn from_real_part(width: usize, height: usize, data: &[C64]) -> Result<Self> {
        Self::new(width, height, data.iter().map(|v| v.re).collect())
    }

    /// Copy with every sample clamped to `[0, 1]`.
    pub fn clamped(&self) -> Self {
        Self {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(|v| v.clamp(0.0, 1.0)).collect(),
        }
    }

    /// Averages non-overlapping `factor x factor` blocks.
    pub fn downsample(&self, factor: usize) -> Result<Self> {
        if factor == 0 || !self.width.is_multiple_of(factor) || !self.height.is_multiple_of(factor) {
            bail!(Dimension, "cannot downsample {}x{} by {factor}", self.width, self.height);
        }
        let (w, h) = (self.width / factor, self.height / factor);
        let norm = 1.0 / (factor * factor) as f64;
        let mut out = Vec::with_capacity(w * h);
        for r in 0..h {
            for c in 0..w {
                let mut s = 0.0;
                for dr in 0..factor {
                    let row = &self.data[(r * factor + dr) * self.width..];
                    s += row[c * factor..(c + 1) * factor].iter().sum::<f64>();
                }
                out.push(s * norm);
            }
        }
        Self::new(w, h, out)
    }
}
