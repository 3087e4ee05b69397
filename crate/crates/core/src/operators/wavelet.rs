use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{bail, check_pow2, Result};
use crate::linalg::C64;

/// Orthonormal wavelet families with compact support.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum WaveletKind {
    Haar,
    /// Daubechies wavelet with 4 filter taps (2 vanishing moments).
    Db4,
}

impl WaveletKind {
    /// Analysis lowpass filter `h`.
    pub fn lowpass(self) -> Vec<f64> {
        match self {
            WaveletKind::Haar => {
                let r = core::f64::consts::FRAC_1_SQRT_2;
                vec![r, r]
            }
            WaveletKind::Db4 => {
                let s3 = 3f64.sqrt();
                let d = 4.0 * 2f64.sqrt();
                vec![(1.0 + s3) / d, (3.0 + s3) / d, (3.0 - s3) / d, (1.0 - s3) / d]
            }
        }
    }

    /// Quadrature mirror highpass `g_k = (-1)^k h_{L-1-k}`.
    pub fn highpass(self) -> Vec<f64> {
        let h = self.lowpass();
        let l = h.len();
        (0..l).map(|k| if k % 2 == 0 { h[l - 1 - k] } else { -h[l - 1 - k] }).collect()
    }
}

/// A multilevel periodic orthonormal wavelet transform.
///
/// Coefficients are ordered coarse to fine: `(scaling | coarsest detail | ...
/// | finest detail)`. In 2D the detail blocks of each level are stored as
/// (high-horizontal, high-vertical, diagonal) quadrants, each row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Wavelet {
    kind: WaveletKind,
    levels: usize,
    lo: Vec<f64>,
    hi: Vec<f64>,
}

impl Wavelet {
    pub fn new(kind: WaveletKind, levels: usize) -> Result<Self> {
        if levels == 0 {
            bail!(Parameter, "wavelet needs at least one decomposition level");
        }
        Ok(Self { kind, levels, lo: kind.lowpass(), hi: kind.highpass() })
    }

    pub fn kind(&self) -> WaveletKind {
        self.kind
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    fn check_len(&self, n: usize) -> Result<()> {
        check_pow2(n, "wavelet input length")?;
        if self.levels > n.trailing_zeros() as usize {
            bail!(Dimension, "{} levels exceed log2({n})", self.levels);
        }
        Ok(())
    }

    fn analyze_line(&self, line: &mut [C64], tmp: &mut [C64]) {
        let len = line.len();
        let half = len / 2;
        let mask = len - 1;
        for i in 0..half {
            let mut a = C64::new(0.0, 0.0);
            let mut d = C64::new(0.0, 0.0);
            for (k, (&l, &h)) in self.lo.iter().zip(&self.hi).enumerate() {
                let x = line[(2 * i + k) & mask];
                a += x * l;
                d += x * h;
            }
            tmp[i] = a;
            tmp[half + i] = d;
        }
        line.copy_from_slice(&tmp[..len]);
    }

    fn synthesize_line(&self, line: &mut [C64], tmp: &mut [C64]) {
        let len = line.len();
        let half = len / 2;
        let mask = len - 1;
        tmp[..len].iter_mut().for_each(|v| *v = C64::new(0.0, 0.0));
        for i in 0..half {
            let a = line[i];
            let d = line[half + i];
            for (k, (&l, &h)) in self.lo.iter().zip(&self.hi).enumerate() {
                tmp[(2 * i + k) & mask] += a * l + d * h;
            }
        }
        line.copy_from_slice(&tmp[..len]);
    }

    /// In-place forward transform of a power-of-two length signal.
    pub fn forward_in_place(&self, data: &mut [C64]) -> Result<()> {
        self.check_len(data.len())?;
        let mut tmp = vec![C64::new(0.0, 0.0); data.len()];
        let mut len = data.len();
        for _ in 0..self.levels {
            self.analyze_line(&mut data[..len], &mut tmp);
            len /= 2;
        }
        Ok(())
    }

    /// In-place inverse transform.
    pub fn inverse_in_place(&self, data: &mut [C64]) -> Result<()> {
        self.check_len(data.len())?;
        let mut tmp = vec![C64::new(0.0, 0.0); data.len()];
        let mut len = data.len() >> (self.levels - 1);
        for _ in 0..self.levels {
            self.synthesize_line(&mut data[..len], &mut tmp);
            len *= 2;
        }
        Ok(())
    }

    /// Packed-vector position -> image index map for a `side x side` image.
    pub(crate) fn layout_2d(&self, side: usize) -> Result<Vec<u32>> {
        self.check_len(side)?;
        let s0 = side >> self.levels;
        let mut order = Vec::with_capacity(side * side);
        let block = |order: &mut Vec<u32>, r0: usize, c0: usize, b: usize| {
            for r in r0..r0 + b {
                for c in c0..c0 + b {
                    order.push((r * side + c) as u32);
                }
            }
        };
        block(&mut order, 0, 0, s0);
        let mut b = s0;
        while b < side {
            block(&mut order, 0, b, b);
            block(&mut order, b, 0, b);
            block(&mut order, b, b, b);
            b *= 2;
        }
        Ok(order)
    }

    /// Mallat-layout 2D analysis, in place on a `side x side` image.
    fn mallat_forward(&self, img: &mut [C64], side: usize) {
        let mut tmp = vec![C64::new(0.0, 0.0); side];
        let mut line = vec![C64::new(0.0, 0.0); side];
        let mut s = side;
        for _ in 0..self.levels {
            for r in 0..s {
                self.analyze_line(&mut img[r * side..r * side + s], &mut tmp);
            }
            for c in 0..s {
                for r in 0..s {
                    line[r] = img[r * side + c];
                }
                self.analyze_line(&mut line[..s], &mut tmp);
                for r in 0..s {
                    img[r * side + c] = line[r];
                }
            }
            s /= 2;
        }
    }

    fn mallat_inverse(&self, img: &mut [C64], side: usize) {
        let mut tmp = vec![C64::new(0.0, 0.0); side];
        let mut line = vec![C64::new(0.0, 0.0); side];
        let mut s = side >> (self.levels - 1);
        for _ in 0..self.levels {
            for c in 0..s {
                for r in 0..s {
                    line[r] = img[r * side + c];
                }
                self.synthesize_line(&mut line[..s], &mut tmp);
                for r in 0..s {
                    img[r * side + c] = line[r];
                }
            }
            for r in 0..s {
                self.synthesize_line(&mut img[r * side..r * side + s], &mut tmp);
            }
            s *= 2;
        }
    }

    /// 2D analysis into the packed coarse-to-fine vector, using a layout from
    /// [`Wavelet::layout_2d`].
    pub(crate) fn forward_2d_with(&self, img: &mut [C64], side: usize, layout: &[u32], out: &mut [C64]) {
        self.mallat_forward(img, side);
        for (o, &idx) in out.iter_mut().zip(layout) {
            *o = img[idx as usize];
        }
    }

    /// 2D synthesis from a packed coefficient vector into `img`.
    pub(crate) fn inverse_2d_with(&self, coeffs: &[C64], side: usize, layout: &[u32], img: &mut [C64]) {
        for (c, &idx) in coeffs.iter().zip(layout) {
            img[idx as usize] = *c;
        }
        self.mallat_inverse(img, side);
    }
}

/// Forward 1D transform `c = Phi^* x`.
pub fn dwt_forward(x: &[C64], w: &Wavelet) -> Result<Vec<C64>> {
    let mut out = x.to_vec();
    w.forward_in_place(&mut out)?;
    Ok(out)
}

/// Inverse 1D transform `x = Phi c`.
pub fn dwt_inverse(c: &[C64], w: &Wavelet) -> Result<Vec<C64>> {
    let mut out = c.to_vec();
    w.inverse_in_place(&mut out)?;
    Ok(out)
}

/// Forward 2D transform of a square row-major image into packed coefficients.
pub fn dwt2_forward(img: &[C64], side: usize, w: &Wavelet) -> Result<Vec<C64>> {
    super::sensing::check_square(img.len(), side)?;
    let layout = w.layout_2d(side)?;
    let mut work = img.to_vec();
    let mut out = vec![C64::new(0.0, 0.0); img.len()];
    w.forward_2d_with(&mut work, side, &layout, &mut out);
    Ok(out)
}

/// Inverse 2D transform from packed coefficients to a square row-major image.
pub fn dwt2_inverse(coeffs: &[C64], side: usize, w: &Wavelet) -> Result<Vec<C64>> {
    super::sensing::check_square(coeffs.len(), side)?;
    let layout = w.layout_2d(side)?;
    let mut img = vec![C64::new(0.0, 0.0); coeffs.len()];
    w.inverse_2d_with(coeffs, side, &layout, &mut img);
    Ok(img)
}
