use alloc::vec;
use alloc::vec::Vec;
use rand::seq::SliceRandom;
use rand::Rng;

use super::dense::{DenseEnsemble, Ensemble};
use super::{Direction, Fft, LinearOperator, Wavelet, Wht};
use crate::error::{bail, check_pow2, Result};
use crate::linalg::C64;
use crate::sampling::{BandMap, SamplingScheme};
use crate::seed;

/// Geometry of the signal domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Shape {
    /// 1D signal of the given length.
    Line(usize),
    /// Square image with the given side, flattened row-major.
    Square(usize),
}

impl Shape {
    pub fn len(self) -> usize {
        match self {
            Shape::Line(n) => n,
            Shape::Square(s) => s * s,
        }
    }

    pub fn is_empty(self) -> bool {
        self.len() == 0
    }
}

pub(crate) fn check_square(len: usize, side: usize) -> Result<()> {
    check_pow2(side, "image side")?;
    if len != side * side {
        bail!(Dimension, "expected {side}x{side} = {} samples, got {len}", side * side);
    }
    Ok(())
}

/// Which measurement transform a sensing operator uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TransformKind {
    /// Row-subsampled unitary DFT (separable in 2D).
    Dft,
    /// Row-subsampled sequency-ordered Walsh–Hadamard (separable in 2D).
    Wht,
    GaussianDense { m: usize, n: usize, seed: u64 },
    BernoulliDense { m: usize, n: usize, seed: u64 },
    /// Random binary ensemble with a fast transform: random signs and a random
    /// permutation of the input, a Walsh–Hadamard transform of the whole
    /// flattened signal, and `m` uniformly chosen rows. Entries are
    /// `+-1/sqrt(n)` and the rows are orthonormal.
    RandomHadamard { m: usize, seed: u64 },
}

#[derive(Debug, Clone)]
enum Engine {
    Fourier(Fft),
    Hadamard(Wht),
    Dense(DenseEnsemble),
    Scrambled { wht: Wht, signs: Vec<f64>, perm: Vec<u32> },
}

/// `A = P_Omega T Phi`: an optional wavelet synthesis `Phi`, a measurement
/// transform `T`, and a row restriction `P_Omega`.
///
/// Acts on wavelet coefficients (or directly on samples when no wavelet is
/// attached). The DFT and WHT kinds never materialize a matrix.
#[derive(Debug, Clone)]
pub struct SensingOperator {
    kind: TransformKind,
    shape: Shape,
    wavelet: Option<Wavelet>,
    layout: Option<Vec<u32>>,
    engine: Engine,
    /// Native transform rows kept, in measurement order. Empty for dense kinds.
    rows: Vec<usize>,
}

impl SensingOperator {
    fn check_shape(shape: Shape, wavelet: Option<&Wavelet>) -> Result<Option<Vec<u32>>> {
        match shape {
            Shape::Line(n) => {
                if let Some(w) = wavelet {
                    // Validates levels against the length.
                    w.forward_in_place(&mut vec![C64::new(0.0, 0.0); n])?;
                } else {
                    check_pow2(n, "signal length")?;
                }
                Ok(None)
            }
            Shape::Square(s) => {
                check_pow2(s, "image side")?;
                wavelet.map(|w| w.layout_2d(s)).transpose()
            }
        }
    }

    /// Subsampled DFT/WHT whose kept rows are the scheme's indices mapped to
    /// native transform rows through `band_map` (identity when `None`).
    pub fn subsampled(
        kind: TransformKind,
        shape: Shape,
        wavelet: Option<Wavelet>,
        scheme: &SamplingScheme,
        band_map: Option<&BandMap>,
    ) -> Result<Self> {
        let n = shape.len();
        if scheme.ambient() != n {
            bail!(Scheme, "scheme covers {} indices but the operator has {n}", scheme.ambient());
        }
        let rows = match band_map {
            Some(b) => {
                if b.len() != n {
                    bail!(Scheme, "band map covers {} rows but the operator has {n}", b.len());
                }
                scheme.omega().iter().map(|&o| b.native(o)).collect()
            }
            None => scheme.omega().to_vec(),
        };
        Self::with_rows(kind, shape, wavelet, rows)
    }

    /// Subsampled DFT/WHT keeping the given native rows, in the given order.
    pub fn with_rows(kind: TransformKind, shape: Shape, wavelet: Option<Wavelet>, rows: Vec<usize>) -> Result<Self> {
        let layout = Self::check_shape(shape, wavelet.as_ref())?;
        let side = match shape {
            Shape::Line(n) | Shape::Square(n) => n,
        };
        let engine = match kind {
            TransformKind::Dft => Engine::Fourier(Fft::new(side)?),
            TransformKind::Wht => Engine::Hadamard(Wht::new(side)?),
            _ => bail!(Parameter, "with_rows needs a DFT or WHT transform, got {kind:?}"),
        };
        let n = shape.len();
        let mut seen = vec![false; n];
        for &r in &rows {
            if r >= n {
                bail!(Scheme, "row index {r} out of range for {n} rows");
            }
            if core::mem::replace(&mut seen[r], true) {
                bail!(Scheme, "row index {r} selected twice");
            }
        }
        Ok(Self { kind, shape, wavelet, layout, engine, rows })
    }

    /// All rows of the DFT/WHT in natural order.
    pub fn full(kind: TransformKind, shape: Shape, wavelet: Option<Wavelet>) -> Result<Self> {
        Self::with_rows(kind, shape, wavelet, (0..shape.len()).collect())
    }

    /// Dense Gaussian/Bernoulli ensemble with `m` rows.
    pub fn dense(ensemble: Ensemble, m: usize, shape: Shape, wavelet: Option<Wavelet>, seed: u64) -> Result<Self> {
        let layout = match (shape, &wavelet) {
            (Shape::Line(_), None) => None,
            _ => Self::check_shape(shape, wavelet.as_ref())?,
        };
        let n = shape.len();
        let dense = DenseEnsemble::new(ensemble, m, n, seed)?;
        let kind = match ensemble {
            Ensemble::Gaussian => TransformKind::GaussianDense { m, n, seed },
            Ensemble::Bernoulli => TransformKind::BernoulliDense { m, n, seed },
        };
        Ok(Self { kind, shape, wavelet, layout, engine: Engine::Dense(dense), rows: Vec::new() })
    }

    /// Fast random binary ensemble (see [`TransformKind::RandomHadamard`]).
    pub fn random_hadamard(m: usize, shape: Shape, wavelet: Option<Wavelet>, seed: u64) -> Result<Self> {
        let layout = Self::check_shape(shape, wavelet.as_ref())?;
        let n = shape.len();
        if m == 0 || m > n {
            bail!(Dimension, "random Hadamard ensemble needs 1 <= m <= n (m = {m}, n = {n})");
        }
        let wht = Wht::new(n)?;
        let mut rng = seed::rng(seed::derive(seed, seed::stream::OPERATOR));
        let signs = (0..n).map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 }).collect();
        let mut perm: Vec<u32> = (0..n as u32).collect();
        perm.shuffle(&mut rng);
        let mut rows = rand::seq::index::sample(&mut rng, n, m).into_vec();
        rows.sort_unstable();
        Ok(Self {
            kind: TransformKind::RandomHadamard { m, seed },
            shape,
            wavelet,
            layout,
            engine: Engine::Scrambled { wht, signs, perm },
            rows,
        })
    }

    pub fn kind(&self) -> TransformKind {
        self.kind
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    pub fn wavelet(&self) -> Option<&Wavelet> {
        self.wavelet.as_ref()
    }

    /// Native transform rows kept (empty for dense ensembles).
    pub fn selected_rows(&self) -> &[usize] {
        &self.rows
    }

    /// `Phi c`: samples from coefficients (identity without a wavelet).
    pub fn synthesize(&self, coeffs: &[C64]) -> Vec<C64> {
        let mut x = coeffs.to_vec();
        self.synthesize_in_place(&mut x);
        x
    }

    fn synthesize_in_place(&self, x: &mut Vec<C64>) {
        let Some(w) = &self.wavelet else { return };
        match (self.shape, &self.layout) {
            (Shape::Line(_), _) => w.inverse_in_place(x).expect("length validated at construction"),
            (Shape::Square(s), Some(layout)) => {
                let mut img = vec![C64::new(0.0, 0.0); x.len()];
                w.inverse_2d_with(x, s, layout, &mut img);
                *x = img;
            }
            (Shape::Square(_), None) => unreachable!("2D wavelet always has a layout"),
        }
    }

    /// `Phi^* x`: coefficients from samples.
    pub fn analyze(&self, samples: &[C64]) -> Vec<C64> {
        let mut x = samples.to_vec();
        let Some(w) = &self.wavelet else { return x };
        match (self.shape, &self.layout) {
            (Shape::Line(_), _) => {
                w.forward_in_place(&mut x).expect("length validated at construction");
                x
            }
            (Shape::Square(s), Some(layout)) => {
                let mut out = vec![C64::new(0.0, 0.0); x.len()];
                w.forward_2d_with(&mut x, s, layout, &mut out);
                out
            }
            (Shape::Square(_), None) => unreachable!("2D wavelet always has a layout"),
        }
    }

    /// Applies `T` (without restriction) to samples in place.
    fn transform(&self, x: &mut [C64], dir: Direction) {
        let mut scratch = Vec::new();
        match (&self.engine, self.shape) {
            (Engine::Fourier(f), Shape::Line(_)) => f.process(x, dir),
            (Engine::Fourier(f), Shape::Square(_)) => f.process_2d(x, dir, &mut scratch),
            (Engine::Hadamard(h), Shape::Line(_)) => h.process(x, &mut scratch),
            (Engine::Hadamard(h), Shape::Square(_)) => h.process_2d(x, &mut scratch),
            (Engine::Scrambled { wht, signs, perm }, _) => match dir {
                Direction::Forward => {
                    let permuted: Vec<C64> = perm.iter().map(|&p| x[p as usize] * signs[p as usize]).collect();
                    x.copy_from_slice(&permuted);
                    wht.process_natural(x);
                }
                Direction::Adjoint => {
                    wht.process_natural(x);
                    let mut back = vec![C64::new(0.0, 0.0); x.len()];
                    for (j, &p) in perm.iter().enumerate() {
                        back[p as usize] = x[j] * signs[p as usize];
                    }
                    x.copy_from_slice(&back);
                }
            },
            (Engine::Dense(_), _) => unreachable!("dense ensembles are applied directly"),
        }
    }
}

impl LinearOperator for SensingOperator {
    fn rows(&self) -> usize {
        match &self.engine {
            Engine::Dense(d) => d.rows(),
            _ => self.rows.len(),
        }
    }

    fn cols(&self) -> usize {
        self.shape.len()
    }

    fn apply(&self, c: &[C64], out: &mut [C64]) {
        let mut x = c.to_vec();
        self.synthesize_in_place(&mut x);
        if let Engine::Dense(d) = &self.engine {
            d.apply(&x, out);
            return;
        }
        self.transform(&mut x, Direction::Forward);
        for (o, &r) in out.iter_mut().zip(&self.rows) {
            *o = x[r];
        }
    }

    fn adjoint(&self, y: &[C64], out: &mut [C64]) {
        if let Engine::Dense(d) = &self.engine {
            d.adjoint(y, out);
        } else {
            out.iter_mut().for_each(|v| *v = C64::new(0.0, 0.0));
            for (&v, &r) in y.iter().zip(&self.rows) {
                out[r] = v;
            }
            self.transform(out, Direction::Adjoint);
        }
        if self.wavelet.is_some() {
            let coeffs = self.analyze(out);
            out.copy_from_slice(&coeffs);
        }
    }

    fn has_orthonormal_rows(&self) -> bool {
        !matches!(self.engine, Engine::Dense(_))
    }

    fn real_row_gram(&self) -> Option<Vec<f64>> {
        // Phi is orthonormal, so (D Phi)(D Phi)^* = D D^T.
        match &self.engine {
            Engine::Dense(d) => d.real_row_gram(),
            _ => None,
        }
    }
}

/// The identity on `C^n`.
#[derive(Debug, Clone, Copy)]
pub struct Identity(pub usize);

impl LinearOperator for Identity {
    fn rows(&self) -> usize {
        self.0
    }

    fn cols(&self) -> usize {
        self.0
    }

    fn apply(&self, x: &[C64], out: &mut [C64]) {
        out.copy_from_slice(x);
    }

    fn adjoint(&self, y: &[C64], out: &mut [C64]) {
        out.copy_from_slice(y);
    }

    fn has_orthonormal_rows(&self) -> bool {
        true
    }
}
