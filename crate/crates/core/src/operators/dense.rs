use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;
use rand::Rng;
use rand_distr::StandardNormal;

use super::{LinearOperator, SensingOperator, Shape};
use crate::error::{bail, Result};
use crate::linalg::C64;
use crate::seed;

/// Entry budget (`m * n`) up to which dense ensembles are stored; larger
/// ensembles regenerate their rows from the seed on every application.
pub const DENSE_BUDGET: usize = 1 << 20;

/// Row budget for forming the `m x m` row Gram matrix used by the solver.
const GRAM_ROWS_CAP: usize = 1024;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Ensemble {
    /// i.i.d. `N(0, 1/m)` entries.
    Gaussian,
    /// i.i.d. `+-1/sqrt(m)` entries with equal probability.
    Bernoulli,
}

/// A seeded `m x n` random matrix with i.i.d. entries.
///
/// Row `i` is drawn from its own stream `derive(seed, i)`, so stored and
/// streamed instances with the same seed are the same matrix.
#[derive(Debug, Clone)]
pub struct DenseEnsemble {
    ensemble: Ensemble,
    m: usize,
    n: usize,
    seed: u64,
    stored: Option<Vec<f64>>,
}

impl DenseEnsemble {
    pub fn new(ensemble: Ensemble, m: usize, n: usize, seed: u64) -> Result<Self> {
        Self::with_budget(ensemble, m, n, seed, DENSE_BUDGET)
    }

    pub fn with_budget(ensemble: Ensemble, m: usize, n: usize, seed: u64, budget: usize) -> Result<Self> {
        if m == 0 || n == 0 {
            bail!(Dimension, "dense ensemble needs m, n >= 1 (got {m}x{n})");
        }
        if m > n {
            bail!(Dimension, "dense ensemble needs m <= n (got m = {m}, n = {n})");
        }
        let mut op = Self { ensemble, m, n, seed, stored: None };
        if m.saturating_mul(n) <= budget {
            let mut data = vec![0.0; m * n];
            for (i, row) in data.chunks_exact_mut(n).enumerate() {
                op.fill_row(i, row);
            }
            op.stored = Some(data);
        }
        Ok(op)
    }

    pub fn ensemble(&self) -> Ensemble {
        self.ensemble
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn is_stored(&self) -> bool {
        self.stored.is_some()
    }

    /// Writes row `i` into `row` (length `n`).
    pub fn fill_row(&self, i: usize, row: &mut [f64]) {
        if let Some(data) = &self.stored {
            row.copy_from_slice(&data[i * self.n..(i + 1) * self.n]);
            return;
        }
        let mut rng = seed::rng(seed::derive(self.seed, i as u64));
        let scale = 1.0 / (self.m as f64).sqrt();
        match self.ensemble {
            Ensemble::Gaussian => {
                for v in row.iter_mut() {
                    let z: f64 = rng.sample(StandardNormal);
                    *v = z * scale;
                }
            }
            Ensemble::Bernoulli => {
                for v in row.iter_mut() {
                    *v = if rng.random::<bool>() { scale } else { -scale };
                }
            }
        }
    }

    /// Row-major `m x n` copy of the matrix.
    pub fn to_matrix(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.m * self.n];
        for (i, row) in out.chunks_exact_mut(self.n).enumerate() {
            self.fill_row(i, row);
        }
        out
    }

    fn for_each_row(&self, mut f: impl FnMut(usize, &[f64])) {
        match &self.stored {
            Some(data) => data.chunks_exact(self.n).enumerate().for_each(|(i, r)| f(i, r)),
            None => {
                let mut row = vec![0.0; self.n];
                for i in 0..self.m {
                    self.fill_row(i, &mut row);
                    f(i, &row);
                }
            }
        }
    }
}

impl LinearOperator for DenseEnsemble {
    fn rows(&self) -> usize {
        self.m
    }

    fn cols(&self) -> usize {
        self.n
    }

    fn apply(&self, x: &[C64], out: &mut [C64]) {
        self.for_each_row(|i, row| {
            out[i] = row.iter().zip(x).map(|(a, v)| v * *a).sum();
        });
    }

    fn adjoint(&self, y: &[C64], out: &mut [C64]) {
        out.iter_mut().for_each(|v| *v = C64::new(0.0, 0.0));
        self.for_each_row(|i, row| {
            let yi = y[i];
            for (o, a) in out.iter_mut().zip(row) {
                *o += yi * *a;
            }
        });
    }

    fn real_row_gram(&self) -> Option<Vec<f64>> {
        let data = self.stored.as_ref()?;
        if self.m > GRAM_ROWS_CAP {
            return None;
        }
        let (m, n) = (self.m, self.n);
        let mut g = vec![0.0; m * m];
        for a in 0..m {
            let ra = &data[a * n..(a + 1) * n];
            for b in a..m {
                let rb = &data[b * n..(b + 1) * n];
                let s: f64 = ra.iter().zip(rb).map(|(x, y)| x * y).sum();
                g[a * m + b] = s;
                g[b * m + a] = s;
            }
        }
        Some(g)
    }
}

/// A dense Gaussian or Bernoulli sensing operator on `C^n` (no sparsifying
/// transform attached).
pub fn dense_random_operator(ensemble: Ensemble, m: usize, n: usize, seed: u64) -> Result<SensingOperator> {
    SensingOperator::dense(ensemble, m, Shape::Line(n), None, seed)
}
