//! Small dense linear algebra: vector helpers, a dense complex matrix and a
//! cyclic Jacobi eigensolver for symmetric / Hermitian matrices.

use alloc::vec;
use alloc::vec::Vec;
use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{bail, Result};
use crate::operators::LinearOperator;

pub type C64 = Complex64;

pub fn norm2(x: &[C64]) -> f64 {
    x.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
}

pub fn norm1(x: &[C64]) -> f64 {
    x.iter().map(|v| v.norm()).sum()
}

pub fn norm_inf(x: &[C64]) -> f64 {
    x.iter().map(|v| v.norm()).fold(0.0, f64::max)
}

/// `<a, b> = sum conj(a_i) b_i`.
pub fn inner(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn dist2(a: &[C64], b: &[C64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt()
}

pub fn to_complex(x: &[f64]) -> Vec<C64> {
    x.iter().map(|&v| C64::new(v, 0.0)).collect()
}

/// Dense complex matrix in row-major order.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![C64::new(0.0, 0.0); rows * cols] }
    }

    pub fn from_rows(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if data.len() != rows * cols {
            bail!(Dimension, "matrix data has {} entries, expected {rows}x{cols}", data.len());
        }
        Ok(Self { rows, cols, data })
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = C64::new(1.0, 0.0);
        }
        m
    }

    /// Materializes `op` column by column. Fails when `rows * cols > cap`.
    pub fn materialize(op: &dyn LinearOperator, cap: usize) -> Result<Self> {
        let (m, n) = (op.rows(), op.cols());
        if m.saturating_mul(n) > cap {
            bail!(Size, "materializing a {m}x{n} operator exceeds the cap of {cap} entries");
        }
        let mut out = Self::zeros(m, n);
        let mut e = vec![C64::new(0.0, 0.0); n];
        let mut col = vec![C64::new(0.0, 0.0); m];
        for j in 0..n {
            e[j] = C64::new(1.0, 0.0);
            op.apply(&e, &mut col);
            e[j] = C64::new(0.0, 0.0);
            for (i, v) in col.iter().enumerate() {
                out.data[i * n + j] = *v;
            }
        }
        Ok(out)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: C64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[C64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn is_real(&self) -> bool {
        self.data.iter().all(|v| v.im == 0.0)
    }

    /// Rows selected (in the given order) into a new matrix.
    pub fn select_rows(&self, rows: &[usize]) -> Self {
        let mut data = Vec::with_capacity(rows.len() * self.cols);
        for &r in rows {
            data.extend_from_slice(self.row(r));
        }
        Self { rows: rows.len(), cols: self.cols, data }
    }

    /// Gram matrix `A_S^* A_S` of the columns in `support`.
    pub fn column_gram(&self, support: &[usize]) -> Vec<C64> {
        let k = support.len();
        let mut g = vec![C64::new(0.0, 0.0); k * k];
        for a in 0..k {
            for b in a..k {
                let mut s = C64::new(0.0, 0.0);
                for i in 0..self.rows {
                    s += self.get(i, support[a]).conj() * self.get(i, support[b]);
                }
                g[a * k + b] = s;
                g[b * k + a] = s.conj();
            }
        }
        g
    }

    pub fn mul_vec(&self, x: &[C64], out: &mut [C64]) {
        for (i, o) in out.iter_mut().enumerate() {
            *o = self.row(i).iter().zip(x).map(|(a, b)| a * b).sum();
        }
    }

    pub fn adjoint_mul_vec(&self, y: &[C64], out: &mut [C64]) {
        out.iter_mut().for_each(|o| *o = C64::new(0.0, 0.0));
        for (i, yi) in y.iter().enumerate() {
            for (o, a) in out.iter_mut().zip(self.row(i)) {
                *o += a.conj() * yi;
            }
        }
    }
}

impl LinearOperator for DenseMatrix {
    fn rows(&self) -> usize {
        self.rows
    }

    fn cols(&self) -> usize {
        self.cols
    }

    fn apply(&self, x: &[C64], out: &mut [C64]) {
        self.mul_vec(x, out);
    }

    fn adjoint(&self, y: &[C64], out: &mut [C64]) {
        self.adjoint_mul_vec(y, out);
    }

    fn real_row_gram(&self) -> Option<Vec<f64>> {
        if !self.is_real() {
            return None;
        }
        let m = self.rows;
        let mut g = vec![0.0; m * m];
        for a in 0..m {
            for b in a..m {
                let s: f64 = self.row(a).iter().zip(self.row(b)).map(|(x, y)| x.re * y.re).sum();
                g[a * m + b] = s;
                g[b * m + a] = s;
            }
        }
        Some(g)
    }
}

/// Eigen-decomposition of a real symmetric matrix by cyclic Jacobi rotations.
#[derive(Debug, Clone)]
pub struct SymmetricEigen {
    /// Eigenvalues in ascending order.
    pub values: Vec<f64>,
    /// Column `i` (row-major `n x n`) is the eigenvector of `values[i]`.
    pub vectors: Vec<f64>,
}

/// Decomposes the symmetric `n x n` row-major matrix `a`.
pub fn symmetric_eigen(a: &[f64], n: usize) -> SymmetricEigen {
    let mut a = a.to_vec();
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    let scale = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    for _sweep in 0..100 {
        let mut off = 0.0;
        for p in 0..n {
            for q in p + 1..n {
                off += a[p * n + q] * a[p * n + q];
            }
        }
        if off.sqrt() <= 1e-15 * scale || scale == 0.0 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p * n + q];
                if apq.abs() <= f64::MIN_POSITIVE {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[i * n + i].total_cmp(&a[j * n + j]));
    let values = order.iter().map(|&i| a[i * n + i]).collect();
    let mut vectors = vec![0.0; n * n];
    for (new, &old) in order.iter().enumerate() {
        for k in 0..n {
            vectors[k * n + new] = v[k * n + old];
        }
    }
    SymmetricEigen { values, vectors }
}

/// Eigenvalues (ascending) of the Hermitian `n x n` row-major matrix `h`.
///
/// Complex matrices are handled through the real symmetric embedding
/// `[[Re, -Im], [Im, Re]]`, whose spectrum is that of `h` with every
/// eigenvalue doubled.
pub fn hermitian_eigenvalues(h: &[C64], n: usize) -> Vec<f64> {
    if h.iter().all(|v| v.im == 0.0) {
        let re: Vec<f64> = h.iter().map(|v| v.re).collect();
        return symmetric_eigen(&re, n).values;
    }
    let m = 2 * n;
    let mut e = vec![0.0; m * m];
    for i in 0..n {
        for j in 0..n {
            let v = h[i * n + j];
            e[i * m + j] = v.re;
            e[(i + n) * m + j + n] = v.re;
            e[i * m + j + n] = -v.im;
            e[(i + n) * m + j] = v.im;
        }
    }
    symmetric_eigen(&e, m).values.into_iter().step_by(2).collect()
}
