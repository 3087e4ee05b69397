//! Independent dense oracles shared by the integration tests.
#![allow(dead_code)]

use std::f64::consts::PI;

use mlcs_core::linalg::{DenseMatrix, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

pub fn random_complex(n: usize, rng: &mut impl Rng) -> Vec<C64> {
    (0..n).map(|_| C64::new(rng.random::<f64>() * 2.0 - 1.0, rng.random::<f64>() * 2.0 - 1.0)).collect()
}

pub fn random_real(n: usize, rng: &mut impl Rng) -> Vec<C64> {
    (0..n).map(|_| c(rng.random::<f64>() * 2.0 - 1.0)).collect()
}

/// Row-major square matrix.
#[derive(Clone, Debug)]
pub struct Mat {
    pub n: usize,
    pub m: usize,
    pub a: Vec<C64>,
}

impl Mat {
    pub fn zeros(n: usize, m: usize) -> Self {
        Self { n, m, a: vec![C64::new(0.0, 0.0); n * m] }
    }

    pub fn identity(n: usize) -> Self {
        let mut out = Self::zeros(n, n);
        for i in 0..n {
            out.a[i * n + i] = c(1.0);
        }
        out
    }

    pub fn at(&self, i: usize, j: usize) -> C64 {
        self.a[i * self.m + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: C64) {
        self.a[i * self.m + j] = v;
    }

    pub fn mul(&self, other: &Mat) -> Mat {
        assert_eq!(self.m, other.n);
        let mut out = Mat::zeros(self.n, other.m);
        for i in 0..self.n {
            for k in 0..self.m {
                let v = self.at(i, k);
                if v == C64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..other.m {
                    out.a[i * other.m + j] += v * other.at(k, j);
                }
            }
        }
        out
    }

    pub fn apply(&self, x: &[C64]) -> Vec<C64> {
        (0..self.n).map(|i| (0..self.m).map(|j| self.at(i, j) * x[j]).sum()).collect()
    }

    pub fn kron(&self, other: &Mat) -> Mat {
        let mut out = Mat::zeros(self.n * other.n, self.m * other.m);
        for i in 0..self.n {
            for j in 0..self.m {
                for k in 0..other.n {
                    for l in 0..other.m {
                        out.set(i * other.n + k, j * other.m + l, self.at(i, j) * other.at(k, l));
                    }
                }
            }
        }
        out
    }

    pub fn adjoint(&self) -> Mat {
        let mut out = Mat::zeros(self.m, self.n);
        for i in 0..self.n {
            for j in 0..self.m {
                out.set(j, i, self.at(i, j).conj());
            }
        }
        out
    }

    pub fn max_diff(&self, other: &DenseMatrix) -> f64 {
        assert_eq!((self.n, self.m), (other.rows(), other.cols()));
        let mut worst: f64 = 0.0;
        for i in 0..self.n {
            for j in 0..self.m {
                worst = worst.max((self.at(i, j) - other.get(i, j)).norm());
            }
        }
        worst
    }
}

/// Unitary DFT, `F[k, j] = exp(-2 pi i jk / n) / sqrt(n)`.
pub fn dft_matrix(n: usize) -> Mat {
    let mut f = Mat::zeros(n, n);
    let s = 1.0 / (n as f64).sqrt();
    for k in 0..n {
        for j in 0..n {
            let t = -2.0 * PI * ((j * k) % n) as f64 / n as f64;
            f.set(k, j, C64::from_polar(s, t));
        }
    }
    f
}

fn sign_changes(row: &[f64]) -> usize {
    row.windows(2).filter(|w| w[0] != w[1]).count()
}

/// Orthonormal Walsh matrix with rows sorted by number of sign changes.
pub fn walsh_matrix(n: usize) -> Mat {
    let mut h = vec![vec![1.0f64]];
    while h.len() < n {
        let mut next = Vec::with_capacity(2 * h.len());
        for row in &h {
            next.push(row.iter().chain(row.iter()).copied().collect::<Vec<_>>());
        }
        for row in &h {
            next.push(row.iter().copied().chain(row.iter().map(|v| -v)).collect::<Vec<_>>());
        }
        h = next;
    }
    h.sort_by_key(|r| sign_changes(r));
    let s = 1.0 / (n as f64).sqrt();
    let mut out = Mat::zeros(n, n);
    for (i, row) in h.iter().enumerate() {
        assert_eq!(sign_changes(row), i);
        for (j, &v) in row.iter().enumerate() {
            out.set(i, j, c(v * s));
        }
    }
    out
}

pub fn haar_filter() -> Vec<f64> {
    vec![0.5f64.sqrt(); 2]
}

/// Daubechies 4-tap lowpass from its closed form.
pub fn db4_filter() -> Vec<f64> {
    let s3 = 3f64.sqrt();
    let d = 4.0 * 2f64.sqrt();
    vec![(1.0 + s3) / d, (3.0 + s3) / d, (3.0 - s3) / d, (1.0 - s3) / d]
}

/// One periodic analysis step on length `len`: lowpass rows on top, highpass
/// (`g_k = (-1)^k h_{L-1-k}`) below, both downsampled by two.
pub fn analysis_step(h: &[f64], len: usize) -> Mat {
    let l = h.len();
    let g: Vec<f64> = (0..l).map(|k| if k % 2 == 0 { h[l - 1 - k] } else { -h[l - 1 - k] }).collect();
    let mut w = Mat::zeros(len, len);
    for i in 0..len / 2 {
        for k in 0..l {
            let col = (2 * i + k) % len;
            w.a[i * len + col] += c(h[k]);
            w.a[(len / 2 + i) * len + col] += c(g[k]);
        }
    }
    w
}

fn embed(block: &Mat, n: usize) -> Mat {
    let mut out = Mat::identity(n);
    for i in 0..block.n {
        for j in 0..block.n {
            out.set(i, j, block.at(i, j));
        }
    }
    out
}

/// Forward 1D wavelet analysis matrix `Phi^*` with `levels` levels.
pub fn wavelet_analysis(h: &[f64], n: usize, levels: usize) -> Mat {
    let mut total = Mat::identity(n);
    let mut len = n;
    for _ in 0..levels {
        total = embed(&analysis_step(h, len), n).mul(&total);
        len /= 2;
    }
    total
}

/// Explicit orthonormal periodic Haar basis, coarse to fine: the constant,
/// then for each scale `s = 1, 2, 4, ...` the `s` normalized box differences.
pub fn haar_basis(n: usize) -> Mat {
    let mut out = Mat::zeros(n, n);
    let s0 = 1.0 / (n as f64).sqrt();
    for j in 0..n {
        out.set(0, j, c(s0));
    }
    let mut row = 1;
    let mut s = 1;
    while s < n {
        let width = n / s;
        let amp = 1.0 / (width as f64).sqrt();
        for k in 0..s {
            for j in 0..width {
                let v = if j < width / 2 { amp } else { -amp };
                out.set(row, k * width + j, c(v));
            }
            row += 1;
        }
        s *= 2;
    }
    out
}

/// Packed 2D coefficient order: LL, then per level the (rows low, cols high),
/// (rows high, cols low) and (high, high) quadrants, each row-major.
pub fn packed_order(side: usize, levels: usize) -> Vec<usize> {
    let s0 = side >> levels;
    let mut order = Vec::new();
    let push = |r0: usize, c0: usize, b: usize, order: &mut Vec<usize>| {
        for r in r0..r0 + b {
            for col in c0..c0 + b {
                order.push(r * side + col);
            }
        }
    };
    push(0, 0, s0, &mut order);
    let mut b = s0;
    while b < side {
        push(0, b, b, &mut order);
        push(b, 0, b, &mut order);
        push(b, b, b, &mut order);
        b *= 2;
    }
    order
}

/// 2D wavelet analysis matrix acting on row-major images and producing the
/// packed coefficient vector.
pub fn wavelet_analysis_2d(h: &[f64], side: usize, levels: usize) -> Mat {
    let n = side * side;
    let mut total = Mat::identity(n);
    let mut s = side;
    for _ in 0..levels {
        // Y = W X W^T on the top-left s x s block, identity elsewhere.
        let w = analysis_step(h, s);
        let mut step = Mat::identity(n);
        for r in 0..s {
            for col in 0..s {
                let out = r * side + col;
                step.set(out, out, c(0.0));
                for a in 0..s {
                    for b in 0..s {
                        let v = w.at(r, a) * w.at(col, b);
                        if v != C64::new(0.0, 0.0) {
                            step.set(out, a * side + b, v);
                        }
                    }
                }
            }
        }
        total = step.mul(&total);
        s /= 2;
    }
    let order = packed_order(side, levels);
    let mut packed = Mat::zeros(n, n);
    for (p, &idx) in order.iter().enumerate() {
        for j in 0..n {
            packed.set(p, j, total.at(idx, j));
        }
    }
    packed
}

pub fn inner(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn norm(a: &[C64]) -> f64 {
    a.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
}

pub fn max_abs_diff(a: &[C64], b: &[C64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// All `k`-subsets of `items`, lexicographic.
pub fn subsets(items: &[usize], k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for (i, &first) in items.iter().enumerate() {
        for mut rest in subsets(&items[i + 1..], k - 1) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

/// Eigenvalues of a real symmetric matrix by cyclic Jacobi rotations, sorted.
pub fn jacobi_eigenvalues(mut a: Vec<Vec<f64>>) -> Vec<f64> {
    let n = a.len();
    for _sweep in 0..100 {
        let off: f64 = (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j))).map(|(i, j)| a[i][j] * a[i][j]).sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let cs = 1.0 / (t * t + 1.0).sqrt();
                let sn = t * cs;
                for k in 0..n {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = cs * akp - sn * akq;
                    a[k][q] = sn * akp + cs * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = cs * apk - sn * aqk;
                    a[q][k] = sn * apk + cs * aqk;
                }
            }
        }
    }
    let mut ev: Vec<f64> = (0..n).map(|i| a[i][i]).collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// Classical restricted isometry constant of order `s` of a real matrix given
/// by columns, by enumerating every support.
pub fn standard_rip(columns: &[Vec<f64>], s: usize) -> f64 {
    let idx: Vec<usize> = (0..columns.len()).collect();
    let mut worst: f64 = 0.0;
    for support in subsets(&idx, s) {
        let gram: Vec<Vec<f64>> = support
            .iter()
            .map(|&i| support.iter().map(|&j| columns[i].iter().zip(&columns[j]).map(|(a, b)| a * b).sum()).collect())
            .collect();
        let ev = jacobi_eigenvalues(gram);
        worst = worst.max((1.0 - ev[0]).max(ev[ev.len() - 1] - 1.0));
    }
    worst
}

/// Real columns of a dense real matrix.
pub fn real_columns(a: &DenseMatrix) -> Vec<Vec<f64>> {
    (0..a.cols()).map(|j| (0..a.rows()).map(|i| a.get(i, j).re).collect()).collect()
}

/// Minimizes `cost . x` subject to `a x = b`, `x >= 0` with the two-phase
/// tableau simplex method and Bland's anti-cycling rule. Returns the optimal
/// value and point, or `None` when infeasible or unbounded.
pub fn simplex_min(a: &[Vec<f64>], b: &[f64], cost: &[f64]) -> Option<(f64, Vec<f64>)> {
    const TOL: f64 = 1e-11;
    let m = a.len();
    let n = cost.len();
    let width = n + m + 1;
    let mut t: Vec<Vec<f64>> = (0..m)
        .map(|i| {
            let s = if b[i] < 0.0 { -1.0 } else { 1.0 };
            let mut row = vec![0.0; width];
            for j in 0..n {
                row[j] = s * a[i][j];
            }
            row[n + i] = 1.0;
            row[width - 1] = s * b[i];
            row
        })
        .collect();
    let mut basis: Vec<usize> = (n..n + m).collect();

    let pivot = |t: &mut Vec<Vec<f64>>, basis: &mut Vec<usize>, r: usize, col: usize| {
        let p = t[r][col];
        t[r].iter_mut().for_each(|v| *v /= p);
        let pivot_row = t[r].clone();
        for (i, row) in t.iter_mut().enumerate() {
            if i != r && row[col] != 0.0 {
                let f = row[col];
                row.iter_mut().zip(&pivot_row).for_each(|(v, pv)| *v -= f * pv);
            }
        }
        basis[r] = col;
    };

    // Runs the simplex loop for `costs` over the allowed columns.
    let optimize = |t: &mut Vec<Vec<f64>>, basis: &mut Vec<usize>, costs: &[f64], allowed: usize| -> bool {
        loop {
            let entering = (0..allowed).find(|&j| {
                if basis.contains(&j) {
                    return false;
                }
                let reduced = costs[j] - (0..m).map(|i| costs[basis[i]] * t[i][j]).sum::<f64>();
                reduced < -TOL
            });
            let Some(col) = entering else { return true };
            let mut leave: Option<(f64, usize, usize)> = None;
            for i in 0..m {
                if t[i][col] > TOL {
                    let ratio = t[i][width - 1] / t[i][col];
                    let better = match leave {
                        None => true,
                        Some((r, _, b)) => ratio < r - TOL || ((ratio - r).abs() <= TOL && basis[i] < b),
                    };
                    if better {
                        leave = Some((ratio, i, basis[i]));
                    }
                }
            }
            let Some((_, r, _)) = leave else { return false };
            pivot(t, basis, r, col);
        }
    };

    let mut phase1 = vec![0.0; n + m];
    phase1[n..].iter_mut().for_each(|v| *v = 1.0);
    optimize(&mut t, &mut basis, &phase1, n + m);
    let infeasibility: f64 = (0..m).filter(|&i| basis[i] >= n).map(|i| t[i][width - 1]).sum();
    if infeasibility > 1e-8 {
        return None;
    }
    for r in 0..m {
        if basis[r] >= n {
            if let Some(col) = (0..n).find(|&j| t[r][j].abs() > TOL && !basis.contains(&j)) {
                pivot(&mut t, &mut basis, r, col);
            }
        }
    }
    let mut phase2 = cost.to_vec();
    phase2.extend(std::iter::repeat_n(0.0, m));
    if !optimize(&mut t, &mut basis, &phase2, n) {
        return None;
    }
    let mut x = vec![0.0; n];
    for i in 0..m {
        if basis[i] < n {
            x[basis[i]] = t[i][width - 1];
        }
    }
    Some((cost.iter().zip(&x).map(|(c, v)| c * v).sum(), x))
}

/// `min ||c||_1` subject to `a c = y` for real data, as the split linear
/// program `c = u - v`, `u, v >= 0`.
pub fn l1_min_oracle(a: &[Vec<f64>], y: &[f64]) -> Option<(f64, Vec<f64>)> {
    let n = a[0].len();
    let split: Vec<Vec<f64>> =
        a.iter().map(|row| row.iter().copied().chain(row.iter().map(|v| -v)).collect()).collect();
    let (value, uv) = simplex_min(&split, y, &vec![1.0; 2 * n])?;
    Some((value, (0..n).map(|i| uv[i] - uv[n + i]).collect()))
}
