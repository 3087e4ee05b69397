//! Basis pursuit denoising `min ||c||_1 s.t. ||y - A c||_2 <= eta` over
//! implicit operators.
//!
//! The solver is Douglas-Rachford splitting between the l1 norm and the
//! indicator of the residual ball. The ball projection is exact: closed form
//! when `A A^* = I`, through an eigendecomposition of `A A^*` for small real
//! matrices, and by conjugate gradients otherwise. Every returned iterate is
//! therefore feasible up to rounding.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::Sub;
#[allow(unused_imports)]
use num_traits::Float;

use rand::Rng;

use crate::error::{bail, Result};
use crate::linalg::{norm1, norm2, norm_inf, symmetric_eigen, C64};
use crate::operators::{Image2D, LinearOperator, SensingOperator, Shape};
use crate::sparsity::Coefficient;

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    /// Radius of the residual ball, in the units of `y`.
    pub eta: f64,
    pub max_iters: usize,
    /// Residual excess `||y - A c|| - eta` tolerated at convergence, relative
    /// to `max(||y||, eta)`.
    pub tol_feasibility: f64,
    /// Stopping threshold on the relative splitting residual
    /// `||x - z|| / ||z||`.
    pub tol_objective: f64,
    /// l1 prox step. `None` picks `step_scale * ||A^* y||_inf`.
    pub step: Option<f64>,
    pub step_scale: f64,
    /// Relaxation factor in `(0, 2)`.
    pub relaxation: f64,
    /// Record one trace entry every `trace_every` iterations (0 disables).
    pub trace_every: usize,
    pub seed: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            eta: 0.0,
            max_iters: 5000,
            tol_feasibility: 1e-6,
            tol_objective: 1e-6,
            step: None,
            step_scale: 0.1,
            relaxation: 1.0,
            trace_every: 0,
            seed: 0,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.eta >= 0.0 && self.eta.is_finite()) {
            bail!(Parameter, "eta must be finite and >= 0, got {}", self.eta);
        }
        if !(self.tol_feasibility > 0.0 && self.tol_objective > 0.0) {
            bail!(Parameter, "tolerances must be positive");
        }
        if self.max_iters == 0 {
            bail!(Parameter, "max_iters must be at least 1");
        }
        if let Some(s) = self.step {
            if !(s > 0.0 && s.is_finite()) {
                bail!(Parameter, "step must be positive and finite, got {s}");
            }
        }
        if !(self.step_scale > 0.0 && self.step_scale.is_finite()) {
            bail!(Parameter, "step scale must be positive and finite");
        }
        if !(self.relaxation > 0.0 && self.relaxation < 2.0) {
            bail!(Parameter, "relaxation must lie in (0, 2), got {}", self.relaxation);
        }
        Ok(())
    }
}

/// One recorded iteration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceEntry {
    pub iteration: usize,
    pub objective: f64,
    pub feasibility_gap: f64,
    /// Smallest objective seen so far; nonincreasing along the trace.
    pub best_objective: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult {
    pub coefficients: Vec<C64>,
    pub iterations: usize,
    /// `||y - A c||_2 - eta`, recomputed from the returned coefficients.
    pub feasibility_gap: f64,
    /// `||c||_1` (sum of moduli).
    pub objective: f64,
    /// Final relative splitting residual.
    pub residual: f64,
    pub converged: bool,
    pub trace: Vec<TraceEntry>,
}

/// Exact projection onto `{z : ||A z - y|| <= eta}`.
enum Projector {
    Orthonormal,
    /// `A A^* = V diag(values) V^T` for real `A`.
    Spectral { values: Vec<f64>, vectors: Vec<f64> },
    Iterative,
}

const CG_MAX_ITERS: usize = 500;

impl Projector {
    fn for_operator(op: &dyn LinearOperator) -> Self {
        if op.has_orthonormal_rows() {
            Projector::Orthonormal
        } else if let Some(g) = op.real_row_gram() {
            let eig = symmetric_eigen(&g, op.rows());
            Projector::Spectral { values: eig.values, vectors: eig.vectors }
        } else {
            Projector::Iterative
        }
    }

    /// Replaces `w` by its projection and returns the residual norm
    /// `||A z - y||` implied by the projection.
    fn project(&self, op: &dyn LinearOperator, y: &[C64], eta: f64, w: &mut [C64], bufs: &mut Buffers) -> f64 {
        op.apply(w, &mut bufs.m1);
        for (r, yi) in bufs.m1.iter_mut().zip(y) {
            *r -= yi;
        }
        let rnorm = norm2(&bufs.m1);
        if rnorm <= eta {
            return rnorm;
        }
        // z = w - A^* t, with t chosen so that ||A z - y|| = eta.
        let snorm = match self {
            Projector::Orthonormal => {
                let f = 1.0 - eta / rnorm;
                bufs.m1.iter_mut().for_each(|v| *v *= f);
                eta
            }
            Projector::Spectral { values, vectors } => spectral_correction(values, vectors, eta, &mut bufs.m1, &mut bufs.m2),
            Projector::Iterative => iterative_correction(op, eta, bufs),
        };
        op.adjoint(&bufs.m1, &mut bufs.n1);
        for (wi, c) in w.iter_mut().zip(&bufs.n1) {
            *wi -= c;
        }
        snorm
    }
}

struct Buffers {
    m1: Vec<C64>,
    m2: Vec<C64>,
    n1: Vec<C64>,
}

/// Given `r` in `t`, overwrites `t` with `mu (I + mu A A^*)^{-1} r` (or the
/// pseudo-inverse solution for `eta = 0`), returning `||s||` for
/// `s = (I + mu A A^*)^{-1} r`.
fn spectral_correction(values: &[f64], vectors: &[f64], eta: f64, t: &mut [C64], coords: &mut [C64]) -> f64 {
    let m = values.len();
    let lmax = values.last().copied().unwrap_or(0.0).max(0.0);
    let cutoff = lmax * m as f64 * f64::EPSILON;
    for (i, c) in coords.iter_mut().enumerate() {
        *c = (0..m).map(|k| t[k] * vectors[k * m + i]).sum();
    }
    // Components in the null space of A A^* cannot be removed.
    let stuck: f64 = values.iter().zip(coords.iter()).filter(|(l, _)| **l <= cutoff).map(|(_, c)| c.norm_sqr()).sum();
    let s_norm = |mu: f64| -> f64 {
        values
            .iter()
            .zip(coords.iter())
            .map(|(&l, c)| if l <= cutoff { c.norm_sqr() } else { c.norm_sqr() / (1.0 + mu * l).powi(2) })
            .sum::<f64>()
            .sqrt()
    };
    let factors: Vec<f64> = if eta <= stuck.sqrt() {
        values.iter().map(|&l| if l <= cutoff { 0.0 } else { 1.0 / l }).collect()
    } else {
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        while s_norm(hi) > eta && hi < 1e300 {
            hi *= 2.0;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if s_norm(mid) > eta {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= 1e-15 * hi {
                break;
            }
        }
        let mu = hi;
        values.iter().map(|&l| if l <= cutoff { 0.0 } else { mu / (1.0 + mu * l) }).collect()
    };
    for (k, tk) in t.iter_mut().enumerate() {
        *tk = (0..m).map(|i| coords[i] * (vectors[k * m + i] * factors[i])).sum();
    }
    let residual: f64 = values
        .iter()
        .zip(coords.iter())
        .zip(&factors)
        .map(|((&l, c), &f)| (c * (1.0 - f * l)).norm_sqr())
        .sum();
    residual.sqrt()
}

/// Solves `(I + mu A A^*) s = r` or `A A^* t = r` by conjugate gradients.
fn cg_solve(op: &dyn LinearOperator, mu: Option<f64>, rhs: &[C64], x: &mut [C64], bufs_n: &mut [C64], r: &mut [C64], p: &mut [C64], ap: &mut [C64]) {
    let apply = |v: &[C64], out: &mut [C64], tmp: &mut [C64]| {
        op.adjoint(v, tmp);
        op.apply(tmp, out);
        if let Some(mu) = mu { out.iter_mut().zip(v).for_each(|(o, vi)| *o = vi + *o * mu) }
    };
    x.iter_mut().for_each(|v| *v = C64::new(0.0, 0.0));
    r.copy_from_slice(rhs);
    p.copy_from_slice(rhs);
    let bnorm = norm2(rhs);
    let mut rr: f64 = r.iter().map(|v| v.norm_sqr()).sum();
    for _ in 0..CG_MAX_ITERS {
        if rr.sqrt() <= 1e-14 * bnorm {
            break;
        }
        apply(p, ap, bufs_n);
        let pap: f64 = p.iter().zip(ap.iter()).map(|(a, b)| (a.conj() * b).re).sum();
        if pap <= 0.0 {
            break;
        }
        let alpha = rr / pap;
        for i in 0..x.len() {
            x[i] += p[i] * alpha;
            r[i] -= ap[i] * alpha;
        }
        let rr_new: f64 = r.iter().map(|v| v.norm_sqr()).sum();
        let beta = rr_new / rr;
        for i in 0..p.len() {
            p[i] = r[i] + p[i] * beta;
        }
        rr = rr_new;
    }
}

fn iterative_correction(op: &dyn LinearOperator, eta: f64, bufs: &mut Buffers) -> f64 {
    let m = op.rows();
    let rhs = bufs.m1.clone();
    let mut r = vec![C64::new(0.0, 0.0); m];
    let mut p = vec![C64::new(0.0, 0.0); m];
    let mut ap = vec![C64::new(0.0, 0.0); m];
    if eta == 0.0 {
        cg_solve(op, None, &rhs, &mut bufs.m1, &mut bufs.n1, &mut r, &mut p, &mut ap);
        return 0.0;
    }
    let mut s = vec![C64::new(0.0, 0.0); m];
    let mut s_norm = |mu: f64, s: &mut [C64], n1: &mut [C64]| {
        cg_solve(op, Some(mu), &rhs, s, n1, &mut r, &mut p, &mut ap);
        norm2(s)
    };
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    while s_norm(hi, &mut s, &mut bufs.n1) > eta && hi < 1e12 {
        hi *= 2.0;
    }
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if s_norm(mid, &mut s, &mut bufs.n1) > eta {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-12 * hi {
            break;
        }
    }
    let norm = s_norm(hi, &mut s, &mut bufs.n1);
    for (t, si) in bufs.m1.iter_mut().zip(&s) {
        *t = si * hi;
    }
    norm
}

fn soft_threshold(v: C64, t: f64) -> C64 {
    let a = v.norm();
    if a <= t {
        C64::new(0.0, 0.0)
    } else {
        v * ((a - t) / a)
    }
}

/// Solves `min ||c||_1 s.t. ||y - A c||_2 <= eta`.
///
/// Non-convergence within `max_iters` is reported through `converged`, not
/// as an error.
pub fn bpdn_solve(op: &dyn LinearOperator, y: &[C64], cfg: &SolverConfig) -> Result<SolveResult> {
    cfg.validate()?;
    let (m, n) = (op.rows(), op.cols());
    if y.len() != m {
        bail!(Dimension, "operator has {m} rows, got {} measurements", y.len());
    }
    let ynorm = norm2(y);
    let mut bufs = Buffers {
        m1: vec![C64::new(0.0, 0.0); m],
        m2: vec![C64::new(0.0, 0.0); m],
        n1: vec![C64::new(0.0, 0.0); n],
    };

    let mut w = vec![C64::new(0.0, 0.0); n];
    let mut trace = Vec::new();
    if ynorm <= cfg.eta {
        return Ok(finish(op, y, cfg, w, 0, 0.0, true, trace));
    }
    op.adjoint(y, &mut w);
    let step = cfg.step.unwrap_or_else(|| cfg.step_scale * norm_inf(&w).max(f64::MIN_POSITIVE));
    let projector = Projector::for_operator(op);

    let mut z = vec![C64::new(0.0, 0.0); n];
    let mut best = f64::INFINITY;
    let mut residual = f64::INFINITY;
    let mut iterations = 0;
    let mut converged = false;
    for it in 1..=cfg.max_iters {
        iterations = it;
        z.copy_from_slice(&w);
        let snorm = projector.project(op, y, cfg.eta, &mut z, &mut bufs);
        let mut diff2 = 0.0;
        for (wi, zi) in w.iter_mut().zip(&z) {
            let x = soft_threshold(*zi * 2.0 - *wi, step);
            let d = x - zi;
            diff2 += d.norm_sqr();
            *wi += d * cfg.relaxation;
        }
        let znorm = norm2(&z);
        residual = diff2.sqrt() / znorm.max(f64::MIN_POSITIVE);
        if cfg.trace_every > 0 && (it % cfg.trace_every == 0 || it == 1) {
            let objective = norm1(&z);
            best = best.min(objective);
            trace.push(TraceEntry { iteration: it, objective, feasibility_gap: snorm - cfg.eta, best_objective: best });
        }
        if residual <= cfg.tol_objective {
            converged = true;
            break;
        }
    }
    Ok(finish(op, y, cfg, z, iterations, residual, converged, trace))
}

#[allow(clippy::too_many_arguments)]
fn finish(
    op: &dyn LinearOperator,
    y: &[C64],
    cfg: &SolverConfig,
    coefficients: Vec<C64>,
    iterations: usize,
    residual: f64,
    converged: bool,
    trace: Vec<TraceEntry>,
) -> SolveResult {
    let mut ac = vec![C64::new(0.0, 0.0); op.rows()];
    op.apply(&coefficients, &mut ac);
    let miss: f64 = ac.iter().zip(y).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
    let feasibility_gap = miss - cfg.eta;
    let scale = norm2(y).max(cfg.eta).max(f64::MIN_POSITIVE);
    let converged = converged && feasibility_gap <= cfg.tol_feasibility * scale;
    SolveResult { objective: norm1(&coefficients), coefficients, iterations, feasibility_gap, residual, converged, trace }
}

/// A recovered image with the solver diagnostics.
#[derive(Debug, Clone)]
pub struct ImageRecovery {
    /// Real part of the synthesized reconstruction, unclamped.
    pub image: Image2D,
    pub result: SolveResult,
}

impl ImageRecovery {
    /// Copy clamped to `[0, 1]` for display.
    pub fn display(&self) -> Image2D {
        self.image.clamped()
    }
}

/// Solves for wavelet coefficients and synthesizes the image `Phi c`.
pub fn recover_image(op: &SensingOperator, y: &[C64], cfg: &SolverConfig) -> Result<ImageRecovery> {
    let Shape::Square(side) = op.shape() else {
        bail!(Dimension, "image recovery needs a square 2D operator");
    };
    let result = bpdn_solve(op, y, cfg)?;
    let pixels = op.synthesize(&result.coefficients);
    let image = Image2D::from_real_part(side, side, &pixels)?;
    Ok(ImageRecovery { image, result })
}

/// Seeded Gaussian measurement noise scaled to `||e||_2 = eta` exactly.
/// Complex noise has independent real and imaginary parts.
pub fn measurement_noise(len: usize, eta: f64, complex: bool, seed: u64) -> Result<Vec<C64>> {
    if !(eta >= 0.0 && eta.is_finite()) {
        bail!(Parameter, "noise level must be finite and >= 0, got {eta}");
    }
    let mut rng = crate::seed::rng(seed);
    let mut draw = || -> f64 { rng.sample(rand_distr::StandardNormal) };
    let mut e: Vec<C64> =
        (0..len).map(|_| C64::new(draw(), if complex { draw() } else { 0.0 })).collect();
    let norm = norm2(&e);
    let scale = if norm > 0.0 { eta / norm } else { 0.0 };
    e.iter_mut().for_each(|v| *v *= scale);
    Ok(e)
}

/// `100 ||x - x_hat||_2 / ||x||_2`.
pub fn relative_error<T>(x: &[T], x_hat: &[T]) -> Result<f64>
where
    T: Coefficient + Sub<Output = T>,
{
    if x.len() != x_hat.len() {
        bail!(Dimension, "cannot compare {} and {} samples", x.len(), x_hat.len());
    }
    let norm: f64 = x.iter().map(|v| v.modulus().powi(2)).sum::<f64>().sqrt();
    if norm == 0.0 {
        bail!(Parameter, "relative error of a zero reference is undefined");
    }
    let diff: f64 = x.iter().zip(x_hat).map(|(&a, &b)| (a - b).modulus().powi(2)).sum::<f64>().sqrt();
    Ok(100.0 * diff / norm)
}
