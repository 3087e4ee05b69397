//! Coherence and restricted-isometry diagnostics on materialized operators.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::Range;
#[allow(unused_imports)]
use num_traits::Float;
use rand::Rng;

use crate::error::{bail, Result};
use crate::levels::LevelPartition;
use crate::linalg::{hermitian_eigenvalues, DenseMatrix, C64};
use crate::operators::LinearOperator;
use crate::seed;
use crate::sparsity::SparsityPattern;

/// Largest dimension materialized for coherence computations by default.
pub const DEFAULT_MAX_DIM: usize = 4096;

/// Default cap on the number of supports (times phase patterns) enumerated
/// by the exhaustive estimators.
pub const DEFAULT_ENUMERATION_CAP: u64 = 1 << 24;

/// Materializes `op` when both of its dimensions are at most `max_dim`.
pub fn materialize(op: &dyn LinearOperator, max_dim: usize) -> Result<DenseMatrix> {
    if op.rows() > max_dim || op.cols() > max_dim {
        bail!(Size, "{}x{} operator exceeds the dense cap of {max_dim}", op.rows(), op.cols());
    }
    DenseMatrix::materialize(op, usize::MAX)
}

/// `mu(U) = max |u_ij|^2`.
pub fn mutual_coherence(u: &DenseMatrix) -> f64 {
    block_coherence(u, 0..u.rows(), 0..u.cols())
}

/// Largest squared modulus inside the block `rows x cols`.
pub fn block_coherence(u: &DenseMatrix, rows: Range<usize>, cols: Range<usize>) -> f64 {
    rows.flat_map(|i| u.row(i)[cols.clone()].iter().map(|v| v.norm_sqr()))
        .fold(0.0, f64::max)
}

fn check_partitions(u: &DenseMatrix, rows: &LevelPartition, cols: &LevelPartition) -> Result<()> {
    if rows.total() != u.rows() || cols.total() != u.cols() {
        bail!(
            Dimension,
            "partitions cover {}x{}, matrix is {}x{}",
            rows.total(),
            cols.total(),
            u.rows(),
            u.cols()
        );
    }
    Ok(())
}

/// Local coherence `sqrt(mu(P_j U P_l) mu(P_j U))` of row level `j` against
/// column level `l` (0-based).
pub fn local_coherence(u: &DenseMatrix, rows: &LevelPartition, cols: &LevelPartition, j: usize, l: usize) -> Result<f64> {
    check_partitions(u, rows, cols)?;
    if j >= rows.levels() || l >= cols.levels() {
        bail!(Parameter, "level pair ({j}, {l}) out of range for {}x{} levels", rows.levels(), cols.levels());
    }
    let block = block_coherence(u, rows.range(j), cols.range(l));
    let row_block = block_coherence(u, rows.range(j), 0..u.cols());
    Ok((block * row_block).sqrt())
}

/// Grid of block coherences `mu(U_jl)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoherenceMatrix {
    row_levels: usize,
    col_levels: usize,
    values: Vec<f64>,
}

impl CoherenceMatrix {
    pub fn row_levels(&self) -> usize {
        self.row_levels
    }

    pub fn col_levels(&self) -> usize {
        self.col_levels
    }

    pub fn get(&self, j: usize, l: usize) -> f64 {
        self.values[j * self.col_levels + l]
    }

    /// Row-major values.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }
}

/// Block coherences of `u` for every pair of row and column levels.
pub fn coherence_block_matrix(u: &DenseMatrix, rows: &LevelPartition, cols: &LevelPartition) -> Result<CoherenceMatrix> {
    check_partitions(u, rows, cols)?;
    let mut values = Vec::with_capacity(rows.levels() * cols.levels());
    for rj in rows.ranges() {
        for cl in cols.ranges() {
            values.push(block_coherence(u, rj.clone(), cl));
        }
    }
    Ok(CoherenceMatrix { row_levels: rows.levels(), col_levels: cols.levels(), values })
}

/// Odometer over supports holding exactly `k_l` indices in every level,
/// lexicographic inside each level.
struct LevelSupports {
    ranges: Vec<Range<usize>>,
    picks: Vec<Vec<usize>>,
    done: bool,
}

impl LevelSupports {
    fn new(pattern: &SparsityPattern) -> Self {
        let ranges: Vec<_> = pattern.partition().ranges().collect();
        let picks = ranges.iter().zip(pattern.k()).map(|(r, &k)| (r.start..r.start + k).collect()).collect();
        Self { ranges, picks, done: false }
    }

    fn support(&self) -> Vec<usize> {
        self.picks.iter().flatten().copied().collect()
    }

    /// Advances level `l` to its next combination; false on wrap-around.
    fn step_level(&mut self, l: usize) -> bool {
        let end = self.ranges[l].end;
        let p = &mut self.picks[l];
        let k = p.len();
        for i in (0..k).rev() {
            if p[i] < end - (k - i) {
                p[i] += 1;
                for t in i + 1..k {
                    p[t] = p[t - 1] + 1;
                }
                return true;
            }
        }
        let start = self.ranges[l].start;
        for (t, v) in p.iter_mut().enumerate() {
            *v = start + t;
        }
        false
    }
}

impl Iterator for LevelSupports {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        if self.done {
            return None;
        }
        let current = self.support();
        self.done = !(0..self.picks.len()).rev().any(|l| self.step_level(l));
        Some(current)
    }
}

fn binomial(n: usize, k: usize) -> u64 {
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
        if acc > u64::MAX as u128 {
            return u64::MAX;
        }
    }
    acc as u64
}

/// Number of supports with exactly `k_l` entries in every level.
pub fn support_count(pattern: &SparsityPattern) -> u64 {
    pattern
        .partition()
        .sizes()
        .iter()
        .zip(pattern.k())
        .fold(1u64, |acc, (&n, &k)| acc.saturating_mul(binomial(n, k)))
}

fn random_support(pattern: &SparsityPattern, rng: &mut impl Rng) -> Vec<usize> {
    let mut s = Vec::with_capacity(pattern.total());
    for (r, &k) in pattern.partition().ranges().zip(pattern.k()) {
        let mut pick = rand::seq::index::sample(rng, r.len(), k).into_vec();
        pick.sort_unstable();
        s.extend(pick.into_iter().map(|i| r.start + i));
    }
    s
}

/// How `K_j` or `delta` are computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EstimateMode {
    /// Enumerate every admissible support. `phases` unit-modulus values per
    /// entry are tried for relative sparsities (2 gives real signs).
    Exhaustive { phases: usize, cap: u64 },
    /// Random stratified supports (and random phases), one seeded stream per
    /// trial. Gives a lower bound.
    MonteCarlo { trials: usize, seed: u64 },
}

impl EstimateMode {
    pub fn exhaustive() -> Self {
        EstimateMode::Exhaustive { phases: 2, cap: DEFAULT_ENUMERATION_CAP }
    }

    pub fn monte_carlo(trials: usize, seed: u64) -> Self {
        EstimateMode::MonteCarlo { trials, seed }
    }
}

/// Relative sparsity `K_j` and how it was obtained.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelativeSparsity {
    pub value: f64,
    /// Lower bound or phase-discretized rather than exact.
    pub approximate: bool,
    /// Supports times phase patterns evaluated.
    pub evaluations: u64,
}

fn phase_table(phases: usize) -> Vec<C64> {
    (0..phases)
        .map(|p| match (4 * p) % phases {
            0 if (4 * p / phases).is_multiple_of(4) => C64::new(1.0, 0.0),
            0 if (4 * p / phases) % 4 == 1 => C64::new(0.0, 1.0),
            0 if (4 * p / phases) % 4 == 2 => C64::new(-1.0, 0.0),
            0 => C64::new(0.0, -1.0),
            _ => C64::from_polar(1.0, core::f64::consts::TAU * p as f64 / phases as f64),
        })
        .collect()
}

/// `K_j = max ||P_j U z||^2` over level-sparse `z` with `|z_i| <= 1`.
///
/// The maximum of this convex function is attained with every support entry
/// of unit modulus. With `phases = 2` and a real `U` the exhaustive value is
/// the exact maximum over real `z`; finer phase grids approximate the complex
/// maximum and are flagged approximate.
pub fn relative_sparsity(
    u: &DenseMatrix,
    rows: &LevelPartition,
    pattern: &SparsityPattern,
    j: usize,
    mode: EstimateMode,
) -> Result<RelativeSparsity> {
    check_partitions(u, rows, pattern.partition())?;
    if j >= rows.levels() {
        bail!(Parameter, "row level {j} out of range for {} levels", rows.levels());
    }
    let row_range = rows.range(j);
    let energy = |support: &[usize], z: &[C64]| -> f64 {
        row_range
            .clone()
            .map(|i| {
                let row = u.row(i);
                support.iter().zip(z).map(|(&s, zs)| row[s] * zs).sum::<C64>().norm_sqr()
            })
            .sum()
    };
    let k = pattern.total();
    if k == 0 {
        return Ok(RelativeSparsity { value: 0.0, approximate: false, evaluations: 0 });
    }
    match mode {
        EstimateMode::Exhaustive { phases, cap } => {
            if phases < 2 {
                bail!(Parameter, "need at least 2 phases, got {phases}");
            }
            let per_support = (phases as u64).checked_pow(k as u32 - 1).unwrap_or(u64::MAX);
            let total = support_count(pattern).saturating_mul(per_support);
            if total > cap {
                bail!(Size, "exhaustive search needs {total} evaluations, cap is {cap}");
            }
            let table = phase_table(phases);
            let mut best = 0.0f64;
            let mut digits = vec![0usize; k];
            let mut z = vec![C64::new(1.0, 0.0); k];
            for support in LevelSupports::new(pattern) {
                // The global phase is irrelevant: the first entry stays at 1.
                digits.iter_mut().for_each(|d| *d = 0);
                loop {
                    for (zi, &d) in z.iter_mut().zip(&digits) {
                        *zi = table[d];
                    }
                    best = best.max(energy(&support, &z));
                    let Some(pos) = (1..k).rev().find(|&i| digits[i] + 1 < phases) else { break };
                    digits[pos] += 1;
                    digits[pos + 1..].iter_mut().for_each(|d| *d = 0);
                }
            }
            let approximate = !(phases == 2 && u.is_real());
            Ok(RelativeSparsity { value: best, approximate, evaluations: total })
        }
        EstimateMode::MonteCarlo { trials, seed } => {
            let real = u.is_real();
            let mut best = 0.0f64;
            let mut z = vec![C64::new(0.0, 0.0); k];
            for t in 0..trials {
                let mut rng = seed::rng(seed::derive(seed, t as u64));
                let support = random_support(pattern, &mut rng);
                for zi in z.iter_mut() {
                    *zi = if real {
                        C64::new(if rng.random::<bool>() { 1.0 } else { -1.0 }, 0.0)
                    } else {
                        C64::from_polar(1.0, core::f64::consts::TAU * rng.random::<f64>())
                    };
                }
                best = best.max(energy(&support, &z));
            }
            Ok(RelativeSparsity { value: best, approximate: true, evaluations: trials as u64 })
        }
    }
}

/// Restricted-isometry-in-levels constant estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct RipEstimate {
    pub delta: f64,
    pub mode: EstimateMode,
    /// Supports examined.
    pub trials: u64,
    pub pattern: SparsityPattern,
}

impl RipEstimate {
    /// Whether `delta` is exact rather than a lower bound.
    pub fn is_exact(&self) -> bool {
        matches!(self.mode, EstimateMode::Exhaustive { .. })
    }
}

/// `max(1 - lambda_min, lambda_max - 1)` of `A_S^* A_S`.
pub fn support_isometry_defect(a: &DenseMatrix, support: &[usize]) -> f64 {
    if support.is_empty() {
        return 0.0;
    }
    let gram = a.column_gram(support);
    let eig = hermitian_eigenvalues(&gram, support.len());
    let lo = eig[0];
    let hi = eig[eig.len() - 1];
    (1.0 - lo).max(hi - 1.0)
}

/// RIP-in-levels constant `delta_{k,M}` of `a`: the largest isometry defect
/// over supports with exactly `k_l` columns in every level `l`.
pub fn rip_level_constant(a: &DenseMatrix, pattern: &SparsityPattern, mode: EstimateMode) -> Result<RipEstimate> {
    if pattern.partition().total() != a.cols() {
        bail!(Dimension, "pattern covers {} columns, matrix has {}", pattern.partition().total(), a.cols());
    }
    let (delta, trials) = match mode {
        EstimateMode::Exhaustive { cap, .. } => {
            let count = support_count(pattern);
            if count > cap {
                bail!(Size, "{count} supports exceed the enumeration cap of {cap}");
            }
            let delta = LevelSupports::new(pattern).map(|s| support_isometry_defect(a, &s)).fold(0.0, f64::max);
            (delta, count)
        }
        EstimateMode::MonteCarlo { trials, seed } => {
            let delta = (0..trials)
                .map(|t| {
                    let mut rng = seed::rng(seed::derive(seed, t as u64));
                    support_isometry_defect(a, &random_support(pattern, &mut rng))
                })
                .fold(0.0, f64::max);
            (delta, trials as u64)
        }
    };
    Ok(RipEstimate { delta, mode, trials, pattern: pattern.clone() })
}

/// Ratio constant `max_{j,l} k_j / k_l`.
pub fn ratio_constant(pattern: &SparsityPattern) -> Result<f64> {
    let k = pattern.k();
    if k.contains(&0) {
        bail!(Parameter, "ratio constant needs every k_j >= 1, got {k:?}");
    }
    let max = *k.iter().max().unwrap_or(&1) as f64;
    let min = *k.iter().min().unwrap_or(&1) as f64;
    Ok(max / min)
}

/// Largest `delta_2k` for which RIP-in-levels recovery is guaranteed with `r`
/// levels and ratio constant `lambda`: `1 / sqrt(r (sqrt(lambda) + 1/4)^2 + 1)`.
pub fn ripl_threshold(r: usize, lambda: f64) -> f64 {
    let t = lambda.sqrt() + 0.25;
    1.0 / (r as f64 * t * t + 1.0).sqrt()
}

pub fn ripl_recovery_check(delta_2k: f64, r: usize, lambda: f64) -> bool {
    delta_2k < ripl_threshold(r, lambda)
}

/// Error-bound factors `(D, E)` of multilevel Fourier/wavelet recovery for
/// per-level sampling counts `m` over bands of the given sizes. Diagnostic
/// only; `sparsity` stands for the total sparsity.
pub fn recovery_bound_factors(band_sizes: &[usize], m: &[usize], sparsity: usize, failure_prob: f64) -> Result<(f64, f64)> {
    if band_sizes.len() != m.len() || m.is_empty() {
        bail!(Dimension, "{} bands for {} sampling counts", band_sizes.len(), m.len());
    }
    if !(failure_prob > 0.0 && failure_prob < 1.0) {
        bail!(Parameter, "failure probability must lie in (0, 1), got {failure_prob}");
    }
    let e = band_sizes
        .iter()
        .zip(m)
        .map(|(&n, &mj)| if mj == 0 { f64::INFINITY } else { n as f64 / mj as f64 })
        .fold(0.0, f64::max);
    let n: usize = band_sizes.iter().sum();
    let d = 1.0 + (6.0 / failure_prob).log2().sqrt() / (4.0 * e * n as f64 * (sparsity.max(1) as f64).sqrt()).log2();
    Ok((d, e))
}
