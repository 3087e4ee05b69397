//! Sparsity in levels: per-level budgets, effective sparsities, best
//! level-wise approximation and the flip permutations.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{bail, Result};
use crate::levels::LevelPartition;
use crate::linalg::C64;

/// Scalars whose magnitude drives sparsity measures.
pub trait Coefficient: Copy {
    fn modulus(self) -> f64;
}

impl Coefficient for f64 {
    fn modulus(self) -> f64 {
        self.abs()
    }
}

impl Coefficient for C64 {
    fn modulus(self) -> f64 {
        self.norm()
    }
}

/// Per-level sparsity budgets `k` over the levels `M` of a partition.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SparsityPattern {
    partition: LevelPartition,
    k: Vec<usize>,
}

impl SparsityPattern {
    pub fn new(partition: LevelPartition, k: Vec<usize>) -> Result<Self> {
        if k.len() != partition.levels() {
            bail!(Dimension, "{} sparsities for {} levels", k.len(), partition.levels());
        }
        for (j, (&kj, size)) in k.iter().zip(partition.sizes()).enumerate() {
            if kj > size {
                bail!(Parameter, "level {j}: sparsity {kj} exceeds level size {size}");
            }
        }
        Ok(Self { partition, k })
    }

    /// Per-level counts of nonzero entries of `c`.
    pub fn of_signal<T: Coefficient>(c: &[T], partition: &LevelPartition) -> Result<Self> {
        check_cover(c.len(), partition)?;
        let k = partition.ranges().map(|r| c[r].iter().filter(|v| v.modulus() != 0.0).count()).collect();
        Self::new(partition.clone(), k)
    }

    /// Per-level effective sparsities of `c` at accuracy `epsilon`.
    pub fn effective<T: Coefficient>(c: &[T], partition: &LevelPartition, epsilon: f64) -> Result<Self> {
        check_cover(c.len(), partition)?;
        let k = partition.ranges().map(|r| effective_sparsity(&c[r], epsilon)).collect::<Result<_>>()?;
        Self::new(partition.clone(), k)
    }

    pub fn partition(&self) -> &LevelPartition {
        &self.partition
    }

    pub fn k(&self) -> &[usize] {
        &self.k
    }

    pub fn levels(&self) -> usize {
        self.k.len()
    }

    /// Total sparsity `k_1 + ... + k_r`.
    pub fn total(&self) -> usize {
        self.k.iter().sum()
    }

    /// Whether the per-level supports of `c` respect the budgets.
    pub fn admits<T: Coefficient>(&self, c: &[T]) -> bool {
        c.len() == self.partition.total()
            && self
                .partition
                .ranges()
                .zip(&self.k)
                .all(|(r, &k)| c[r].iter().filter(|v| v.modulus() != 0.0).count() <= k)
    }
}

fn check_cover(len: usize, partition: &LevelPartition) -> Result<()> {
    if len != partition.total() {
        bail!(Dimension, "partition covers {} entries, signal has {len}", partition.total());
    }
    Ok(())
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&epsilon) {
        bail!(Parameter, "epsilon must lie in [0, 1], got {epsilon}");
    }
    Ok(())
}

/// Positions of `block` sorted by nonincreasing magnitude, ties by index.
fn rearrangement<T: Coefficient>(block: &[T]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..block.len()).collect();
    idx.sort_by(|&a, &b| block[b].modulus().total_cmp(&block[a].modulus()).then(a.cmp(&b)));
    idx
}

/// Relative slack on the energy threshold, absorbing summation rounding.
const ENERGY_SLACK: f64 = 1e-12;

/// Smallest `K` whose `K` largest entries carry at least `epsilon^2` of the
/// block's energy. Zero for `epsilon = 0` or an all-zero block; the number of
/// nonzeros for `epsilon = 1`.
pub fn effective_sparsity<T: Coefficient>(block: &[T], epsilon: f64) -> Result<usize> {
    check_epsilon(epsilon)?;
    let mut energies: Vec<f64> = block.iter().map(|v| v.modulus() * v.modulus()).collect();
    energies.sort_by(|a, b| b.total_cmp(a));
    Ok(count_from_sorted(&energies, &prefix_sums(&energies), epsilon))
}

fn prefix_sums(sorted_energies: &[f64]) -> Vec<f64> {
    let mut acc = 0.0;
    let mut out = Vec::with_capacity(sorted_energies.len() + 1);
    out.push(0.0);
    for e in sorted_energies {
        acc += e;
        out.push(acc);
    }
    out
}

fn count_from_sorted(sorted_energies: &[f64], prefix: &[f64], epsilon: f64) -> usize {
    let total = *prefix.last().unwrap_or(&0.0);
    if epsilon == 0.0 || total == 0.0 {
        return 0;
    }
    if epsilon == 1.0 {
        return sorted_energies.partition_point(|&e| e > 0.0);
    }
    let target = epsilon * epsilon * total * (1.0 - ENERGY_SLACK);
    prefix.partition_point(|&p| p < target).min(prefix.len() - 1)
}

/// Per-level effective sparsity curves on a grid of accuracies.
#[derive(Debug, Clone, PartialEq)]
pub struct SparsityCurve {
    epsilons: Vec<f64>,
    level_sizes: Vec<usize>,
    /// `counts[l][e]` is `k_l(epsilons[e])`.
    counts: Vec<Vec<usize>>,
}

impl SparsityCurve {
    pub fn epsilons(&self) -> &[f64] {
        &self.epsilons
    }

    pub fn levels(&self) -> usize {
        self.counts.len()
    }

    pub fn level_sizes(&self) -> &[usize] {
        &self.level_sizes
    }

    /// `k_l` at every grid point.
    pub fn counts(&self, level: usize) -> &[usize] {
        &self.counts[level]
    }

    /// `k_l / (M_l - M_{l-1})` at every grid point.
    pub fn relative(&self, level: usize) -> Vec<f64> {
        let size = self.level_sizes[level] as f64;
        self.counts[level].iter().map(|&k| k as f64 / size).collect()
    }

    /// Relative sparsity of every level at the grid point closest to `epsilon`.
    pub fn relative_at(&self, epsilon: f64) -> Vec<f64> {
        let e = self
            .epsilons
            .iter()
            .enumerate()
            .min_by(|a, b| (a.1 - epsilon).abs().total_cmp(&(b.1 - epsilon).abs()))
            .map_or(0, |(i, _)| i);
        (0..self.levels()).map(|l| self.counts[l][e] as f64 / self.level_sizes[l] as f64).collect()
    }
}

/// `points` uniformly spaced accuracies on `[0, 1]`, endpoints included.
pub fn epsilon_grid(points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![1.0],
        _ => (0..points).map(|i| i as f64 / (points - 1) as f64).collect(),
    }
}

/// The default 101-point grid.
pub fn default_epsilon_grid() -> Vec<f64> {
    epsilon_grid(101)
}

/// Effective sparsity curves of every level of `c`.
pub fn sparsity_curves<T: Coefficient>(c: &[T], partition: &LevelPartition, grid: &[f64]) -> Result<SparsityCurve> {
    check_cover(c.len(), partition)?;
    for &e in grid {
        check_epsilon(e)?;
    }
    let counts = partition
        .ranges()
        .map(|r| {
            let mut energies: Vec<f64> = c[r].iter().map(|v| v.modulus() * v.modulus()).collect();
            energies.sort_by(|a, b| b.total_cmp(a));
            let prefix = prefix_sums(&energies);
            grid.iter().map(|&e| count_from_sorted(&energies, &prefix, e)).collect()
        })
        .collect();
    Ok(SparsityCurve { epsilons: grid.to_vec(), level_sizes: partition.sizes(), counts })
}

/// Index reversal `c'_i = c_{n-1-i}`.
pub fn flip<T: Clone>(c: &[T]) -> Vec<T> {
    c.iter().rev().cloned().collect()
}

/// Reversal inside every level of `partition`.
pub fn flip_in_levels<T: Clone>(c: &[T], partition: &LevelPartition) -> Result<Vec<T>> {
    check_cover(c.len(), partition)?;
    let mut out = Vec::with_capacity(c.len());
    for r in partition.ranges() {
        out.extend(c[r].iter().rev().cloned());
    }
    Ok(out)
}

/// Keeps the `k_l` largest-magnitude entries of every level (ties by lower
/// index), zeroing the rest.
pub fn level_hard_threshold<T: Coefficient + Default>(c: &[T], pattern: &SparsityPattern) -> Result<Vec<T>> {
    check_cover(c.len(), pattern.partition())?;
    let mut out = vec![T::default(); c.len()];
    for (r, &k) in pattern.partition().ranges().zip(pattern.k()) {
        let block = &c[r.clone()];
        for &i in rearrangement(block).iter().take(k) {
            out[r.start + i] = block[i];
        }
    }
    Ok(out)
}

/// `sigma_{k,M}(c)_1`: the l1 mass outside the `k_l` largest entries of each
/// level.
pub fn best_level_approx_error<T: Coefficient>(c: &[T], pattern: &SparsityPattern) -> Result<f64> {
    check_cover(c.len(), pattern.partition())?;
    let mut err = 0.0;
    for (r, &k) in pattern.partition().ranges().zip(pattern.k()) {
        let block = &c[r];
        err += rearrangement(block).iter().skip(k).map(|&i| block[i].modulus()).sum::<f64>();
    }
    Ok(err)
}
