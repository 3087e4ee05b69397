//! Level partitions of an index space.

use alloc::vec::Vec;
use core::ops::Range;

use crate::error::{bail, check_pow2, Result};

/// Strictly increasing boundaries `0 = B_0 < B_1 < ... < B_r = n` splitting
/// `0..n` into `r` consecutive levels.
///
/// Only `B_1..B_r` are stored. Level `j` (0-based) covers `B_j..B_{j+1}`.
/// The same type carries the sampling levels `N` and the sparsity levels `M`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LevelPartition {
    bounds: Vec<usize>,
}

impl LevelPartition {
    pub fn new(bounds: Vec<usize>) -> Result<Self> {
        if bounds.is_empty() {
            bail!(Parameter, "a level partition needs at least one level");
        }
        let mut prev = 0;
        for &b in &bounds {
            if b <= prev {
                bail!(
                    Parameter,
                    "level boundaries must be strictly increasing and positive: {bounds:?}"
                );
            }
            prev = b;
        }
        Ok(Self { bounds })
    }

    /// A single level covering `0..n`.
    pub fn single(n: usize) -> Result<Self> {
        Self::new(alloc::vec![n])
    }

    /// Builds a partition from per-level sizes.
    pub fn from_sizes(sizes: &[usize]) -> Result<Self> {
        let mut acc = 0;
        let bounds = sizes
            .iter()
            .map(|&s| {
                acc += s;
                acc
            })
            .collect();
        Self::new(bounds)
    }

    /// Dyadic levels `(2, 4, 8, ..., n)` of a length-`n` vector: the Haar
    /// full-depth scales with the scaling coefficient bundled into level 0,
    /// and equally the dyadic frequency bands.
    pub fn dyadic(n: usize) -> Result<Self> {
        check_pow2(n, "vector length")?;
        let mut bounds = Vec::new();
        let mut b = 2;
        while b <= n {
            bounds.push(b);
            b *= 2;
        }
        Self::new(bounds)
    }

    /// Scale partition of a 1D wavelet decomposition with `levels` levels.
    ///
    /// The scaling block and the coarsest detail block form level 0, so the
    /// partition has `levels` levels with boundaries `2s, 4s, ..., n` where
    /// `s = n / 2^levels`.
    pub fn wavelet_1d(n: usize, levels: usize) -> Result<Self> {
        check_pow2(n, "vector length")?;
        check_levels(n, levels)?;
        let s = n >> levels;
        Self::new((1..=levels).map(|i| s << i).collect())
    }

    /// Scale partition of a separable 2D wavelet decomposition of a
    /// `side x side` image: boundaries `(2s)^2, (4s)^2, ..., side^2`, with the
    /// scaling block bundled into level 0 as in [`LevelPartition::wavelet_1d`].
    pub fn wavelet_2d(side: usize, levels: usize) -> Result<Self> {
        check_pow2(side, "image side")?;
        check_levels(side, levels)?;
        let s = side >> levels;
        Self::new((1..=levels).map(|i| (s << i) * (s << i)).collect())
    }

    pub fn levels(&self) -> usize {
        self.bounds.len()
    }

    /// Ambient dimension `B_r`.
    pub fn total(&self) -> usize {
        *self.bounds.last().expect("non-empty by construction")
    }

    pub fn bounds(&self) -> &[usize] {
        &self.bounds
    }

    pub fn range(&self, level: usize) -> Range<usize> {
        let start = if level == 0 { 0 } else { self.bounds[level - 1] };
        start..self.bounds[level]
    }

    pub fn size(&self, level: usize) -> usize {
        self.range(level).len()
    }

    pub fn sizes(&self) -> Vec<usize> {
        (0..self.levels()).map(|j| self.size(j)).collect()
    }

    pub fn ranges(&self) -> impl Iterator<Item = Range<usize>> + '_ {
        (0..self.levels()).map(move |j| self.range(j))
    }

    /// Level containing index `i`, if `i < total()`.
    pub fn level_of(&self, i: usize) -> Option<usize> {
        if i >= self.total() {
            return None;
        }
        Some(self.bounds.partition_point(|&b| b <= i))
    }
}

fn check_levels(n: usize, levels: usize) -> Result<()> {
    let max = n.trailing_zeros() as usize;
    if levels == 0 || levels > max {
        bail!(Dimension, "decomposition levels must be in 1..={max} for length {n}, got {levels}");
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn rejects_non_increasing() {
        assert!(LevelPartition::new(vec![2, 2]).is_err());
        assert!(LevelPartition::new(vec![0, 3]).is_err());
        assert!(LevelPartition::new(vec![]).is_err());
    }

    #[test]
    fn ranges_and_lookup() {
        let p = LevelPartition::new(vec![2, 5, 9]).unwrap();
        assert_eq!(p.range(0), 0..2);
        assert_eq!(p.range(2), 5..9);
        assert_eq!(p.sizes(), vec![2, 3, 4]);
        assert_eq!(p.level_of(0), Some(0));
        assert_eq!(p.level_of(2), Some(1));
        assert_eq!(p.level_of(8), Some(2));
        assert_eq!(p.level_of(9), None);
    }

    #[test]
    fn wavelet_partitions() {
        assert_eq!(LevelPartition::dyadic(8).unwrap().bounds(), &[2, 4, 8]);
        assert_eq!(LevelPartition::wavelet_1d(32, 2).unwrap().bounds(), &[16, 32]);
        assert_eq!(LevelPartition::wavelet_2d(16, 2).unwrap().bounds(), &[64, 256]);
        assert!(LevelPartition::wavelet_1d(8, 4).is_err());
        assert!(LevelPartition::wavelet_1d(12, 1).is_err());
    }
}
