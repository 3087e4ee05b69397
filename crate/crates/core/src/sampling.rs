//! Index-set construction: dyadic frequency bands, multilevel random
//! sampling, measurement allocation from per-level sparsities, and 2D
//! variable-density patterns.

use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;
use rand::Rng;

use crate::error::{bail, check_pow2, Result};
use crate::levels::LevelPartition;
use crate::operators::TransformKind;
use crate::seed;
use crate::sparsity::SparsityPattern;

/// A sampling scheme `Omega = Omega_1 u ... u Omega_r` over the ordered index
/// space of a [`LevelPartition`] (the `N` boundaries).
///
/// Indices are 0-based, sorted, and `Omega_j` lies inside level `j`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SamplingScheme {
    partition: LevelPartition,
    omega: Vec<usize>,
    counts: Vec<usize>,
    seed: u64,
}

impl SamplingScheme {
    /// Validates and wraps an explicit index set (duplicates rejected).
    pub fn new(partition: LevelPartition, mut omega: Vec<usize>, seed: u64) -> Result<Self> {
        omega.sort_unstable();
        if omega.windows(2).any(|w| w[0] == w[1]) {
            bail!(Scheme, "sampling indices must be distinct");
        }
        if let Some(&last) = omega.last() {
            if last >= partition.total() {
                bail!(Scheme, "index {last} out of range for ambient dimension {}", partition.total());
            }
        }
        let counts = partition
            .ranges()
            .map(|r| omega.partition_point(|&i| i < r.end) - omega.partition_point(|&i| i < r.start))
            .collect();
        Ok(Self { partition, omega, counts, seed })
    }

    /// Every index sampled.
    pub fn full(partition: LevelPartition) -> Self {
        let omega = (0..partition.total()).collect();
        let counts = partition.sizes();
        Self { partition, omega, counts, seed: 0 }
    }

    pub fn partition(&self) -> &LevelPartition {
        &self.partition
    }

    pub fn ambient(&self) -> usize {
        self.partition.total()
    }

    /// All sampled indices, sorted.
    pub fn omega(&self) -> &[usize] {
        &self.omega
    }

    /// `m_j = |Omega_j|` per level.
    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn len(&self) -> usize {
        self.omega.len()
    }

    pub fn is_empty(&self) -> bool {
        self.omega.is_empty()
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// The sorted indices of `Omega_j`.
    pub fn level(&self, j: usize) -> &[usize] {
        let r = self.partition.range(j);
        let lo = self.omega.partition_point(|&i| i < r.start);
        let hi = self.omega.partition_point(|&i| i < r.end);
        &self.omega[lo..hi]
    }
}

/// Ordering of native transform rows into contiguous sampling levels.
///
/// Position `p` of the ordered index space corresponds to native row
/// `native(p)`; levels of the ordered space are given by `partition`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BandMap {
    order: Vec<usize>,
    partition: LevelPartition,
}

impl BandMap {
    pub fn new(order: Vec<usize>, partition: LevelPartition) -> Result<Self> {
        let n = order.len();
        if partition.total() != n {
            bail!(Dimension, "band partition covers {} rows, order has {n}", partition.total());
        }
        let mut seen = vec![false; n];
        for &o in &order {
            if o >= n || core::mem::replace(&mut seen[o], true) {
                bail!(Parameter, "band order is not a permutation of 0..{n}");
            }
        }
        Ok(Self { order, partition })
    }

    /// Identity ordering with the given levels.
    pub fn identity(partition: LevelPartition) -> Self {
        let order = (0..partition.total()).collect();
        Self { order, partition }
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    pub fn native(&self, position: usize) -> usize {
        self.order[position]
    }

    pub fn order(&self) -> &[usize] {
        &self.order
    }

    pub fn partition(&self) -> &LevelPartition {
        &self.partition
    }

    /// Native rows of band `j`, in ordered-space order.
    pub fn band(&self, j: usize) -> &[usize] {
        &self.order[self.partition.range(j)]
    }
}

/// Signed frequency `-n/2+1..=n/2` of DFT row `row` of a length-`n` DFT.
pub fn signed_frequency(row: usize, n: usize) -> i64 {
    if row <= n / 2 {
        row as i64
    } else {
        row as i64 - n as i64
    }
}

/// DFT row holding signed frequency `f`.
pub fn frequency_row(f: i64, n: usize) -> usize {
    f.rem_euclid(n as i64) as usize
}

/// Dyadic DFT frequency bands for `n = 2^r`:
/// `W_0 = {0, 1}` and `W_j = {-2^j+1..=-2^(j-1)} u {2^(j-1)+1..=2^j}`.
///
/// Within a band, negative frequencies come first, each half ascending. The
/// partition boundaries are `(2, 4, ..., 2^r)`.
pub fn dyadic_bands(r: u32) -> Result<BandMap> {
    if !(1..usize::BITS).contains(&r) {
        bail!(Parameter, "dyadic bands need 1 <= r < {}, got {r}", usize::BITS);
    }
    let n = 1usize << r;
    let mut order = Vec::with_capacity(n);
    order.push(frequency_row(0, n));
    order.push(frequency_row(1, n));
    for j in 1..r {
        let hi = 1i64 << j;
        let lo = 1i64 << (j - 1);
        order.extend((-hi + 1..=-lo).map(|f| frequency_row(f, n)));
        order.extend((lo + 1..=hi).map(|f| frequency_row(f, n)));
    }
    BandMap::new(order, LevelPartition::dyadic(n)?)
}

/// Dyadic sequency bands for the sequency-ordered WHT: rows stay in natural
/// order, levels `(2, 4, ..., n)`.
pub fn sequency_bands(n: usize) -> Result<BandMap> {
    Ok(BandMap::identity(LevelPartition::dyadic(n)?))
}

/// Radial dyadic annuli for a `side x side` 2D transform, matched to a
/// `levels`-level 2D wavelet decomposition.
///
/// With `s = side / 2^levels`, band 0 is the disk `rho <= s`, band `i` the
/// annulus `s 2^(i-1) < rho <= s 2^i`, and the last band everything beyond,
/// corners included. `rho` is the Euclidean norm of the signed DFT frequency,
/// or half the sequency pair for the WHT. Rows inside a band keep their
/// native (row-major) order.
pub fn radial_bands_2d(side: usize, levels: usize, transform: TransformKind) -> Result<BandMap> {
    check_pow2(side, "image side")?;
    if levels == 0 || levels > side.trailing_zeros() as usize {
        bail!(Dimension, "radial bands need 1..={} levels for side {side}", side.trailing_zeros());
    }
    let radius = |row: usize, col: usize| -> f64 {
        match transform {
            TransformKind::Wht => {
                let (a, b) = (row as f64 / 2.0, col as f64 / 2.0);
                (a * a + b * b).sqrt()
            }
            _ => {
                let (a, b) = (signed_frequency(row, side) as f64, signed_frequency(col, side) as f64);
                (a * a + b * b).sqrt()
            }
        }
    };
    let s0 = (side >> levels) as f64;
    let band_of = |rho: f64| -> usize {
        let mut b = 0;
        let mut edge = s0;
        while b + 1 < levels && rho > edge {
            b += 1;
            edge *= 2.0;
        }
        b
    };
    let mut tagged: Vec<(usize, usize)> =
        (0..side * side).map(|i| (band_of(radius(i / side, i % side)), i)).collect();
    tagged.sort_unstable();
    let mut sizes = vec![0usize; levels];
    for &(b, _) in &tagged {
        sizes[b] += 1;
    }
    let partition = LevelPartition::from_sizes(&sizes)?;
    BandMap::new(tagged.into_iter().map(|(_, i)| i).collect(), partition)
}

/// `(N, m)`-multilevel random sampling: `Omega_j` is a uniformly random
/// `m_j`-subset of level `j`, drawn without replacement from the stream
/// `derive(seed, j)`.
pub fn multilevel_sample(partition: &LevelPartition, m: &[usize], seed: u64) -> Result<SamplingScheme> {
    if m.len() != partition.levels() {
        bail!(Parameter, "got {} per-level counts for {} levels", m.len(), partition.levels());
    }
    let mut omega = Vec::with_capacity(m.iter().sum());
    for (j, (&mj, range)) in m.iter().zip(partition.ranges()).enumerate() {
        if mj > range.len() {
            bail!(Parameter, "level {j}: m_j = {mj} exceeds level size {}", range.len());
        }
        let mut rng = seed::rng(seed::derive(seed, j as u64));
        let mut picked = rand::seq::index::sample(&mut rng, range.len(), mj).into_vec();
        picked.sort_unstable();
        omega.extend(picked.into_iter().map(|i| range.start + i));
    }
    SamplingScheme::new(partition.clone(), omega, seed)
}

/// Single-level uniform random `m`-subset of `0..n`.
pub fn uniform_sample(n: usize, m: usize, seed: u64) -> Result<SamplingScheme> {
    if m > n {
        bail!(Parameter, "cannot draw {m} samples from {n} indices");
    }
    multilevel_sample(&LevelPartition::single(n)?, &[m], seed)
}

/// Unscaled per-level demand `k_j + sum_{l != j} 2^{-|j-l|/2} k_l`.
pub fn allocation_weights(k: &[usize]) -> Vec<f64> {
    (0..k.len())
        .map(|j| {
            k.iter()
                .enumerate()
                .map(|(l, &kl)| {
                    let d = j.abs_diff(l) as f64;
                    kl as f64 * 2f64.powf(-d / 2.0)
                })
                .sum()
        })
        .collect()
}

/// Per-level measurement counts `m_j = ceil(scale * weight_j)` clipped to the
/// sizes of the pattern's own levels.
pub fn allocate_measurements(pattern: &SparsityPattern, scale: f64) -> Result<Vec<usize>> {
    allocate_measurements_in(pattern, scale, pattern.partition())
}

/// As [`allocate_measurements`], clipping against the sampling levels `bands`.
pub fn allocate_measurements_in(pattern: &SparsityPattern, scale: f64, bands: &LevelPartition) -> Result<Vec<usize>> {
    if !(scale > 0.0 && scale.is_finite()) {
        bail!(Parameter, "allocation scale must be positive and finite, got {scale}");
    }
    if bands.levels() != pattern.levels() {
        bail!(Dimension, "{} sampling levels for {} sparsity levels", bands.levels(), pattern.levels());
    }
    let counts = allocation_weights(pattern.k())
        .iter()
        .zip(bands.sizes())
        .enumerate()
        .map(|(j, (w, size))| {
            let want = (scale * w).ceil() as usize;
            if want > size {
                log::debug!("level {j}: allocation {want} clipped to band size {size}");
            }
            want.min(size)
        })
        .collect();
    Ok(counts)
}

/// Distributes exactly `total` measurements over `bands`, proportionally to
/// the allocation weights of `k` as far as band sizes allow.
///
/// The largest scale whose clipped allocation fits in `total` is found by
/// bisection; any remainder goes to the coarsest unsaturated bands.
pub fn allocate_to_budget(k: &[usize], bands: &LevelPartition, total: usize) -> Result<Vec<usize>> {
    if k.len() != bands.levels() {
        bail!(Dimension, "{} sparsities for {} sampling levels", k.len(), bands.levels());
    }
    if total > bands.total() {
        bail!(Parameter, "budget {total} exceeds ambient dimension {}", bands.total());
    }
    let weights: Vec<f64> = allocation_weights(k).into_iter().map(|w| w.max(1e-12)).collect();
    let sizes = bands.sizes();
    let alloc = |scale: f64| -> Vec<usize> {
        weights.iter().zip(&sizes).map(|(w, &s)| ((scale * w).ceil() as usize).min(s)).collect()
    };
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    while alloc(hi).iter().sum::<usize>() < total && hi < 1e300 {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if alloc(mid).iter().sum::<usize>() <= total {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut m = alloc(lo);
    let mut left = total - m.iter().sum::<usize>();
    for (mj, &s) in m.iter_mut().zip(&sizes) {
        let add = left.min(s - *mj);
        *mj += add;
        left -= add;
    }
    Ok(m)
}

/// Variable-density 2D pattern over a `side x side` DFT grid (native
/// row-major indices, single level).
///
/// A centre region is always sampled: the 2x2 block of frequencies
/// `{0,1}^2` when `4 <= m < 9`, otherwise the disk of radius
/// `max(sqrt 2, sqrt(m / 8 pi))`. Every other frequency is drawn
/// independently with probability `min(1, c (1 + |w|)^-alpha)`, `c` chosen so
/// the expected total is `m`. A frequency and its mirror `-w` are drawn
/// together, so the pattern is conjugate-symmetric outside the centre.
pub fn power_law_pattern_2d(side: usize, m: usize, alpha: f64, seed: u64) -> Result<SamplingScheme> {
    check_pow2(side, "grid side")?;
    let n = side * side;
    if m == 0 || m > n {
        bail!(Parameter, "pattern size must satisfy 0 < m <= {n}, got {m}");
    }
    if !alpha.is_finite() || alpha < 0.0 {
        bail!(Parameter, "density exponent must be finite and >= 0, got {alpha}");
    }
    let freq = |i: usize| (signed_frequency(i / side, side), signed_frequency(i % side, side));
    let rho = |i: usize| {
        let (a, b) = freq(i);
        ((a * a + b * b) as f64).sqrt()
    };
    let mirror = |i: usize| {
        let (a, b) = freq(i);
        frequency_row(-a, side) * side + frequency_row(-b, side)
    };

    let mut centre = vec![false; n];
    if m >= 9 {
        let rc = f64::max(2f64.sqrt(), (m as f64 / (8.0 * core::f64::consts::PI)).sqrt());
        (0..n).filter(|&i| rho(i) <= rc + 1e-12).for_each(|i| centre[i] = true);
    } else if m >= 4 {
        for (a, b) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
            centre[frequency_row(a, side) * side + frequency_row(b, side)] = true;
        }
    }
    let n_centre = centre.iter().filter(|&&c| c).count();
    let budget = m.saturating_sub(n_centre) as f64;

    let candidates: Vec<usize> = (0..n).filter(|&i| !centre[i]).collect();
    let weight = |i: usize| (1.0 + rho(i)).powf(-alpha);
    let expected = |c: f64| candidates.iter().map(|&i| (c * weight(i)).min(1.0)).sum::<f64>();
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    while expected(hi) < budget && hi < 1e300 {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if expected(mid) < budget {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let c = hi;

    let mut rng = seed::rng(seed::derive(seed, seed::stream::SCHEME));
    let mut chosen = centre.clone();
    let mut decided = centre;
    for &i in &candidates {
        if decided[i] {
            continue;
        }
        let j = mirror(i);
        let p = (c * weight(i)).min(1.0);
        let take = rng.random::<f64>() < p;
        decided[i] = true;
        chosen[i] = take;
        if !decided[j] {
            decided[j] = true;
            chosen[j] = take;
        }
    }
    let omega = (0..n).filter(|&i| chosen[i]).collect();
    SamplingScheme::new(LevelPartition::single(n)?, omega, seed)
}
