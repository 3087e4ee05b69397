mod common;

use common::*;
use mlcs_core::levels::LevelPartition;
use mlcs_core::linalg::C64;
use mlcs_core::operators::{dwt_forward, Wavelet, WaveletKind};
use mlcs_core::sampling::{
    allocate_measurements, dyadic_bands, multilevel_sample, power_law_pattern_2d, uniform_sample, SamplingScheme,
};
use mlcs_core::sparsity::{
    best_level_approx_error, effective_sparsity, flip, flip_in_levels, level_hard_threshold, sparsity_curves,
    SparsityPattern,
};
use proptest::prelude::*;

fn partition_strategy(max_levels: usize, max_size: usize) -> impl Strategy<Value = LevelPartition> {
    prop::collection::vec(1..=max_size, 1..=max_levels).prop_map(|sizes| LevelPartition::from_sizes(&sizes).unwrap())
}

fn vector_for(p: &LevelPartition) -> impl Strategy<Value = Vec<f64>> {
    // Small integers make ties and zeros common.
    prop::collection::vec((-4i32..=4).prop_map(f64::from), p.total())
}

fn pattern_for(p: LevelPartition) -> impl Strategy<Value = SparsityPattern> {
    let sizes = p.sizes();
    sizes
        .into_iter()
        .map(|s| 0..=s)
        .collect::<Vec<_>>()
        .prop_map(move |k| SparsityPattern::new(p.clone(), k).unwrap())
}

/// Brute force `sigma_{k,M}(c)_1` over every admissible support.
fn brute_force_approx_error(c: &[f64], pattern: &SparsityPattern) -> f64 {
    let mut best = 0.0;
    for (range, &k) in pattern.partition().ranges().zip(pattern.k()) {
        let idx: Vec<usize> = range.clone().collect();
        let total: f64 = idx.iter().map(|&i| c[i].abs()).sum();
        let kept = subsets(&idx, k).iter().map(|s| s.iter().map(|&i| c[i].abs()).sum::<f64>()).fold(0.0, f64::max);
        best += total - kept;
    }
    best
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn effective_sparsity_is_monotone_and_bounded(
        block in prop::collection::vec(-10.0f64..10.0, 1..40),
        e1 in 0.0f64..=1.0,
        e2 in 0.0f64..=1.0,
    ) {
        let (lo, hi) = if e1 <= e2 { (e1, e2) } else { (e2, e1) };
        let a = effective_sparsity(&block, lo).unwrap();
        let b = effective_sparsity(&block, hi).unwrap();
        prop_assert!(a <= b);
        prop_assert!(b <= block.len());
    }

    #[test]
    fn sparsity_curves_are_nondecreasing(
        (p, c) in partition_strategy(4, 12).prop_flat_map(|p| { let v = vector_for(&p); (Just(p), v) })
    ) {
        let grid: Vec<f64> = (0..=20).map(|i| i as f64 / 20.0).collect();
        let curves = sparsity_curves(&c, &p, &grid).unwrap();
        for l in 0..p.levels() {
            prop_assert!(curves.counts(l).windows(2).all(|w| w[0] <= w[1]));
        }
    }

    #[test]
    fn flips_are_involutions(c in prop::collection::vec(-5.0f64..5.0, 0..30)) {
        prop_assert_eq!(flip(&flip(&c)), c.clone());
        let p = LevelPartition::single(c.len().max(1)).unwrap();
        if !c.is_empty() {
            prop_assert_eq!(flip_in_levels(&c, &p).unwrap(), flip(&c));
        }
    }

    #[test]
    fn global_flip_preserves_best_term_error(c in prop::collection::vec(-5.0f64..5.0, 1..16), k in 0usize..16) {
        let n = c.len();
        let k = k.min(n);
        let single = SparsityPattern::new(LevelPartition::single(n).unwrap(), vec![k]).unwrap();
        let a = best_level_approx_error(&c, &single).unwrap();
        let b = best_level_approx_error(&flip(&c), &single).unwrap();
        prop_assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn level_flip_preserves_level_structure(
        (pattern, c) in partition_strategy(4, 6)
            .prop_flat_map(|p| { let v = vector_for(&p); (pattern_for(p), v) })
    ) {
        let p = pattern.partition();
        let flipped = flip_in_levels(&c, p).unwrap();
        let nonzeros = |v: &[f64]| p.ranges().map(|r| v[r].iter().filter(|x| **x != 0.0).count()).collect::<Vec<_>>();
        prop_assert_eq!(nonzeros(&c), nonzeros(&flipped));
        let a = best_level_approx_error(&c, &pattern).unwrap();
        let b = best_level_approx_error(&flipped, &pattern).unwrap();
        prop_assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn best_level_error_matches_brute_force(
        (pattern, c) in partition_strategy(3, 4)
            .prop_filter("n <= 10", |p| p.total() <= 10)
            .prop_flat_map(|p| { let v = vector_for(&p); (pattern_for(p), v) })
    ) {
        let got = best_level_approx_error(&c, &pattern).unwrap();
        prop_assert!((got - brute_force_approx_error(&c, &pattern)).abs() < 1e-12);
        prop_assert_eq!(got == 0.0, pattern.admits(&c));
        let kept = level_hard_threshold(&c, &pattern).unwrap();
        prop_assert!(pattern.admits(&kept));
    }

    #[test]
    fn multilevel_sample_is_valid(
        (p, m) in partition_strategy(5, 20).prop_flat_map(|p| {
            let m = p.sizes().into_iter().map(|s| 0..=s).collect::<Vec<_>>();
            (Just(p), m)
        }),
        seed in any::<u64>(),
    ) {
        let s = multilevel_sample(&p, &m, seed).unwrap();
        prop_assert_eq!(s.counts(), m.as_slice());
        prop_assert!(s.omega().windows(2).all(|w| w[0] < w[1]));
        for j in 0..p.levels() {
            let r = p.range(j);
            prop_assert!(s.level(j).iter().all(|i| r.contains(i)));
        }
        let again = SamplingScheme::new(p.clone(), s.omega().to_vec(), seed).unwrap();
        prop_assert_eq!(again, s);
    }

    #[test]
    fn allocation_is_monotone_and_linear(
        k in prop::collection::vec(0usize..20, 1..7),
        bump in prop::collection::vec(0usize..5, 7),
    ) {
        let n = 1usize << (k.len() + 5);
        let p = LevelPartition::dyadic(n).unwrap();
        let levels = p.levels();
        let sizes = p.sizes();
        let mut k = k;
        k.resize(levels, 0);
        let k: Vec<usize> = k.iter().zip(&sizes).map(|(&a, &s)| a.min(s)).collect();
        let k2: Vec<usize> =
            k.iter().zip(bump.iter().cycle()).zip(&sizes).map(|((a, b), &s)| (a + b).min(s)).collect();
        let m = allocate_measurements(&SparsityPattern::new(p.clone(), k.clone()).unwrap(), 1.0).unwrap();
        let m2 = allocate_measurements(&SparsityPattern::new(p.clone(), k2).unwrap(), 1.0).unwrap();
        prop_assert!(m.iter().zip(&m2).all(|(a, b)| a <= b));
        prop_assert!(m.iter().zip(p.sizes()).all(|(&a, s)| a <= s));
    }
}

#[test]
fn level_flip_changes_error_where_global_flip_does() {
    // Asymmetric budgets: the global flip moves the large entries into the
    // level with the smaller budget.
    let p = LevelPartition::new(vec![2, 6]).unwrap();
    let pattern = SparsityPattern::new(p.clone(), vec![2, 0]).unwrap();
    let c = [5.0, 4.0, 0.0, 0.0, 0.0, 1.0];
    let base = best_level_approx_error(&c, &pattern).unwrap();
    assert_eq!(base, 1.0);
    assert_eq!(best_level_approx_error(&flip_in_levels(&c, &p).unwrap(), &pattern).unwrap(), base);
    assert_eq!(best_level_approx_error(&flip(&c), &pattern).unwrap(), 9.0);
}

fn chi_square(counts: &[u64], expected: f64) -> f64 {
    counts.iter().map(|&o| (o as f64 - expected).powi(2) / expected).sum()
}

#[test]
fn level_sampling_is_uniform() {
    // One 16-element band, 4 samples per draw.
    let p = LevelPartition::new(vec![4, 20]).unwrap();
    let draws = 20_000u64;
    let mut counts = vec![0u64; 16];
    for seed in 0..draws {
        let s = multilevel_sample(&p, &[0, 4], seed).unwrap();
        for &i in s.level(1) {
            counts[i - 4] += 1;
        }
    }
    let q = 4.0 / 16.0;
    let expected = draws as f64 * q;
    let sigma = (draws as f64 * q * (1.0 - q)).sqrt();
    for (i, &c) in counts.iter().enumerate() {
        assert!((c as f64 - expected).abs() <= 3.0 * sigma, "index {i}: {c}");
    }
    // 15 degrees of freedom; 30.58 is the 0.99 quantile.
    assert!(chi_square(&counts, expected) < 30.58);
}

#[test]
fn uniform_sampling_is_uniform() {
    let draws = 10_000u64;
    let mut counts = vec![0u64; 32];
    for seed in 0..draws {
        for &i in uniform_sample(32, 8, seed).unwrap().omega() {
            counts[i] += 1;
        }
    }
    let q = 8.0 / 32.0;
    let expected = draws as f64 * q;
    let sigma = (draws as f64 * q * (1.0 - q)).sqrt();
    assert!(counts.iter().all(|&c| (c as f64 - expected).abs() <= 3.5 * sigma));
    // 31 degrees of freedom; 52.19 is the 0.99 quantile.
    assert!(chi_square(&counts, expected) < 52.19);
}

#[test]
fn full_sampling_takes_everything() {
    let bands = dyadic_bands(5).unwrap();
    let m = bands.partition().sizes();
    let s = multilevel_sample(bands.partition(), &m, 3).unwrap();
    assert_eq!(s.omega(), (0..32).collect::<Vec<_>>().as_slice());
}

#[test]
fn power_law_size_is_unbiased() {
    for (side, m, alpha) in [(64, 512, 1.0), (64, 1000, 2.0), (128, 2048, 1.5)] {
        let mean = (0..100u64).map(|s| power_law_pattern_2d(side, m, alpha, s).unwrap().len() as f64).sum::<f64>() / 100.0;
        assert!((mean - m as f64).abs() <= 0.05 * m as f64, "side {side} alpha {alpha}: mean {mean}");
    }
}

#[test]
fn flat_power_law_is_roughly_uniform() {
    let side = 32;
    let n = side * side;
    let mut counts = vec![0u64; n];
    let runs = 400;
    for s in 0..runs {
        for &i in power_law_pattern_2d(side, 256, 0.0, s).unwrap().omega() {
            counts[i] += 1;
        }
    }
    // Outside the always-sampled centre the remaining budget is spread
    // evenly over the other frequencies.
    let freqs: Vec<f64> = counts.iter().map(|&c| c as f64 / runs as f64).collect();
    let n_centre = freqs.iter().filter(|&&f| f == 1.0).count();
    assert!(n_centre > 0 && n_centre < 64, "{n_centre}");
    let q = (256 - n_centre) as f64 / (n - n_centre) as f64;
    let typical: Vec<f64> = freqs.iter().copied().filter(|&f| f < 1.0).collect();
    let mean = typical.iter().sum::<f64>() / typical.len() as f64;
    assert!((mean - q).abs() < 0.01, "{mean} vs {q}");
    let sigma = (q * (1.0 - q) / runs as f64).sqrt();
    assert!(typical.iter().all(|&f| (f - q).abs() <= 5.0 * sigma));
}

#[test]
fn constant_signal_has_empty_fine_curve() {
    let n = 64;
    let w = Wavelet::new(WaveletKind::Haar, 6).unwrap();
    let c = dwt_forward(&vec![C64::new(0.7, 0.0); n], &w).unwrap();
    let p = LevelPartition::wavelet_1d(n, 6).unwrap();
    let curves = sparsity_curves(&c, &p, &mlcs_core::sparsity::default_epsilon_grid()).unwrap();
    assert!(curves.counts(p.levels() - 1).iter().all(|&k| k == 0));
    assert_eq!(curves.counts(0)[100], 1);
}
