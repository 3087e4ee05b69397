//! Experiment runners. Each returns a [`RunReport`] and writes its artifacts
//! under the configured output directory.

use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;

use mlcs_core::coherence::{self, EstimateMode};
use mlcs_core::levels::LevelPartition;
use mlcs_core::linalg::{DenseMatrix, C64};
use mlcs_core::operators::{
    dense_random_operator, dwt2_forward, Ensemble, Image2D, LinearOperator, SensingOperator, Shape, TransformKind, Wavelet,
    WaveletKind,
};
use mlcs_core::sampling::{
    allocate_measurements_in, allocate_to_budget, dyadic_bands, multilevel_sample, power_law_pattern_2d,
    radial_bands_2d, sequency_bands, uniform_sample, BandMap, SamplingScheme,
};
use mlcs_core::seed;
use mlcs_core::solver::{bpdn_solve, measurement_noise, relative_error, SolveResult};
use mlcs_core::sparsity::{
    default_epsilon_grid, flip, flip_in_levels, sparsity_curves, SparsityPattern,
};

use crate::config::{Experiment, ExperimentConfig, ImageSource, SchemeKind, TransformName};
use crate::error::{HarnessError, Result};
use crate::formats;
use crate::pgm;
use crate::report::{CaseReport, RunReport};

/// Loads the configured image at `side x side`. Files larger than `side` are
/// block-averaged down by an integer factor.
pub fn load_image(cfg: &ExperimentConfig, side: usize) -> Result<Image2D> {
    match &cfg.image {
        ImageSource::Phantom { scene } => Ok(scene.render(side)),
        ImageSource::File { .. } => {
            let path = cfg.image.path_for(side).expect("file source has a path");
            let img = pgm::load_pgm(&path)?;
            let native = img.square_side()?;
            if native == side {
                Ok(img)
            } else if native > side && native % side == 0 {
                Ok(img.downsample(native / side)?)
            } else {
                Err(HarnessError::config(format!("image {} is {native}x{native}, cannot produce {side}x{side}", path.display())))
            }
        }
    }
}

/// Measurement budget `round(fraction * n)`, at least 1.
pub fn budget(fraction: f64, n: usize) -> usize {
    ((fraction * n as f64).round() as usize).clamp(1, n)
}

/// The canonical 2D multilevel pattern: radial dyadic bands matched to the
/// wavelet scales, with `total` samples distributed by the level allocation
/// rule applied to the image's per-level effective sparsities at `epsilon`.
pub fn canonical_multilevel_scheme(
    coeffs: &[C64],
    side: usize,
    levels: usize,
    transform: TransformKind,
    total: usize,
    epsilon: f64,
    seed: u64,
) -> Result<(SamplingScheme, BandMap)> {
    let scales = LevelPartition::wavelet_2d(side, levels)?;
    let k: Vec<usize> =
        SparsityPattern::effective(coeffs, &scales, epsilon)?.k().iter().map(|&k| k.max(1)).collect();
    let bands = radial_bands_2d(side, levels, transform)?;
    let m = allocate_to_budget(&k, bands.partition(), total)?;
    let scheme = multilevel_sample(bands.partition(), &m, seed)?;
    Ok((scheme, bands))
}

/// An image sensing operator together with the rows it keeps (for masks).
pub struct ImageOperator {
    pub op: SensingOperator,
    pub label: String,
    pub mask_rows: Option<Vec<usize>>,
}

/// Builds the sensing operator of `transform` for the image `coeffs`.
pub fn image_operator(
    cfg: &ExperimentConfig,
    transform: TransformName,
    coeffs: &[C64],
    side: usize,
    wavelet: &Wavelet,
    case_seed: u64,
) -> Result<ImageOperator> {
    let n = side * side;
    let total = budget(cfg.scheme.fraction, n);
    let shape = Shape::Square(side);
    let scheme_seed = seed::derive(case_seed, seed::stream::SCHEME);
    let op_seed = seed::derive(case_seed, seed::stream::OPERATOR);
    let structured = |kind: TransformKind, name: &str| -> Result<ImageOperator> {
        let (scheme, bands) = match cfg.scheme.kind {
            SchemeKind::Multilevel => {
                let (s, b) = canonical_multilevel_scheme(
                    coeffs,
                    side,
                    wavelet.levels(),
                    kind,
                    total,
                    cfg.scheme.epsilon,
                    scheme_seed,
                )?;
                (s, Some(b))
            }
            SchemeKind::PowerLaw => {
                if kind != TransformKind::Dft {
                    return Err(HarnessError::config("power-law patterns are defined for the DFT only"));
                }
                (power_law_pattern_2d(side, total, cfg.scheme.alpha, scheme_seed)?, None)
            }
            SchemeKind::Uniform => (uniform_sample(n, total, scheme_seed)?, None),
            SchemeKind::Full => (SamplingScheme::full(LevelPartition::single(n)?), None),
        };
        let op = SensingOperator::subsampled(kind, shape, Some(wavelet.clone()), &scheme, bands.as_ref())?;
        let mask_rows = (kind == TransformKind::Dft).then(|| op.selected_rows().to_vec());
        let label = format!("{name}-{}", scheme_label(cfg.scheme.kind));
        Ok(ImageOperator { op, label, mask_rows })
    };
    match transform {
        TransformName::Dft => structured(TransformKind::Dft, "dft"),
        TransformName::Wht => structured(TransformKind::Wht, "wht"),
        TransformName::Bernoulli => Ok(ImageOperator {
            op: SensingOperator::random_hadamard(total, shape, Some(wavelet.clone()), op_seed)?,
            label: "bernoulli".into(),
            mask_rows: None,
        }),
        TransformName::Gaussian => Ok(ImageOperator {
            op: SensingOperator::dense(Ensemble::Gaussian, total, shape, Some(wavelet.clone()), op_seed)?,
            label: "gaussian".into(),
            mask_rows: None,
        }),
    }
}

fn scheme_label(kind: SchemeKind) -> &'static str {
    match kind {
        SchemeKind::Multilevel => "multilevel",
        SchemeKind::PowerLaw => "power-law",
        SchemeKind::Uniform => "uniform",
        SchemeKind::Full => "full",
    }
}

/// Coefficient permutation applied before sensing and undone after recovery.
#[derive(Debug, Clone)]
pub enum Permutation {
    None,
    Flip,
    FlipInLevels(LevelPartition),
}

impl Permutation {
    fn apply(&self, c: &[C64]) -> Result<Vec<C64>> {
        Ok(match self {
            Permutation::None => c.to_vec(),
            Permutation::Flip => flip(c),
            Permutation::FlipInLevels(p) => flip_in_levels(c, p)?,
        })
    }

    fn label(&self) -> &'static str {
        match self {
            Permutation::None => "unflipped",
            Permutation::Flip => "flipped",
            Permutation::FlipInLevels(_) => "levels-flipped",
        }
    }
}

/// Result of one reconstruction.
pub struct Reconstruction {
    pub image: Image2D,
    pub result: SolveResult,
    pub error: f64,
    pub seconds: f64,
}

/// Senses the permuted coefficients `P c` (plus noise of norm `eta` when
/// set), recovers them, and returns
/// `Phi P^-1(c_hat)` (every permutation used here is an involution).
pub fn reconstruct(
    op: &SensingOperator,
    image: &Image2D,
    coeffs: &[C64],
    perm: &Permutation,
    cfg: &ExperimentConfig,
    case_seed: u64,
) -> Result<Reconstruction> {
    let solver_seed = seed::derive(case_seed, seed::stream::SOLVER);
    let noise_seed = seed::derive(case_seed, seed::stream::NOISE);
    let t = Instant::now();
    let permuted = perm.apply(coeffs)?;
    let mut y = vec![C64::new(0.0, 0.0); op.rows()];
    op.apply(&permuted, &mut y);
    if cfg.solver.eta > 0.0 {
        let complex = op.kind() == TransformKind::Dft;
        let noise = measurement_noise(y.len(), cfg.solver.eta, complex, noise_seed)?;
        y.iter_mut().zip(noise).for_each(|(v, e)| *v += e);
    }
    let result = bpdn_solve(op, &y, &cfg.solver.to_config(solver_seed))?;
    let restored = perm.apply(&result.coefficients)?;
    let pixels = op.synthesize(&restored);
    let rec = Image2D::from_real_part(image.width(), image.height(), &pixels)?;
    let error = relative_error(image.data(), rec.data())?;
    Ok(Reconstruction { image: rec, result, error, seconds: t.elapsed().as_secs_f64() })
}

struct Saved {
    reconstruction: String,
    display: String,
}

fn save_reconstruction(out: &Path, stem: &str, rec: &Reconstruction) -> Result<Saved> {
    let raw = format!("{stem}.f64");
    let display = format!("{stem}.pgm");
    formats::save_raw(&out.join(&raw), &rec.image)?;
    pgm::save_pgm(&rec.image.clamped(), &out.join(&display), 255)?;
    if !rec.result.trace.is_empty() {
        formats::save_trace(&out.join(format!("{stem}_trace.csv")), &rec.result)?;
    }
    Ok(Saved { reconstruction: raw, display })
}

fn prepare_out(cfg: &ExperimentConfig) -> Result<()> {
    std::fs::create_dir_all(&cfg.output_dir).map_err(|e| HarnessError::io(&cfg.output_dir, e))
}

fn save_original(cfg: &ExperimentConfig, img: &Image2D, side: usize, report: &mut RunReport) -> Result<()> {
    let name = format!("original_{side}.f64");
    formats::save_raw(&cfg.output_dir.join(&name), img)?;
    report.artifacts.push(name);
    Ok(())
}

/// One case: trial `trial` of `transform` at `side`, reconstructed under each
/// of `perms`.
fn image_case(
    cfg: &ExperimentConfig,
    img: &Image2D,
    side: usize,
    transform: TransformName,
    trial: usize,
    perms: &[Permutation],
) -> Result<(Vec<CaseReport>, Vec<String>)> {
    let wavelet = Wavelet::new(WaveletKind::from(cfg.wavelet.kind), cfg.wavelet.image_levels(side))?;
    let coeffs = dwt2_forward(&img.to_complex(), side, &wavelet)?;
    let case_seed = seed::derive(cfg.seed, trial as u64);
    let built = image_operator(cfg, transform, &coeffs, side, &wavelet, case_seed)?;
    let out = &cfg.output_dir;
    let mut artifacts = Vec::new();
    let prefix = format!("{}_{side}_t{trial}", built.label);
    let mask = match &built.mask_rows {
        Some(rows) => {
            let name = format!("{prefix}_mask.pgm");
            pgm::save_pgm(&formats::mask_image(rows, side), &out.join(&name), 255)?;
            artifacts.push(name.clone());
            Some(name)
        }
        None => None,
    };
    let mut cases = Vec::new();
    for perm in perms {
        let rec = reconstruct(&built.op, img, &coeffs, perm, cfg, case_seed)?;
        let saved = save_reconstruction(out, &format!("{prefix}_{}", perm.label()), &rec)?;
        log::info!("{prefix} {}: err {:.3}% in {:.1}s", perm.label(), rec.error, rec.seconds);
        cases.push(CaseReport {
            operator: built.label.clone(),
            variant: perm.label().to_string(),
            resolution: side,
            trial,
            seed: case_seed,
            measurements: built.op.rows(),
            relative_error: rec.error,
            iterations: rec.result.iterations,
            converged: rec.result.converged,
            feasibility_gap: rec.result.feasibility_gap,
            seconds: rec.seconds,
            reconstruction: Some(saved.reconstruction),
            display: Some(saved.display),
            mask: mask.clone(),
        });
    }
    Ok((cases, artifacts))
}

fn run_cases(
    cfg: &ExperimentConfig,
    jobs: Vec<(usize, TransformName, usize)>,
    perms_for: impl Fn(usize) -> Result<Vec<Permutation>> + Sync,
    report: &mut RunReport,
) -> Result<()> {
    let sides: std::collections::BTreeSet<usize> = jobs.iter().map(|j| j.0).collect();
    let mut images = std::collections::BTreeMap::new();
    for side in sides {
        let img = load_image(cfg, side)?;
        save_original(cfg, &img, side, report)?;
        images.insert(side, img);
    }
    let results: Vec<Result<(Vec<CaseReport>, Vec<String>)>> = jobs
        .par_iter()
        .map(|&(side, transform, trial)| image_case(cfg, &images[&side], side, transform, trial, &perms_for(side)?))
        .collect();
    for r in results {
        let (cases, artifacts) = r?;
        report.cases.extend(cases);
        report.artifacts.extend(artifacts);
    }
    Ok(())
}

fn scale_partition(cfg: &ExperimentConfig, side: usize) -> Result<LevelPartition> {
    Ok(LevelPartition::wavelet_2d(side, cfg.wavelet.image_levels(side))?)
}

/// Recovery of `x` from `A x` and of the flipped coefficients, for every trial.
pub fn run_flip_test(cfg: &ExperimentConfig) -> Result<RunReport> {
    run_flip_variant(cfg, |_| Ok(vec![Permutation::None, Permutation::Flip]))
}

/// As [`run_flip_test`] with the flip restricted to each wavelet scale.
pub fn run_flip_test_in_levels(cfg: &ExperimentConfig) -> Result<RunReport> {
    run_flip_variant(cfg, |side| Ok(vec![Permutation::None, Permutation::FlipInLevels(scale_partition(cfg, side)?)]))
}

fn run_flip_variant(
    cfg: &ExperimentConfig,
    perms_for: impl Fn(usize) -> Result<Vec<Permutation>> + Sync,
) -> Result<RunReport> {
    prepare_out(cfg)?;
    let t = Instant::now();
    let mut report = RunReport::new(cfg);
    let jobs = (0..cfg.trials).map(|trial| (cfg.resolution, cfg.transform, trial)).collect();
    run_cases(cfg, jobs, perms_for, &mut report)?;
    report.finish(cfg, t)
}

/// Dense random sensing against every structured transform, at every
/// resolution, with the same sampling fraction.
pub fn run_comparison(cfg: &ExperimentConfig) -> Result<RunReport> {
    prepare_out(cfg)?;
    let t = Instant::now();
    let mut report = RunReport::new(cfg);
    let mut transforms = vec![TransformName::Bernoulli];
    transforms.extend(cfg.transforms.iter().copied().filter(|&t| t != TransformName::Bernoulli));
    let mut jobs = Vec::new();
    for &side in &cfg.resolutions {
        for &tr in &transforms {
            for trial in 0..cfg.trials {
                jobs.push((side, tr, trial));
            }
        }
    }
    run_cases(cfg, jobs, |_| Ok(vec![Permutation::None]), &mut report)?;
    report.finish(cfg, t)
}

/// Single reconstruction with the configured transform and scheme.
pub fn run_recover(cfg: &ExperimentConfig) -> Result<RunReport> {
    prepare_out(cfg)?;
    let t = Instant::now();
    let mut report = RunReport::new(cfg);
    let jobs = (0..cfg.trials).map(|trial| (cfg.resolution, cfg.transform, trial)).collect();
    run_cases(cfg, jobs, |_| Ok(vec![Permutation::None]), &mut report)?;
    report.finish(cfg, t)
}

/// Per-scale effective sparsity curves of the image's wavelet coefficients.
pub fn run_sparsity_curves(cfg: &ExperimentConfig) -> Result<RunReport> {
    prepare_out(cfg)?;
    let t = Instant::now();
    let mut report = RunReport::new(cfg);
    let side = cfg.resolution;
    let img = load_image(cfg, side)?;
    let wavelet = Wavelet::new(WaveletKind::from(cfg.wavelet.kind), cfg.wavelet.image_levels(side))?;
    let coeffs = dwt2_forward(&img.to_complex(), side, &wavelet)?;
    let curve = sparsity_curves(&coeffs, &scale_partition(cfg, side)?, &default_epsilon_grid())?;
    let name = format!("sparsity_{side}.csv");
    formats::save_sparsity_curve(&cfg.output_dir.join(&name), &curve)?;
    report.artifacts.push(name);
    let at = curve.relative_at(0.99);
    report.metrics.insert("relative_sparsity_0.99".into(), serde_json::json!(at));
    let fine_decay = at.last() < at.first();
    report.metrics.insert("fine_decay".into(), serde_json::json!(fine_decay));
    report.finish(cfg, t)
}

/// Band map and level partition of the `n x n` transform `kind`.
pub fn bands_1d(kind: TransformKind, n: usize) -> Result<BandMap> {
    Ok(match kind {
        TransformKind::Dft => dyadic_bands(n.trailing_zeros())?,
        _ => sequency_bands(n)?,
    })
}

/// Dense `U` of a 1D transform against a full-depth wavelet, rows in band
/// order.
pub fn dense_transform_wavelet(kind: TransformKind, wavelet: WaveletKind, n: usize) -> Result<DenseMatrix> {
    let levels = n.trailing_zeros() as usize;
    let w = Wavelet::new(wavelet, levels)?;
    let op = SensingOperator::full(kind, Shape::Line(n), Some(w))?;
    let u = coherence::materialize(&op, coherence::DEFAULT_MAX_DIM)?;
    Ok(u.select_rows(bands_1d(kind, n)?.order()))
}

/// Block coherence grids and heat maps for every transform/wavelet pair.
pub fn run_coherence_map(cfg: &ExperimentConfig) -> Result<RunReport> {
    prepare_out(cfg)?;
    let t = Instant::now();
    let mut report = RunReport::new(cfg);
    let n = cfg.signal.n;
    let mut transforms = cfg.transforms.clone();
    transforms.retain(|t| matches!(t, TransformName::Dft | TransformName::Wht));
    for tr in transforms {
        let kind = if tr == TransformName::Dft { TransformKind::Dft } else { TransformKind::Wht };
        for wavelet in [WaveletKind::Haar, WaveletKind::Db4] {
            let u = dense_transform_wavelet(kind, wavelet, n)?;
            let rows = bands_1d(kind, n)?.partition().clone();
            let cols = LevelPartition::dyadic(n)?;
            let cm = coherence::coherence_block_matrix(&u, &rows, &cols)?;
            let stem = format!("coherence_{}_{}_{n}", format!("{tr:?}").to_lowercase(), format!("{wavelet:?}").to_lowercase());
            formats::save_coherence_matrix(&cfg.output_dir.join(format!("{stem}.csv")), &cm)?;
            pgm::save_pgm(&formats::heat_map(&cm, 16), &cfg.output_dir.join(format!("{stem}.pgm")), 255)?;
            report.metrics.insert(format!("{stem}_mutual"), serde_json::json!(coherence::mutual_coherence(&u)));
            report.artifacts.push(format!("{stem}.csv"));
            report.artifacts.push(format!("{stem}.pgm"));
        }
    }
    report.finish(cfg, t)
}

fn signal_partition(cfg: &ExperimentConfig) -> Result<LevelPartition> {
    if cfg.signal.boundaries.is_empty() {
        Ok(LevelPartition::dyadic(cfg.signal.n)?)
    } else {
        Ok(LevelPartition::new(cfg.signal.boundaries.clone())?)
    }
}

/// RIP-in-levels constant of a dense random matrix for the configured
/// pattern, with the recovery threshold for twice that pattern.
pub fn run_riplevels(cfg: &ExperimentConfig) -> Result<RunReport> {
    prepare_out(cfg)?;
    let t = Instant::now();
    let mut report = RunReport::new(cfg);
    let s = &cfg.signal;
    let ensemble = match cfg.transform {
        TransformName::Gaussian => Ensemble::Gaussian,
        TransformName::Bernoulli => Ensemble::Bernoulli,
        other => return Err(HarnessError::config(format!("riplevels needs a dense ensemble, got {other:?}"))),
    };
    let op = dense_random_operator(ensemble, s.m, s.n, seed::derive(cfg.seed, seed::stream::OPERATOR))?;
    let a = DenseMatrix::materialize(&op, usize::MAX)?;
    let pattern = SparsityPattern::new(signal_partition(cfg)?, s.k.clone())?;
    let mode = if s.trials == 0 {
        EstimateMode::exhaustive()
    } else {
        EstimateMode::monte_carlo(s.trials, seed::derive(cfg.seed, seed::stream::SCHEME))
    };
    let est = coherence::rip_level_constant(&a, &pattern, mode)?;
    formats::write_json(&cfg.output_dir.join("rip.json"), &formats::RipFile::from(&est))?;
    report.artifacts.push("rip.json".into());
    report.metrics.insert("delta".into(), serde_json::json!(est.delta));
    if let Ok(lambda) = coherence::ratio_constant(&pattern) {
        let thr = coherence::ripl_threshold(pattern.levels(), lambda);
        report.metrics.insert("ratio_constant".into(), serde_json::json!(lambda));
        report.metrics.insert("threshold".into(), serde_json::json!(thr));
        report.metrics.insert("below_threshold".into(), serde_json::json!(est.delta < thr));
    }
    report.finish(cfg, t)
}

/// Per-level measurement counts for the configured sparsities over dyadic
/// DFT bands, plus one drawn scheme.
pub fn run_allocate(cfg: &ExperimentConfig) -> Result<RunReport> {
    prepare_out(cfg)?;
    let t = Instant::now();
    let mut report = RunReport::new(cfg);
    let s = &cfg.signal;
    let pattern = SparsityPattern::new(signal_partition(cfg)?, s.k.clone())?;
    let bands = bands_1d(TransformKind::Dft, s.n)?;
    let m = allocate_measurements_in(&pattern, s.scale, bands.partition())?;
    let scheme = multilevel_sample(bands.partition(), &m, seed::derive(cfg.seed, seed::stream::SCHEME))?;
    formats::save_scheme(&cfg.output_dir.join("scheme.json"), &scheme)?;
    report.artifacts.push("scheme.json".into());
    report.metrics.insert("m".into(), serde_json::json!(m));
    report.metrics.insert("total".into(), serde_json::json!(m.iter().sum::<usize>()));
    report.finish(cfg, t)
}

pub fn run(cfg: &ExperimentConfig) -> Result<RunReport> {
    match cfg.experiment {
        Experiment::FlipTest => run_flip_test(cfg),
        Experiment::FlipTestLevels => run_flip_test_in_levels(cfg),
        Experiment::Compare => run_comparison(cfg),
        Experiment::SparsityCurves => run_sparsity_curves(cfg),
        Experiment::CoherenceMap => run_coherence_map(cfg),
        Experiment::Riplevels => run_riplevels(cfg),
        Experiment::Allocate => run_allocate(cfg),
        Experiment::Recover => run_recover(cfg),
    }
}
