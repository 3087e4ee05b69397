use std::path::{Path, PathBuf};
use std::process::Command;

use mlcs::config::{Experiment, ExperimentConfig, ImageSource, SchemeKind, TransformName};
use mlcs::experiments;
use mlcs::formats;
use mlcs::pgm;
use mlcs::phantom::Scene;
use mlcs::report::RunReport;

fn data_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data")
}

fn small_config(out: &Path, experiment: Experiment) -> ExperimentConfig {
    let mut cfg = ExperimentConfig { experiment, resolution: 32, output_dir: out.to_path_buf(), ..Default::default() };
    cfg.wavelet.levels = Some(2);
    cfg.scheme.fraction = 0.3;
    cfg.solver.max_iters = 150;
    cfg
}

#[test]
fn shipped_phantoms_match_generator() {
    for side in [128, 256, 512] {
        let shipped = pgm::load_pgm(&data_dir().join(format!("phantom_{side}.pgm"))).unwrap();
        let rendered = Scene::Ellipses.render(side);
        let worst = shipped.data().iter().zip(rendered.data()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(worst <= 0.5 / 65535.0 + 1e-12, "{side}: {worst}");
    }
}

#[test]
fn shipped_images_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["phantom_128.pgm", "scene_256.pgm"] {
        let img = pgm::load_pgm(&data_dir().join(name)).unwrap();
        let path = dir.path().join(name);
        pgm::save_pgm(&img, &path, 65535).unwrap();
        assert_eq!(std::fs::read(&path).unwrap(), std::fs::read(data_dir().join(name)).unwrap());
    }
}

#[test]
fn fully_sampled_flip_test_is_exact() {
    let dir = tempfile::tempdir().unwrap();
    for transform in [TransformName::Dft, TransformName::Wht] {
        let mut cfg = small_config(dir.path(), Experiment::FlipTest);
        cfg.transform = transform;
        cfg.scheme.kind = SchemeKind::Full;
        cfg.scheme.fraction = 1.0;
        let report = experiments::run(&cfg).unwrap();
        assert_eq!(report.cases.len(), 2);
        for case in &report.cases {
            assert!(case.relative_error < 1e-4, "{transform:?} {}: {}", case.variant, case.relative_error);
        }
    }
}

#[test]
fn full_fraction_comparison_is_exact() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = small_config(dir.path(), Experiment::Compare);
    cfg.resolutions = vec![16, 32];
    cfg.wavelet.levels = Some(1);
    cfg.transforms = vec![TransformName::Dft];
    cfg.scheme.fraction = 1.0;
    let report = experiments::run(&cfg).unwrap();
    assert_eq!(report.cases.len(), 4);
    for case in &report.cases {
        assert!(case.relative_error < 1e-4, "{} {}: {}", case.operator, case.resolution, case.relative_error);
    }
}

#[test]
fn reports_are_reproducible_and_recomputable() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let cfg = small_config(a.path(), Experiment::FlipTestLevels);
    let first = experiments::run(&cfg).unwrap();
    let stored = RunReport::load(&a.path().join(mlcs::report::REPORT_FILE)).unwrap();
    let mut again_cfg = stored.config.clone();
    again_cfg.output_dir = b.path().to_path_buf();
    let second = experiments::run(&again_cfg).unwrap();
    assert_eq!(first.config_digest, stored.config_digest);
    for (x, y) in first.cases.iter().zip(&second.cases) {
        assert_eq!(x.seed, y.seed);
        assert!((x.relative_error - y.relative_error).abs() <= 1e-9);
    }
    assert!(first.verify_artifacts(a.path()).unwrap() <= 1e-12);
}

#[test]
fn identity_permutation_matches_baseline() {
    let dir = tempfile::tempdir().unwrap();
    let flip = experiments::run(&small_config(dir.path(), Experiment::FlipTest)).unwrap();
    let levels = experiments::run(&small_config(dir.path(), Experiment::FlipTestLevels)).unwrap();
    let base = |r: &RunReport| r.cases.iter().find(|c| c.variant == "unflipped").unwrap().relative_error;
    assert_eq!(base(&flip).to_bits(), base(&levels).to_bits());
}

#[test]
fn masks_have_one_white_pixel_per_sample() {
    let dir = tempfile::tempdir().unwrap();
    for kind in [SchemeKind::Multilevel, SchemeKind::PowerLaw, SchemeKind::Uniform] {
        let mut cfg = small_config(dir.path(), Experiment::Recover);
        cfg.scheme.kind = kind;
        cfg.solver.max_iters = 5;
        let report = experiments::run(&cfg).unwrap();
        let case = &report.cases[0];
        let mask = pgm::load_pgm(&dir.path().join(case.mask.as_ref().unwrap())).unwrap();
        let white = mask.data().iter().filter(|&&v| v == 1.0).count();
        assert_eq!(white, case.measurements, "{kind:?}");
        assert!(mask.data().iter().all(|&v| v == 0.0 || v == 1.0));
    }
}

#[test]
fn file_source_with_side_placeholder() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = small_config(dir.path(), Experiment::SparsityCurves);
    cfg.image = ImageSource::File { path: data_dir().join("phantom_{side}.pgm") };
    cfg.resolution = 128;
    cfg.wavelet.levels = None;
    cfg.validate().unwrap();
    let report = experiments::run(&cfg).unwrap();
    assert_eq!(report.metrics["fine_decay"], serde_json::json!(true));
    let csv = std::fs::read_to_string(dir.path().join("sparsity_128.csv")).unwrap();
    assert_eq!(csv.lines().count(), 102);
    assert!(csv.starts_with("epsilon,level_1,level_2,level_3,level_4\n"));
}

#[test]
fn coherence_maps_for_every_pair() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = small_config(dir.path(), Experiment::CoherenceMap);
    cfg.signal.n = 64;
    let report = experiments::run(&cfg).unwrap();
    assert_eq!(report.artifacts.len(), 8);
    let grid = formats::load_coherence_grid(&dir.path().join("coherence_wht_haar_64.csv")).unwrap();
    assert_eq!(grid.len(), 6);
    // Haar against sequency-ordered Walsh functions is block diagonal.
    for (j, row) in grid.iter().enumerate() {
        for (l, &v) in row.iter().enumerate() {
            if j != l {
                assert!(v < 1e-12, "({j}, {l}) = {v}");
            }
        }
    }
    let heat = pgm::load_pgm(&dir.path().join("coherence_dft_db4_64.pgm")).unwrap();
    assert_eq!((heat.width(), heat.height()), (6 * 16, 6 * 16));
}

#[test]
fn allocate_and_riplevels_write_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = small_config(dir.path(), Experiment::Allocate);
    cfg.signal.n = 64;
    cfg.signal.k = vec![1, 1, 2, 2, 3, 4];
    cfg.signal.scale = 2.0;
    let report = experiments::run(&cfg).unwrap();
    let scheme = formats::load_scheme(&dir.path().join("scheme.json")).unwrap();
    assert_eq!(scheme.len() as u64, report.metrics["total"].as_u64().unwrap());

    let mut cfg = small_config(dir.path(), Experiment::Riplevels);
    cfg.transform = TransformName::Gaussian;
    cfg.signal = mlcs::config::SignalSpec { n: 10, m: 8, boundaries: vec![4, 10], k: vec![1, 2], ..Default::default() };
    let report = experiments::run(&cfg).unwrap();
    let rip: formats::RipFile =
        serde_json::from_slice(&std::fs::read(dir.path().join("rip.json")).unwrap()).unwrap();
    assert_eq!(rip.mode, "exhaustive");
    assert_eq!(report.metrics["delta"].as_f64().unwrap(), rip.delta);
    assert!(rip.delta > 0.0);
}

#[test]
fn infeasible_scheme_is_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = small_config(dir.path(), Experiment::FlipTest);
    cfg.transform = TransformName::Wht;
    cfg.scheme.kind = SchemeKind::PowerLaw;
    let err = experiments::run(&cfg).unwrap_err();
    assert_eq!(err.exit_code(), 2);
}

fn mlcs(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_mlcs")).args(args).output().unwrap()
}

#[test]
fn cli_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"resolution": 100}"#).unwrap();
    assert_eq!(mlcs(&["flip-test", "--config", bad.to_str().unwrap()]).status.code(), Some(2));

    let cfg = dir.path().join("cfg.json");
    std::fs::write(
        &cfg,
        r#"{"resolution": 32, "wavelet": {"levels": 2}, "scheme": {"fraction": 0.3}, "solver": {"max_iters": 3}}"#,
    )
    .unwrap();
    let out = dir.path().join("out");
    let args = ["recover", "--config", cfg.to_str().unwrap(), "--out-dir", out.to_str().unwrap(), "--seed", "9"];
    let run = mlcs(&args);
    assert_eq!(run.status.code(), Some(0), "{}", String::from_utf8_lossy(&run.stderr));
    let report = RunReport::load(&out.join("report.json")).unwrap();
    assert_eq!(report.root_seed, 9);

    let strict = mlcs(&[&args[..], &["--strict", "--threads", "1"]].concat());
    assert_eq!(strict.status.code(), Some(3));
}
