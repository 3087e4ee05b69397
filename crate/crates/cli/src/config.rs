//! Experiment configuration, loaded from JSON.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use mlcs_core::operators::WaveletKind;
use mlcs_core::solver::SolverConfig;

use crate::error::{HarnessError, Result};
use crate::phantom::Scene;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    FlipTest,
    FlipTestLevels,
    Compare,
    SparsityCurves,
    CoherenceMap,
    Riplevels,
    Allocate,
    Recover,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum ImageSource {
    Phantom { scene: Scene },
    /// PGM file; a `{side}` placeholder in the path selects a per-resolution
    /// file.
    File { path: PathBuf },
}

impl ImageSource {
    pub fn path_for(&self, side: usize) -> Option<PathBuf> {
        match self {
            ImageSource::Phantom { .. } => None,
            ImageSource::File { path } => Some(PathBuf::from(path.to_string_lossy().replace("{side}", &side.to_string()))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WaveletName {
    Haar,
    Db4,
}

impl From<WaveletName> for WaveletKind {
    fn from(w: WaveletName) -> Self {
        match w {
            WaveletName::Haar => WaveletKind::Haar,
            WaveletName::Db4 => WaveletKind::Db4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WaveletSpec {
    pub kind: WaveletName,
    /// Decomposition depth; `None` uses `log2(side) - 3` for images and full
    /// depth for 1D signals.
    pub levels: Option<usize>,
}

impl Default for WaveletSpec {
    fn default() -> Self {
        Self { kind: WaveletName::Db4, levels: None }
    }
}

impl WaveletSpec {
    pub fn image_levels(&self, side: usize) -> usize {
        self.levels.unwrap_or_else(|| (side.trailing_zeros() as usize).saturating_sub(3).max(1))
    }
}

/// Measurement transform.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TransformName {
    Dft,
    Wht,
    /// Random +-1 matrix: stored dense when small, otherwise the fast
    /// randomized Hadamard ensemble.
    Bernoulli,
    Gaussian,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SchemeKind {
    /// Radial dyadic bands with the per-level allocation driven by the
    /// image's own wavelet sparsity at accuracy `epsilon`.
    Multilevel,
    /// Variable-density pattern with density `(1 + |w|)^-alpha`.
    PowerLaw,
    Uniform,
    Full,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SchemeSpec {
    pub kind: SchemeKind,
    /// Fraction of the ambient dimension measured.
    pub fraction: f64,
    /// Accuracy of the sparsity estimate behind multilevel allocations.
    pub epsilon: f64,
    /// Density exponent of power-law patterns.
    pub alpha: f64,
}

impl Default for SchemeSpec {
    fn default() -> Self {
        Self { kind: SchemeKind::Multilevel, fraction: 0.125, epsilon: 0.99, alpha: 1.0 }
    }
}

/// Serializable mirror of [`SolverConfig`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverSpec {
    pub eta: f64,
    pub max_iters: usize,
    pub tol_feasibility: f64,
    pub tol_objective: f64,
    pub step: Option<f64>,
    pub step_scale: f64,
    pub relaxation: f64,
    pub trace_every: usize,
}

impl Default for SolverSpec {
    fn default() -> Self {
        let d = SolverConfig::default();
        Self {
            eta: d.eta,
            max_iters: 600,
            tol_feasibility: d.tol_feasibility,
            tol_objective: d.tol_objective,
            step: d.step,
            step_scale: 0.03,
            relaxation: d.relaxation,
            trace_every: 10,
        }
    }
}

impl SolverSpec {
    pub fn to_config(&self, seed: u64) -> SolverConfig {
        SolverConfig {
            eta: self.eta,
            max_iters: self.max_iters,
            tol_feasibility: self.tol_feasibility,
            tol_objective: self.tol_objective,
            step: self.step,
            step_scale: self.step_scale,
            relaxation: self.relaxation,
            trace_every: self.trace_every,
            seed,
        }
    }
}

/// Settings for the dense 1D diagnostics (coherence maps, RIP estimates,
/// allocation).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SignalSpec {
    /// Signal length.
    pub n: usize,
    /// Measurements for dense ensembles.
    pub m: usize,
    /// Level boundaries; empty means dyadic.
    pub boundaries: Vec<usize>,
    /// Per-level sparsities.
    pub k: Vec<usize>,
    /// Allocation scale.
    pub scale: f64,
    /// Monte Carlo trials; 0 requests exhaustive enumeration.
    pub trials: usize,
}

impl Default for SignalSpec {
    fn default() -> Self {
        Self { n: 256, m: 10, boundaries: Vec::new(), k: Vec::new(), scale: 1.0, trials: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub image: ImageSource,
    pub resolution: usize,
    /// Resolutions for comparisons.
    pub resolutions: Vec<usize>,
    pub wavelet: WaveletSpec,
    pub transform: TransformName,
    /// Transforms compared against the dense ensemble, or paired with every
    /// wavelet in coherence maps.
    pub transforms: Vec<TransformName>,
    pub scheme: SchemeSpec,
    pub solver: SolverSpec,
    pub signal: SignalSpec,
    /// Root seed; every case derives its own streams from it.
    pub seed: u64,
    /// Independent seeded repetitions per case.
    pub trials: usize,
    pub output_dir: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            experiment: Experiment::FlipTest,
            image: ImageSource::Phantom { scene: Scene::Ellipses },
            resolution: 256,
            resolutions: vec![128, 256, 512],
            wavelet: WaveletSpec::default(),
            transform: TransformName::Dft,
            transforms: vec![TransformName::Dft, TransformName::Wht],
            scheme: SchemeSpec::default(),
            solver: SolverSpec::default(),
            signal: SignalSpec::default(),
            seed: 1,
            trials: 1,
            output_dir: PathBuf::from("out"),
        }
    }
}

fn check_pow2(what: &str, v: usize) -> Result<()> {
    if v < 2 || !v.is_power_of_two() {
        return Err(HarnessError::config(format!("{what} must be a power of two >= 2, got {v}")));
    }
    Ok(())
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| HarnessError::config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// SHA-256 of the compact JSON encoding, hex.
    pub fn digest(&self) -> String {
        let compact = serde_json::to_vec(self).expect("config serializes");
        hex::encode(Sha256::digest(&compact))
    }

    /// Resolutions the configured experiment touches.
    pub fn sides(&self) -> Vec<usize> {
        match self.experiment {
            Experiment::Compare => self.resolutions.clone(),
            _ => vec![self.resolution],
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_pow2("resolution", self.resolution)?;
        for &r in &self.resolutions {
            check_pow2("resolution", r)?;
        }
        for side in self.sides() {
            if let Some(path) = self.image.path_for(side) {
                if !path.is_file() {
                    return Err(HarnessError::config(format!("image {} does not exist", path.display())));
                }
            }
        }
        let f = self.scheme.fraction;
        if !(f > 0.0 && f <= 1.0) {
            return Err(HarnessError::config(format!("sampling fraction must lie in (0, 1], got {f}")));
        }
        let (epsilon, alpha) = (self.scheme.epsilon, self.scheme.alpha);
        if !(0.0..=1.0).contains(&epsilon) {
            return Err(HarnessError::config(format!("epsilon must lie in [0, 1], got {epsilon}")));
        }
        if !(alpha >= 0.0 && alpha.is_finite()) {
            return Err(HarnessError::config(format!("alpha must be finite and >= 0, got {alpha}")));
        }
        if self.trials == 0 {
            return Err(HarnessError::config("trials must be at least 1"));
        }
        for side in self.sides() {
            let levels = self.wavelet.image_levels(side);
            if levels > side.trailing_zeros() as usize {
                return Err(HarnessError::config(format!("{levels} wavelet levels exceed log2({side})")));
            }
        }
        self.solver.to_config(0).validate().map_err(|e| HarnessError::config(e.to_string()))?;
        Ok(())
    }
}
