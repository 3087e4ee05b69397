//! On-disk formats: scheme and diagnostics JSON, CSV tables, raw sample
//! dumps and mask images.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use mlcs_core::coherence::{CoherenceMatrix, EstimateMode, RipEstimate};
use mlcs_core::levels::LevelPartition;
use mlcs_core::operators::Image2D;
use mlcs_core::sampling::SamplingScheme;
use mlcs_core::solver::SolveResult;
use mlcs_core::sparsity::SparsityCurve;

use crate::error::{HarnessError, Result};

fn write(path: &Path, bytes: impl AsRef<[u8]>) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
    }
    fs::write(path, bytes).map_err(|e| HarnessError::io(path, e))
}

fn read(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| HarnessError::io(path, e))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write(path, text)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchemeFile {
    pub n: usize,
    pub boundaries: Vec<usize>,
    pub m: Vec<usize>,
    pub omega: Vec<usize>,
    pub seed: u64,
}

impl From<&SamplingScheme> for SchemeFile {
    fn from(s: &SamplingScheme) -> Self {
        Self {
            n: s.ambient(),
            boundaries: s.partition().bounds().to_vec(),
            m: s.counts().to_vec(),
            omega: s.omega().to_vec(),
            seed: s.seed(),
        }
    }
}

impl SchemeFile {
    pub fn to_scheme(&self) -> Result<SamplingScheme> {
        let partition = LevelPartition::new(self.boundaries.clone())?;
        if partition.total() != self.n {
            return Err(HarnessError::config(format!("boundaries end at {}, n is {}", partition.total(), self.n)));
        }
        let scheme = SamplingScheme::new(partition, self.omega.clone(), self.seed)?;
        if scheme.counts() != self.m.as_slice() {
            return Err(HarnessError::config("per-level counts disagree with omega"));
        }
        Ok(scheme)
    }
}

pub fn save_scheme(path: &Path, scheme: &SamplingScheme) -> Result<()> {
    write_json(path, &SchemeFile::from(scheme))
}

pub fn load_scheme(path: &Path) -> Result<SamplingScheme> {
    let file: SchemeFile = serde_json::from_slice(&read(path)?)?;
    file.to_scheme()
}

fn csv_bytes(header: &[String], rows: impl Iterator<Item = Vec<String>>) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| HarnessError::config(e.to_string());
    w.write_record(header).map_err(csv_err)?;
    for row in rows {
        w.write_record(&row).map_err(csv_err)?;
    }
    w.into_inner().map_err(|e| HarnessError::config(e.to_string()))
}

/// Columns `epsilon, level_1, ..., level_r` of relative sparsities.
pub fn save_sparsity_curve(path: &Path, curve: &SparsityCurve) -> Result<()> {
    let mut header = vec!["epsilon".to_string()];
    header.extend((1..=curve.levels()).map(|l| format!("level_{l}")));
    let rel: Vec<Vec<f64>> = (0..curve.levels()).map(|l| curve.relative(l)).collect();
    let rows = curve.epsilons().iter().enumerate().map(|(e, eps)| {
        let mut row = vec![eps.to_string()];
        row.extend(rel.iter().map(|r| r[e].to_string()));
        row
    });
    write(path, csv_bytes(&header, rows)?)
}

/// `r x c` grid; row `j` holds `mu(U_jl)` for every column level `l`.
pub fn save_coherence_matrix(path: &Path, cm: &CoherenceMatrix) -> Result<()> {
    let header: Vec<String> = (1..=cm.col_levels()).map(|l| format!("level_{l}")).collect();
    let rows = (0..cm.row_levels()).map(|j| (0..cm.col_levels()).map(|l| cm.get(j, l).to_string()).collect());
    write(path, csv_bytes(&header, rows)?)
}

pub fn load_coherence_grid(path: &Path) -> Result<Vec<Vec<f64>>> {
    let bytes = read(path)?;
    let mut r = csv::Reader::from_reader(bytes.as_slice());
    r.records()
        .map(|rec| {
            let rec = rec.map_err(|e| HarnessError::format(path, e.to_string()))?;
            rec.iter()
                .map(|v| v.parse::<f64>().map_err(|e| HarnessError::format(path, e.to_string())))
                .collect()
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatternFile {
    pub boundaries: Vec<usize>,
    pub k: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RipFile {
    pub delta: f64,
    pub mode: String,
    pub trials: u64,
    pub pattern: PatternFile,
    pub seed: Option<u64>,
}

impl From<&RipEstimate> for RipFile {
    fn from(r: &RipEstimate) -> Self {
        let (mode, seed) = match r.mode {
            EstimateMode::Exhaustive { .. } => ("exhaustive", None),
            EstimateMode::MonteCarlo { seed, .. } => ("montecarlo", Some(seed)),
        };
        Self {
            delta: r.delta,
            mode: mode.to_string(),
            trials: r.trials,
            pattern: PatternFile { boundaries: r.pattern.partition().bounds().to_vec(), k: r.pattern.k().to_vec() },
            seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveSummary {
    pub iterations: usize,
    pub feasibility_gap: f64,
    pub objective: f64,
    pub residual: f64,
    pub converged: bool,
}

impl From<&SolveResult> for SolveSummary {
    fn from(r: &SolveResult) -> Self {
        Self {
            iterations: r.iterations,
            feasibility_gap: r.feasibility_gap,
            objective: r.objective,
            residual: r.residual,
            converged: r.converged,
        }
    }
}

/// Columns `iteration, objective, feasibility_gap, best_objective`.
pub fn save_trace(path: &Path, result: &SolveResult) -> Result<()> {
    let header: Vec<String> =
        ["iteration", "objective", "feasibility_gap", "best_objective"].iter().map(|s| s.to_string()).collect();
    let rows = result.trace.iter().map(|t| {
        vec![t.iteration.to_string(), t.objective.to_string(), t.feasibility_gap.to_string(), t.best_objective.to_string()]
    });
    write(path, csv_bytes(&header, rows)?)
}

/// Raw little-endian `f64` samples, row-major.
pub fn save_raw(path: &Path, img: &Image2D) -> Result<()> {
    let bytes: Vec<u8> = img.data().iter().flat_map(|v| v.to_le_bytes()).collect();
    write(path, bytes)
}

pub fn load_raw(path: &Path, width: usize, height: usize) -> Result<Image2D> {
    let bytes = read(path)?;
    if bytes.len() != width * height * 8 {
        return Err(HarnessError::format(path, format!("expected {} bytes", width * height * 8)));
    }
    let data = bytes.chunks_exact(8).map(|b| f64::from_le_bytes(b.try_into().expect("8-byte chunk"))).collect();
    Ok(Image2D::new(width, height, data)?)
}

/// White-on-black mask of the sampled DFT rows of a `side x side` grid, with
/// the zero frequency moved to the centre.
pub fn mask_image(rows: &[usize], side: usize) -> Image2D {
    let mut data = vec![0.0; side * side];
    let half = side / 2;
    for &r in rows {
        let (a, b) = (r / side, r % side);
        data[((a + half) % side) * side + (b + half) % side] = 1.0;
    }
    Image2D::new(side, side, data).expect("mask samples are finite")
}

/// Grayscale heat map of a coherence grid, `cell` pixels per block, scaled to
/// the largest entry.
pub fn heat_map(cm: &CoherenceMatrix, cell: usize) -> Image2D {
    let (r, c) = (cm.row_levels(), cm.col_levels());
    let max = cm.max().max(f64::MIN_POSITIVE);
    let (w, h) = (c * cell, r * cell);
    let data = (0..h * w).map(|i| cm.get(i / w / cell, i % w / cell) / max).collect();
    Image2D::new(w, h, data).expect("heat map samples are finite")
}
