use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use mlcs::config::{Experiment, ExperimentConfig};
use mlcs::error::{HarnessError, Result};
use mlcs::experiments;

#[derive(Parser)]
#[command(name = "mlcs", version, about = "Multilevel compressed sensing experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Recover an image and its flipped wavelet coefficients.
    FlipTest(Common),
    /// Flip test with the permutation restricted to each wavelet scale.
    FlipTestLevels(Common),
    /// Dense random against structured sensing across resolutions.
    Compare(Common),
    /// Per-scale effective sparsity curves of an image.
    SparsityCurves(Common),
    /// Block coherence maps of transform/wavelet pairs.
    CoherenceMap(Common),
    /// RIP-in-levels constant of a dense random matrix.
    Riplevels(Common),
    /// Per-level measurement allocation for a sparsity pattern.
    Allocate(Common),
    /// Single image reconstruction.
    Recover(Common),
}

#[derive(Args)]
struct Common {
    /// JSON experiment configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Root seed, overriding the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory, overriding the config.
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Worker threads for independent cases.
    #[arg(long)]
    threads: Option<usize>,
    /// Exit with status 3 if any solve fails to converge.
    #[arg(long)]
    strict: bool,
}

impl Command {
    fn split(self) -> (Experiment, Common) {
        match self {
            Command::FlipTest(c) => (Experiment::FlipTest, c),
            Command::FlipTestLevels(c) => (Experiment::FlipTestLevels, c),
            Command::Compare(c) => (Experiment::Compare, c),
            Command::SparsityCurves(c) => (Experiment::SparsityCurves, c),
            Command::CoherenceMap(c) => (Experiment::CoherenceMap, c),
            Command::Riplevels(c) => (Experiment::Riplevels, c),
            Command::Allocate(c) => (Experiment::Allocate, c),
            Command::Recover(c) => (Experiment::Recover, c),
        }
    }
}

fn execute(command: Command) -> Result<()> {
    let (experiment, common) = command.split();
    let mut cfg = match &common.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    cfg.experiment = experiment;
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    if let Some(dir) = common.out_dir {
        cfg.output_dir = dir;
    }
    cfg.validate()?;
    if let Some(threads) = common.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| HarnessError::config(e.to_string()))?;
    }
    let report = experiments::run(&cfg)?;
    for case in &report.cases {
        println!(
            "{:>5} {:<22} {:<15} trial {:<3} err {:>9.4}%  {:>6.1}s{}",
            case.resolution,
            case.operator,
            case.variant,
            case.trial,
            case.relative_error,
            case.seconds,
            if case.converged { "" } else { "  (not converged)" }
        );
    }
    for (key, value) in &report.metrics {
        println!("{key}: {value}");
    }
    println!("report: {}", cfg.output_dir.join(mlcs::report::REPORT_FILE).display());
    let unconverged = report.unconverged();
    if common.strict && unconverged > 0 {
        return Err(HarnessError::NotConverged(format!("{unconverged} solves stopped at the iteration limit")));
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match execute(Cli::parse().command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
