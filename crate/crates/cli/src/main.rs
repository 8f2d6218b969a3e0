//! `quasirand`: sample block-model graphs, analyze their spectra and
//! discrepancies, and check quasirandomness properties at finite size.

mod commands;
mod error;
mod manifest;
mod plot;

use clap::{Args, Parser, Subcommand, ValueEnum};
use error::{CliError, CliResult};
use serde::Serialize;
use std::path::{Path, PathBuf};

#[derive(Debug, Parser)]
#[command(name = "quasirand", version, about = "Generalized quasirandom graph toolkit")]
pub struct Cli {
    /// Worker threads for sweeps and enumeration. Outputs do not depend on it.
    #[arg(long, short = 'j', global = true, env = "QUASIRAND_JOBS")]
    pub jobs: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample a graph from a model; writes an edge list and a JSON sidecar.
    Generate(GenerateArgs),
    /// Spectra, k-variances and community/anticommunity classification.
    Analyze(AnalyzeArgs),
    /// Multiway discrepancy of a partition, or minimum k-way discrepancy.
    Discrepancy(DiscrepancyArgs),
    /// Finite-size checks of the quasirandomness properties.
    Verify(VerifyArgs),
    /// Convergence-rate sweep over graph sizes and seeds.
    Sweep(SweepArgs),
    /// Re-run a command from its manifest.
    Replay(ReplayArgs),
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    /// Model JSON: `{"k": .., "r": [..], "P": [[..]]}`.
    #[arg(long)]
    pub model: PathBuf,
    /// Number of vertices (multinomial memberships).
    #[arg(long, required_unless_present = "fixed_sizes")]
    pub n: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Comma-separated class sizes; vertices are assigned in contiguous blocks.
    #[arg(long, value_delimiter = ',')]
    pub fixed_sizes: Option<Vec<usize>>,
    /// Edge-list path; the sidecar goes to `<out>.sidecar.json`.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    pub graph: PathBuf,
    #[arg(long)]
    pub k: usize,
    #[arg(long, default_value_t = 0.5)]
    pub delta: f64,
    /// Adjacency threshold multiplier: structural iff `|lambda| > c_thr sqrt(n ln n)`.
    #[arg(long, default_value_t = 1.0)]
    pub c_thr: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Also write the weighted spectral embedding as CSV.
    #[arg(long)]
    pub embedding_csv: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DiscMode {
    Exact,
    Heuristic,
    Bounds,
}

#[derive(Debug, Args)]
pub struct DiscrepancyArgs {
    pub graph: PathBuf,
    /// Partition JSON: an array of class labels, one per vertex.
    #[arg(long, conflicts_with = "min_k", required_unless_present = "min_k")]
    pub partition: Option<PathBuf>,
    /// Minimize over all proper k-partitions instead.
    #[arg(long)]
    pub min_k: Option<usize>,
    #[arg(long, value_enum, default_value_t = DiscMode::Exact)]
    pub mode: DiscMode,
    /// Largest `|U_i| + |U_j|` enumerated exactly.
    #[arg(long, default_value_t = quasirand::discrepancy::DEFAULT_CAP)]
    pub cap: usize,
    /// Largest number of partitions visited by exact `--min-k`.
    #[arg(long, default_value_t = quasirand::discrepancy::DEFAULT_PARTITION_BUDGET)]
    pub budget: f64,
    /// Fraction of extreme-degree vertices ignored in the degree range.
    #[arg(long, default_value_t = 0.05)]
    pub exception_fraction: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    pub graph: PathBuf,
    /// Comma-separated subset of PI, PI_plus, PII, PIII, PIV, P0_proxy.
    #[arg(long, value_delimiter = ',', default_value = "PI,PI_plus,PII,PIII,PIV,P0_proxy")]
    pub properties: Vec<String>,
    /// Number of classes; defaults to the model's or partition's.
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Partition JSON used by PIII and PIV; otherwise the variance-minimizing partition.
    #[arg(long)]
    pub partition: Option<PathBuf>,
    /// Thresholds JSON; missing keys keep their defaults.
    #[arg(long)]
    pub thresholds: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = quasirand::discrepancy::DEFAULT_PARTITION_BUDGET)]
    pub budget: f64,
    /// Also audit the variance-based discrepancy upper bound.
    #[arg(long)]
    pub audit: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// Comma-separated graph sizes (at least 3).
    #[arg(long)]
    pub sizes: String,
    /// Seeds: a comma-separated list or a half-open range `a..b`.
    #[arg(long)]
    pub seeds: String,
    /// Comma-separated metrics.
    #[arg(long, default_value = "weighted_kvariance")]
    pub metrics: String,
    /// Tolerated excess of the fitted slope over the target exponent.
    #[arg(long, default_value_t = 0.2)]
    pub band: f64,
    #[arg(long)]
    pub out_csv: PathBuf,
    /// Slope summary JSON; defaults to `<out-csv>.summary.json`.
    #[arg(long)]
    pub summary: Option<PathBuf>,
    /// Write a log-log SVG plot.
    #[arg(long)]
    pub plot: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReplayArgs {
    pub manifest: PathBuf,
}

pub(crate) fn read_text(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

pub(crate) fn write_text(path: &Path, text: &str) -> CliResult<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| CliError::Io { path: dir.to_path_buf(), source: e })?;
    }
    std::fs::write(path, text).map_err(|e| CliError::Io { path: path.to_path_buf(), source: e })
}

pub(crate) fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report types serialize");
    s.push('\n');
    s
}

pub(crate) fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    write_text(path, &to_json(value))
}

fn configure_jobs(jobs: Option<usize>) -> CliResult<()> {
    #[cfg(feature = "parallel")]
    if let Some(j) = jobs {
        if j == 0 {
            return Err(CliError::Usage("--jobs must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(j)
            .build_global()
            .map_err(|e| CliError::Usage(format!("cannot size the worker pool: {e}")))?;
    }
    #[cfg(not(feature = "parallel"))]
    let _ = jobs;
    Ok(())
}

pub(crate) fn dispatch(command: Command, argv: Vec<String>) -> CliResult<()> {
    match command {
        Command::Generate(a) => commands::generate(a, argv),
        Command::Analyze(a) => commands::analyze(a, argv),
        Command::Discrepancy(a) => commands::discrepancy(a, argv),
        Command::Verify(a) => commands::verify(a, argv),
        Command::Sweep(a) => commands::sweep(a, argv),
        Command::Replay(a) => replay(&a.manifest),
    }
}

fn replay(path: &Path) -> CliResult<()> {
    let m = manifest::RunManifest::read(path)?;
    if m.argv.first().map(String::as_str) == Some("replay") {
        return Err(CliError::Usage("a manifest cannot replay another replay".into()));
    }
    let cli = Cli::try_parse_from(std::iter::once("quasirand".to_string()).chain(m.argv.iter().cloned()))
        .map_err(|e| CliError::Usage(format!("manifest arguments no longer parse: {e}")))?;
    eprintln!("replaying `{}` from {}", m.command, path.display());
    dispatch(cli.command, m.argv)
}

fn main() {
    let cli = Cli::parse();
    let argv = manifest::strip_jobs(&std::env::args().skip(1).collect::<Vec<_>>());
    let result = configure_jobs(cli.jobs).and_then(|_| dispatch(cli.command, argv));
    if let Err(e) = result {
        eprintln!("error: {e}");
        std::process::exit(e.code());
    }
}
