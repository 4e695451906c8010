//! Batch front end: input parsing, fitting, output files and the `binclust`
//! command line.
//!
//! Input files are CSV. Center format has rows `center,frequency` and gets
//! its edges from the midpoints between centers; edge format has rows
//! `left_edge,right_edge,frequency` with contiguous bins. Lines starting with
//! `#` are ignored, and a header row is skipped when `--header` is given.
//!
//! `fit` writes, per chain, a trace CSV (`iteration,k,partition,alpha`), a
//! summary JSON and a density CSV (`x,density`). Floating-point values are
//! written with 17 significant digits so reruns are byte-identical. Wall-clock
//! timings go to a separate `run_info.json`.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::binning::edges_from_midpoints;
use crate::error::Error;
use crate::estimators::{
    conditional_density, conditional_param_estimates, default_grid, mean_order_violations,
    mixing_weights, modal_partition_with_count,
};
use crate::sampler::{run_chains, SamplerConfig};
use crate::synthetic::simulate_benchmark;
use crate::types::{BinLayout, BinnedDataset, Hyperparams, MoveCounts, Trace};

/// Environment variable holding the log filter, e.g. `BINCLUST_LOG=debug`.
pub const LOG_ENV: &str = "BINCLUST_LOG";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: u64,
        message: String,
    },
    #[error("{path}:{line}: bin does not start where the previous one ends")]
    NonContiguousEdges { path: PathBuf, line: u64 },
    #[error("cannot read {path}: {source}")]
    Input {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("invalid input: {0}")]
    Validation(Error),
    #[error("{0}")]
    Usage(String),
    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("fit failed: {0}")]
    Runtime(Error),
}

impl CliError {
    /// 1 for unusable input or flags, 2 for failures while fitting or writing.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io { .. } | CliError::Runtime(_) => 2,
            _ => 1,
        }
    }
}

/// Layout of an input file.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct InputFormat {
    /// `left_edge,right_edge,frequency` rows instead of `center,frequency`.
    pub edges: bool,
    /// First non-comment row is a header.
    pub header: bool,
}

fn parse_error(path: &Path, line: u64, message: impl Into<String>) -> CliError {
    CliError::Parse {
        path: path.to_path_buf(),
        line,
        message: message.into(),
    }
}

/// Reads a binned dataset from a CSV file.
pub fn parse_input(path: &Path, format: InputFormat) -> Result<BinnedDataset, CliError> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Input {
        path: path.to_path_buf(),
        source,
    })?;
    parse_input_str(&text, path, format)
}

/// [`parse_input`] on in-memory text; `path` is only used in messages.
pub fn parse_input_str(
    text: &str,
    path: &Path,
    format: InputFormat,
) -> Result<BinnedDataset, CliError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(format.header)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(text.as_bytes());
    let columns = if format.edges { 3 } else { 2 };
    let mut keys: Vec<(f64, f64)> = Vec::new();
    let mut freqs = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            parse_error(path, line, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() == 1 && record[0].is_empty() {
            continue;
        }
        if record.len() != columns {
            return Err(parse_error(
                path,
                line,
                format!("expected {columns} columns, found {}", record.len()),
            ));
        }
        let number = |i: usize, what: &str| {
            record[i]
                .parse::<f64>()
                .ok()
                .filter(|v| !v.is_nan())
                .ok_or_else(|| {
                    parse_error(
                        path,
                        line,
                        format!("{what} {:?} is not a number", &record[i]),
                    )
                })
        };
        let freq: i64 = record[columns - 1].parse().map_err(|_| {
            parse_error(
                path,
                line,
                format!("frequency {:?} is not an integer", &record[columns - 1]),
            )
        })?;
        if freq < 0 {
            return Err(CliError::Validation(Error::NegativeFrequency {
                bin: freqs.len() + 1,
            }));
        }
        if format.edges {
            let (left, right) = (number(0, "left edge")?, number(1, "right edge")?);
            if left >= right {
                return Err(parse_error(
                    path,
                    line,
                    "left edge must be below right edge",
                ));
            }
            if let Some(&(_, prev_right)) = keys.last() {
                if left != prev_right {
                    return Err(CliError::NonContiguousEdges {
                        path: path.to_path_buf(),
                        line,
                    });
                }
            }
            keys.push((left, right));
        } else {
            let center = number(0, "center")?;
            if !center.is_finite() {
                return Err(parse_error(path, line, "center must be finite"));
            }
            if let Some(&(prev, _)) = keys.last() {
                if center <= prev {
                    return Err(parse_error(
                        path,
                        line,
                        "centers must be strictly increasing",
                    ));
                }
            }
            keys.push((center, center));
        }
        freqs.push(freq as u64);
    }
    let layout = if format.edges {
        let mut edges: Vec<f64> = keys.iter().map(|k| k.0).collect();
        edges.extend(keys.last().map(|k| k.1));
        if edges.is_empty() {
            return Err(CliError::Validation(Error::EmptyDataset));
        }
        BinLayout::from_edges(edges)
    } else {
        let centers: Vec<f64> = keys.iter().map(|k| k.0).collect();
        if centers.is_empty() {
            return Err(CliError::Validation(Error::EmptyDataset));
        }
        edges_from_midpoints(&centers)
    }
    .map_err(CliError::Validation)?;
    BinnedDataset::new(layout, freqs).map_err(CliError::Validation)
}

/// Formats a float with 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Renders a dataset in the format [`parse_input`] reads back exactly:
/// center format when the layout carries centers, edge format otherwise.
pub fn format_dataset(dataset: &BinnedDataset) -> (String, InputFormat) {
    let mut out = String::new();
    match &dataset.layout.centers {
        Some(centers) => {
            out.push_str("# center,frequency\n");
            for (c, f) in centers.iter().zip(&dataset.freqs) {
                let _ = writeln!(out, "{},{f}", fmt_f64(*c));
            }
        }
        None => {
            out.push_str("# left_edge,right_edge,frequency\n");
            for (l, f) in dataset.freqs.iter().enumerate() {
                let (lo, hi) = dataset.layout.bounds(l);
                let _ = writeln!(out, "{},{},{f}", fmt_f64(lo), fmt_f64(hi));
            }
        }
    }
    let format = InputFormat {
        edges: dataset.layout.centers.is_none(),
        header: false,
    };
    (out, format)
}

pub fn write_dataset(dataset: &BinnedDataset, path: &Path) -> Result<InputFormat, CliError> {
    let (text, format) = format_dataset(dataset);
    write_file(path, &text)?;
    Ok(format)
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Everything needed to reproduce a fit; echoed in every summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitConfig {
    pub input: PathBuf,
    pub format: InputFormat,
    pub hyper: Hyperparams,
    pub sampler: SamplerConfig,
    pub chains: usize,
    pub grid_points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupSummary {
    pub size: usize,
    pub weight: f64,
    pub mean: f64,
    pub sd: f64,
}

/// Per-chain summary written as JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    /// 1-based chain number; the chain draws from stream `chain - 1` of `seed`.
    pub chain: usize,
    pub seed: u64,
    pub n: usize,
    pub retained_draws: usize,
    pub modal_partition: Vec<usize>,
    pub modal_count: usize,
    pub groups: Vec<GroupSummary>,
    /// 1-based positions `j` where group `j + 1` has a mean not above group `j`.
    pub mean_order_violations: Vec<usize>,
    pub moves: MoveCounts,
    pub config: FitConfig,
}

/// Result of one chain of a fit.
#[derive(Debug, Clone)]
pub struct ChainFit {
    pub trace: Trace,
    pub summary: Summary,
    pub grid: Vec<f64>,
    pub density: Vec<f64>,
    pub runtime_seconds: f64,
}

/// Loads the data, runs every chain and computes the estimates.
pub fn fit(config: &FitConfig) -> Result<Vec<ChainFit>, CliError> {
    let dataset = parse_input(&config.input, config.format)?;
    fit_dataset(&dataset, config)
}

/// Like [`fit`] on an already loaded dataset.
pub fn fit_dataset(dataset: &BinnedDataset, config: &FitConfig) -> Result<Vec<ChainFit>, CliError> {
    config.hyper.validate().map_err(CliError::Validation)?;
    config.sampler.validate().map_err(CliError::Validation)?;
    if config.chains == 0 {
        return Err(CliError::Usage("--chains must be at least 1".into()));
    }
    let grid = default_grid(&dataset.layout, config.grid_points).map_err(CliError::Validation)?;
    let start = Instant::now();
    let traces = run_chains(dataset, &config.hyper, &config.sampler, config.chains)
        .map_err(CliError::Runtime)?;
    let runtime_seconds = start.elapsed().as_secs_f64();
    traces
        .into_iter()
        .enumerate()
        .map(|(i, trace)| {
            let (pi_hat, count) = modal_partition_with_count(&trace).map_err(CliError::Runtime)?;
            let estimates =
                conditional_param_estimates(&trace, &pi_hat).map_err(CliError::Runtime)?;
            let density = conditional_density(&trace, &pi_hat, &grid).map_err(CliError::Runtime)?;
            let violations = mean_order_violations(&estimates);
            if !violations.is_empty() {
                log::warn!(
                    "chain {}: group means are not increasing at positions {violations:?}",
                    i + 1
                );
            }
            let groups = pi_hat
                .sizes()
                .iter()
                .zip(mixing_weights(&pi_hat, dataset.n))
                .zip(&estimates)
                .map(|((&size, weight), est)| GroupSummary {
                    size,
                    weight,
                    mean: est.mean,
                    sd: est.sd,
                })
                .collect();
            log::info!(
                "chain {}: modal partition {pi_hat} visited {count} of {} draws",
                i + 1,
                trace.len()
            );
            let summary = Summary {
                chain: i + 1,
                seed: config.sampler.seed,
                n: dataset.n,
                retained_draws: trace.len(),
                modal_partition: pi_hat.sizes().to_vec(),
                modal_count: count,
                groups,
                mean_order_violations: violations.into_iter().map(|j| j + 1).collect(),
                moves: trace.moves,
                config: config.clone(),
            };
            Ok(ChainFit {
                trace,
                summary,
                grid: grid.clone(),
                density,
                runtime_seconds,
            })
        })
        .collect()
}

/// Rewrites every non-integer number as a 17-significant-digit literal.
fn with_full_precision(value: Value) -> Value {
    match value {
        Value::Number(n) if n.is_f64() => {
            let x = n.as_f64().expect("checked f64");
            fmt_f64(x).parse().map(Value::Number).unwrap_or(Value::Null)
        }
        Value::Array(items) => Value::Array(items.into_iter().map(with_full_precision).collect()),
        Value::Object(map) => Value::Object(
            map.into_iter()
                .map(|(k, v)| (k, with_full_precision(v)))
                .collect(),
        ),
        other => other,
    }
}

pub fn summary_json(summary: &Summary) -> String {
    let value = serde_json::to_value(summary).expect("summary is serializable");
    let mut text =
        serde_json::to_string_pretty(&with_full_precision(value)).expect("value is serializable");
    text.push('\n');
    text
}

pub fn trace_csv(trace: &Trace) -> String {
    let mut out = String::from("iteration,k,partition,alpha\n");
    for ((t, p), alpha) in trace
        .iterations
        .iter()
        .zip(&trace.partitions)
        .zip(&trace.alpha_draws)
    {
        let _ = writeln!(out, "{},{},{p},{}", t + 1, p.num_groups(), fmt_f64(*alpha));
    }
    out
}

pub fn density_csv(grid: &[f64], density: &[f64]) -> String {
    let mut out = String::from("x,density\n");
    for (x, f) in grid.iter().zip(density) {
        let _ = writeln!(out, "{},{}", fmt_f64(*x), fmt_f64(*f));
    }
    out
}

/// Output file names of one chain; suffixed with the chain number when a fit
/// has several chains.
pub fn output_paths(out_dir: &Path, chain: usize, chains: usize) -> [PathBuf; 3] {
    let suffix = if chains > 1 {
        format!("_chain{chain}")
    } else {
        String::new()
    };
    [
        out_dir.join(format!("trace{suffix}.csv")),
        out_dir.join(format!("summary{suffix}.json")),
        out_dir.join(format!("density{suffix}.csv")),
    ]
}

/// Writes trace, summary and density files for every chain, plus
/// `run_info.json` with timings.
pub fn write_outputs(fits: &[ChainFit], out_dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(out_dir).map_err(|source| CliError::Io {
        path: out_dir.to_path_buf(),
        source,
    })?;
    for fit in fits {
        let [trace, summary, density] = output_paths(out_dir, fit.summary.chain, fits.len());
        write_file(&trace, &trace_csv(&fit.trace))?;
        write_file(&summary, &summary_json(&fit.summary))?;
        write_file(&density, &density_csv(&fit.grid, &fit.density))?;
    }
    let info = serde_json::json!({
        "version": env!("CARGO_PKG_VERSION"),
        "runtime_seconds": fits.first().map_or(0.0, |f| f.runtime_seconds),
        "chains": fits.len(),
    });
    write_file(
        &out_dir.join("run_info.json"),
        &format!("{}\n", serde_json::to_string_pretty(&info).expect("json")),
    )
}

/// Fits and writes outputs in one go.
pub fn run_fit(config: &FitConfig, out_dir: &Path) -> Result<Vec<ChainFit>, CliError> {
    let fits = fit(config)?;
    write_outputs(&fits, out_dir)?;
    Ok(fits)
}

#[derive(Debug, Parser)]
#[command(
    name = "binclust",
    version,
    about = "Bayesian nonparametric clustering of binned data"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Fit the model to a binned dataset.
    Fit(FitArgs),
    /// Simulate and bin the four-component benchmark mixture.
    Simulate(SimulateArgs),
}

#[derive(Debug, Args)]
struct FitArgs {
    /// CSV file with `center,frequency` rows (or edge rows, see --edges-format).
    #[arg(long)]
    input: PathBuf,
    /// Rows are `left_edge,right_edge,frequency`.
    #[arg(long)]
    edges_format: bool,
    /// Skip a header row.
    #[arg(long)]
    header: bool,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    omega: f64,
    /// Variance scale of group means; larger values allow more groups.
    #[arg(long, default_value_t = 1.0)]
    c: f64,
    #[arg(long, default_value_t = 1.1)]
    a: f64,
    #[arg(long, default_value_t = 1.0)]
    b: f64,
    /// Shape of the gamma hyperprior on the total mass parameter.
    #[arg(long, default_value_t = 1.0)]
    alpha_shape: f64,
    /// Rate of the gamma hyperprior on the total mass parameter.
    #[arg(long, default_value_t = 1.1)]
    alpha_rate: f64,
    #[arg(long, default_value_t = 30_000)]
    iters: usize,
    #[arg(long, default_value_t = 20_000)]
    burnin: usize,
    #[arg(long, default_value_t = 1)]
    thin: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    chains: usize,
    /// Number of density grid points.
    #[arg(long, default_value_t = 512)]
    grid: usize,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
}

impl FitArgs {
    fn config(&self) -> FitConfig {
        FitConfig {
            input: self.input.clone(),
            format: InputFormat {
                edges: self.edges_format,
                header: self.header,
            },
            hyper: Hyperparams {
                omega: self.omega,
                c: self.c,
                a: self.a,
                b: self.b,
                alpha_shape: self.alpha_shape,
                alpha_rate: self.alpha_rate,
            },
            sampler: SamplerConfig {
                iterations: self.iters,
                burn_in: self.burnin,
                thin: self.thin,
                seed: self.seed,
                ..SamplerConfig::default()
            },
            chains: self.chains,
            grid_points: self.grid,
        }
    }
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[arg(long, default_value_t = 500)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Center-format CSV to write.
    #[arg(long)]
    out: PathBuf,
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code.
pub fn run_command<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
        }
    };
    let result = match cli.command {
        Command::Fit(args) => run_fit(&args.config(), &args.out).map(|fits| {
            for f in &fits {
                let s = &f.summary;
                let sizes: Vec<String> = s.modal_partition.iter().map(|v| v.to_string()).collect();
                println!(
                    "chain {}: modal partition ({}) in {}/{} draws",
                    s.chain,
                    sizes.join(","),
                    s.modal_count,
                    s.retained_draws
                );
            }
        }),
        Command::Simulate(args) => simulate_benchmark(args.n, args.seed)
            .map_err(CliError::Validation)
            .and_then(|d| write_dataset(&d, &args.out))
            .map(|_| ()),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

/// Installs the logger, filtered by [`LOG_ENV`] (default `warn`).
pub fn init_logging() {
    let _ = env_logger::Builder::from_env(env_logger::Env::new().filter_or(LOG_ENV, "warn"))
        .format_timestamp(None)
        .try_init();
}
