//! `distortsec` experiment runner.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "distortsec",
    version,
    about = "Distortion-based encryption experiments"
)]
struct Cli {
    /// Worker threads for data-parallel loops (default: available processors).
    #[arg(long, global = true)]
    parallelism: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Debug, Args)]
struct GridArgs {
    /// Half-width of the codeword scan.
    #[arg(long, default_value_t = 6.0)]
    zmax: f64,
    /// Codeword scan step.
    #[arg(long, default_value_t = 1e-3)]
    zstep: f64,
    /// Tolerance of the local refinement around the coarse minimum.
    #[arg(long, default_value_t = 1e-6)]
    refine_tol: f64,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Worst-case distortion of the k-bit codec over a range of θ.
    WorstcaseSweep {
        #[arg(long)]
        k: u32,
        #[arg(long)]
        theta_min: f64,
        #[arg(long)]
        theta_max: f64,
        #[arg(long, default_value_t = 0.01)]
        theta_step: f64,
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
    },
    /// Posterior variance Var(X | Z = z) over a range of codewords.
    VarProfile {
        #[arg(long)]
        k: u32,
        #[arg(long)]
        theta: f64,
        #[arg(long, allow_hyphen_values = true)]
        z_min: f64,
        #[arg(long, allow_hyphen_values = true)]
        z_max: f64,
        #[arg(long, default_value_t = 1e-3)]
        z_step: f64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
    },
    /// Optimal θ and worst-case distortion for each key length.
    OptimizeTheta {
        /// Key lengths to optimize (repeatable).
        #[arg(long = "k", default_values_t = [1u32, 2, 3])]
        ks: Vec<u32>,
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
    },
    /// Runs a scenario document and writes report.json, per_time.csv and manifest.json.
    Scenario {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        samples: Option<usize>,
    },
    /// Encodes a trajectory file with a codec document.
    Encode(CodecArgs),
    /// Decodes a codeword file with a codec document.
    Decode(CodecArgs),
}

#[derive(Debug, Args)]
struct CodecArgs {
    /// Codec document (mirror schedule or shift+mirror trajectory codec).
    #[arg(long)]
    config: PathBuf,
    /// Input trajectory JSON (`{"states": [[...], ...]}`).
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Key: `0`/`1` for mirroring, comma-separated bit strings per
    /// coordinate for shift+mirror. Drawn from `--seed` when omitted.
    #[arg(long)]
    key: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
}

/// Bad invocation detected after argument parsing.
#[derive(Debug)]
struct UsageError(String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

pub(crate) fn current_threads() -> usize {
    #[cfg(feature = "parallel")]
    {
        rayon::current_num_threads()
    }
    #[cfg(not(feature = "parallel"))]
    {
        1
    }
}

fn run_with_threads(threads: Option<usize>, command: Command) -> anyhow::Result<()> {
    if threads == Some(0) {
        return Err(usage("--parallelism must be at least 1"));
    }
    #[cfg(feature = "parallel")]
    {
        let n = threads.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
        let pool = rayon::ThreadPoolBuilder::new().num_threads(n).build()?;
        pool.install(|| commands::run(command))
    }
    #[cfg(not(feature = "parallel"))]
    {
        if threads.is_some_and(|n| n > 1) {
            eprintln!("warning: built without the parallel feature, running on one thread");
        }
        commands::run(command)
    }
}

fn exit_code(err: &anyhow::Error) -> u8 {
    let validation = err.downcast_ref::<UsageError>().is_some()
        || err
            .downcast_ref::<distortsec::Error>()
            .is_some_and(distortsec::Error::is_validation);
    if validation {
        2
    } else {
        1
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    match run_with_threads(cli.parallelism, cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
