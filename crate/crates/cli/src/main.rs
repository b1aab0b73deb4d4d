mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use commands::{CliError, Settings};

#[derive(Parser, Debug)]
#[command(name = "maxid", version, about = "Exact simulation of max-id vectors and sequences")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Draw n replicates of the d-dimensional vector.
    Simulate(Common),
    /// Goodness-of-fit checks over a five-seed panel.
    Validate(Common),
    /// Wall time of the sequence sampler over ascending dimensions.
    Bench {
        #[command(flatten)]
        common: Common,
        /// Exit 1 unless seconds increase strictly with d.
        #[arg(long)]
        check_monotone: bool,
    },
    /// Empirical and reference CDF of the scaled minimum.
    PlotData(Common),
}

#[derive(Args, Debug)]
struct Common {
    /// Family tag such as `mo-stable(alpha=0.5)` or `scale-mixture(frechet)`.
    #[arg(long)]
    family: Option<String>,
    /// JSON run file; flags given on the command line take precedence.
    #[arg(long)]
    params: Option<PathBuf>,
    #[arg(long)]
    d: Option<usize>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Comma-separated ascending dimensions.
    #[arg(long, value_delimiter = ',')]
    dims: Option<Vec<usize>>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    #[arg(long)]
    threads: Option<usize>,
    /// Significance level of the goodness-of-fit tests.
    #[arg(long)]
    alpha: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Simulate(c) => commands::simulate(&settings(c)?),
        Command::Validate(c) => commands::validate(&settings(c)?),
        Command::Bench {
            common,
            check_monotone,
        } => commands::bench(&settings(common)?, check_monotone),
        Command::PlotData(c) => commands::plot_data(&settings(c)?),
    }
}

fn settings(c: Common) -> Result<Settings, CliError> {
    if let Some(t) = c.threads {
        if t == 0 {
            return Err(CliError::Usage("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| CliError::Usage(format!("cannot size thread pool: {e}")))?;
    }
    Settings::resolve(
        c.family, c.params, c.d, c.n, c.seed, c.dims, c.out, c.format, c.alpha,
    )
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("maxid: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
