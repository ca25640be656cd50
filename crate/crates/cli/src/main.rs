//! `mdt`: mean distorting transformations from the command line.
//!
//! Exit codes: 0 success, 1 unreadable or malformed input, 2 singular input
//! or invalid reference index, 3 solver did not converge, 4 reflection in a
//! panorama.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use mdt_core::formats::FormatError;
use mdt_core::{Error, KarcherConfig};

#[derive(Parser)]
#[command(
    name = "mdt",
    version,
    about = "Mean distorting transformations and panorama re-referencing"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Print nothing on success.
    #[arg(short, long, global = true, conflicts_with = "verbose")]
    quiet: bool,

    /// Also print solver diagnostics on standard error.
    #[arg(short, long, global = true)]
    verbose: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Compute the mean distorting transformation of a transform set.
    Mdt {
        #[command(flatten)]
        io: Io,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Distortion of every transform under a chosen reference.
    Report {
        #[command(flatten)]
        io: Io,
        /// `mdt`, `identity`, or `index:<j>` with a 0-based entry index.
        #[arg(long, default_value = "mdt", value_parser = parse_reference)]
        reference: Reference,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Re-reference a panorama and write the corrected transform set.
    Rereference {
        #[command(flatten)]
        io: Io,
        /// Directory holding `<id>.png` for each entry; used for image sizes.
        #[arg(long)]
        images: Option<PathBuf>,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Re-reference a panorama and composite its images into one PNG.
    Compose {
        /// Transform set JSON.
        #[arg(long)]
        input: PathBuf,
        /// Output PNG.
        #[arg(long)]
        output: PathBuf,
        /// Directory holding `<id>.png` for each entry.
        #[arg(long)]
        images: PathBuf,
        /// Also write the corrected transform set here.
        #[arg(long)]
        transforms_output: Option<PathBuf>,
        /// Composite under the input transforms without re-referencing.
        #[arg(long)]
        raw: bool,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Fit affine maps to point correspondences and chain them into a transform set.
    Estimate {
        #[command(flatten)]
        io: Io,
        /// Directory holding `<id>.png`; sizes are recorded when present.
        #[arg(long)]
        images: Option<PathBuf>,
    },
}

#[derive(Args)]
struct Io {
    /// Input JSON document.
    #[arg(long)]
    input: PathBuf,
    /// Output JSON document. Written to standard output when omitted.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct SolverArgs {
    /// Iteration cap for the Karcher mean.
    #[arg(long)]
    max_iters: Option<usize>,
    /// Gradient tolerance for the Karcher mean.
    #[arg(long)]
    tol: Option<f64>,
}

impl SolverArgs {
    fn config(&self) -> KarcherConfig {
        let mut cfg = KarcherConfig::default();
        if let Some(n) = self.max_iters {
            cfg.max_iterations = n;
        }
        if let Some(t) = self.tol {
            cfg.gradient_tolerance = t;
        }
        cfg
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Reference {
    Mdt,
    Identity,
    Index(usize),
}

fn parse_reference(s: &str) -> Result<Reference, String> {
    match s {
        "mdt" => Ok(Reference::Mdt),
        "identity" => Ok(Reference::Identity),
        _ => s
            .strip_prefix("index:")
            .and_then(|j| j.parse().ok())
            .map(Reference::Index)
            .ok_or_else(|| format!("expected mdt, identity or index:<j>, got '{s}'")),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verbosity {
    Quiet,
    Normal,
    Verbose,
}

#[derive(Debug)]
pub enum CliError {
    Format(FormatError),
    Core(Error),
    BadIndex { index: usize, count: usize },
    Input(String),
}

impl From<FormatError> for CliError {
    fn from(e: FormatError) -> Self {
        CliError::Format(e)
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Format(e) => e.fmt(f),
            CliError::Core(e) => e.fmt(f),
            CliError::BadIndex { index, count } => {
                write!(
                    f,
                    "reference index {index} out of range for {count} entries"
                )
            }
            CliError::Input(msg) => f.write_str(msg),
        }
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Format(_) | CliError::Input(_) => 1,
            CliError::BadIndex { .. } => 2,
            CliError::Core(e) => match e {
                Error::SingularMatrix { .. }
                | Error::NotPositiveDefinite { .. }
                | Error::InvalidMatrix(_)
                | Error::DegenerateConfiguration(_)
                | Error::Overflow { .. } => 2,
                Error::NoConvergence { .. } | Error::ConvergenceFailure { .. } => 3,
                Error::ReflectionNotSupported { .. } => 4,
                _ => 1,
            },
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let verbosity = match (cli.quiet, cli.verbose) {
        (true, _) => Verbosity::Quiet,
        (_, true) => Verbosity::Verbose,
        _ => Verbosity::Normal,
    };
    let result = match cli.command {
        Command::Mdt { io, solver } => {
            commands::run_mdt(&io.input, io.output.as_deref(), &solver.config(), verbosity)
        }
        Command::Report {
            io,
            reference,
            solver,
        } => commands::run_report(
            &io.input,
            io.output.as_deref(),
            reference,
            &solver.config(),
            verbosity,
        ),
        Command::Rereference { io, images, solver } => commands::run_rereference(
            &io.input,
            io.output.as_deref(),
            images.as_deref(),
            &solver.config(),
            verbosity,
        ),
        Command::Compose {
            input,
            output,
            images,
            transforms_output,
            raw,
            solver,
        } => commands::run_compose(
            &input,
            &output,
            &images,
            transforms_output.as_deref(),
            raw,
            &solver.config(),
            verbosity,
        ),
        Command::Estimate { io, images } => commands::run_estimate(
            &io.input,
            io.output.as_deref(),
            images.as_deref(),
            verbosity,
        ),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
