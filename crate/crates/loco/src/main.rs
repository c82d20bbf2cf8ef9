use std::io::{self, IsTerminal};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand, ValueEnum};
use loco::commands::{self, parse_count, BoundsFormat, ExitStatus, Io, SolveArgs};
use loco_core::CountStrategy;

const EXIT_CODES: &str = "\
Exit status:
  0  success
  1  the spec is not valid or not admissible
  2  bounds propagation rejected the spec
  3  no configuration exists
  4  the search budget ran out
  5  usage or IO error
  6  internal error

Set LOCO_COLOR=0 or LOCO_COLOR=1 to force colour off or on.";

#[derive(Parser)]
#[command(name = "loco", version, about = "Configuration logic toolkit", after_help = EXIT_CODES)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse and check admissibility.
    Check { file: PathBuf },
    /// Derive per-kind count bounds.
    Bounds {
        file: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Table)]
        format: Format,
    },
    /// Search for configurations.
    Solve {
        file: PathBuf,
        /// Maximum number of configurations.
        #[arg(long, default_value_t = SolveArgs::default().max)]
        max: usize,
        /// Search node budget.
        #[arg(long, default_value_t = SolveArgs::default().fuel)]
        fuel: u64,
        /// Seed for the partner order.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// `sweep`, a count for every generated kind, or `Kind=n,...`.
        #[arg(long, default_value = "sweep", value_parser = parse_count)]
        count: CountStrategy,
        /// Write the solution document here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// List feasible count vectors by exhaustive enumeration.
    Oracle {
        file: PathBuf,
        /// Largest count tried per generated kind, at most 12.
        #[arg(long, default_value_t = 6)]
        cap: u64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Table,
    Report,
}

fn color() -> bool {
    match std::env::var("LOCO_COLOR").as_deref() {
        Ok("0") => false,
        Ok("1") => true,
        _ => io::stderr().is_terminal(),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(ExitStatus::Usage.code() as u8),
            };
        }
    };
    let (mut out, mut err) = (io::stdout().lock(), io::stderr().lock());
    let mut io = Io { out: &mut out, err: &mut err, color: color() };
    let status = match cli.command {
        Command::Check { file } => commands::check(&file, &mut io),
        Command::Bounds { file, format } => {
            let format = match format {
                Format::Table => BoundsFormat::Table,
                Format::Report => BoundsFormat::Report,
            };
            commands::bounds(&file, format, &mut io)
        }
        Command::Solve { file, max, fuel, seed, count, out } => {
            commands::solve_file(&file, &SolveArgs { max, fuel, seed, count, out }, &mut io)
        }
        Command::Oracle { file, cap } => commands::oracle(&file, cap, &mut io),
    };
    ExitCode::from(status.code() as u8)
}
