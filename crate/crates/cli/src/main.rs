//! `ergavg` — a workbench for multiple ergodic averages on finite systems
//! carrying two commuting group actions.
//!
//! Every command emits a deterministic report on stdout (JSON by default,
//! CSV with `--format csv`); timings go to stderr so report bytes can be
//! compared across runs. Exit codes: 0 success, 2 invalid input, 3 for a
//! violated identity on validated input (a defect, not a user error).

mod commands;
mod report;
mod system_file;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use ergavg::Rect;

use report::{emit, Format, RunReport};
use system_file::CliError;

#[derive(Parser)]
#[command(name = "ergavg", version, about = "Multiple ergodic averages on finite systems")]
struct Cli {
    /// Report format for stdout.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,

    /// Mirror the report to a file as well as stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Exact rational arithmetic (weights and observables must be integers
    /// or "p/q" strings).
    #[arg(long, global = true)]
    exact: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Finite-stage averages of f1(T^g x) f2(S^h x) f3(T^g S^h x) against
    /// the exact limit.
    Average {
        /// System description file (JSON).
        system: PathBuf,
        /// First observable, by name.
        #[arg(long)]
        f1: String,
        /// Second observable, by name.
        #[arg(long)]
        f2: String,
        /// Third observable, by name.
        #[arg(long)]
        f3: String,
        /// Window stages to evaluate.
        #[arg(long, value_delimiter = ',', default_value = "1,2,4,8")]
        stages: Vec<u64>,
    },
    /// Lower bounds for averaged multiple recurrence of one nonnegative
    /// observable.
    Bounds {
        /// System description file (JSON).
        system: PathBuf,
        /// Observable, by name.
        #[arg(long)]
        f: String,
    },
    /// Four-fold intersection densities of a grid set over a shift range.
    Scan {
        /// Grid set file.
        grid: PathBuf,
        /// Density slack below δ⁴.
        #[arg(long)]
        epsilon: f64,
        /// Sub-window as "x0,y0,width,height".
        #[arg(long)]
        sub: String,
        /// Shift ranges as "a..b,c..d" (half-open).
        #[arg(long)]
        range: String,
    },
    /// Search a 3-dimensional coloring for a monochromatic combinatorial
    /// parallelepiped.
    Partition {
        /// Coloring file.
        coloring: PathBuf,
        /// Largest shift to try, or a range "1..k" (the upper bound is used).
        #[arg(long)]
        range: String,
    },
    /// Write a ready-to-run skew-product example system.
    Example {
        /// Output path for the system file.
        output: PathBuf,
        /// Base and fiber sizes as "p,q,r".
        #[arg(long, value_delimiter = ',', required = true)]
        dims: Vec<usize>,
        /// Cocycle for the first action, one integer per base row.
        #[arg(long, value_delimiter = ',', required = true)]
        tau: Vec<i64>,
        /// Cocycle for the second action, one integer per base column.
        #[arg(long, value_delimiter = ',', required = true)]
        sigma: Vec<i64>,
    },
    /// Run the full identity suite against one system file.
    Check {
        /// System description file (JSON).
        system: PathBuf,
        /// Seed for the randomized constancy witness search.
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn parse_sub(text: &str) -> Result<Rect, CliError> {
    let parts: Vec<&str> = text.split(',').collect();
    if parts.len() != 4 {
        return Err(CliError::validation(format!(
            "--sub wants \"x0,y0,width,height\", got {text:?}"
        )));
    }
    let field = |i: usize, name: &str| -> Result<u32, CliError> {
        parts[i].trim().parse().map_err(|_| {
            CliError::validation(format!("--sub {name} must be a nonnegative integer, got {:?}", parts[i]))
        })
    };
    Ok(Rect {
        x0: field(0, "x0")?,
        y0: field(1, "y0")?,
        width: field(2, "width")?,
        height: field(3, "height")?,
    })
}

fn parse_span(text: &str, flag: &str) -> Result<(i64, i64), CliError> {
    let (lo, hi) = text.split_once("..").ok_or_else(|| {
        CliError::validation(format!("{flag} wants a half-open span like \"-4..4\", got {text:?}"))
    })?;
    let parse = |s: &str| -> Result<i64, CliError> {
        s.trim()
            .parse()
            .map_err(|_| CliError::validation(format!("{flag}: {s:?} is not an integer")))
    };
    Ok((parse(lo)?, parse(hi)?))
}

fn parse_ranges(text: &str) -> Result<((i64, i64), (i64, i64)), CliError> {
    let (g, h) = text.split_once(',').ok_or_else(|| {
        CliError::validation(format!(
            "--range wants two spans like \"0..8,-4..4\", got {text:?}"
        ))
    })?;
    Ok((parse_span(g, "--range")?, parse_span(h, "--range")?))
}

fn parse_max_shift(text: &str) -> Result<u32, CliError> {
    let tail = match text.split_once("..") {
        Some((_, hi)) => hi,
        None => text,
    };
    let value: u32 = tail.trim().parse().map_err(|_| {
        CliError::validation(format!("--range wants \"k\" or \"1..k\", got {text:?}"))
    })?;
    if value == 0 {
        return Err(CliError::validation("--range upper bound must be positive"));
    }
    Ok(value)
}

fn configure_workers() -> Result<(), CliError> {
    let Some(raw) = std::env::var_os("ERGAVG_WORKERS") else {
        return Ok(());
    };
    let text = raw.to_string_lossy();
    let workers: usize = text.trim().parse().map_err(|_| {
        CliError::validation(format!("ERGAVG_WORKERS must be a positive integer, got {text:?}"))
    })?;
    if workers == 0 {
        return Err(CliError::validation(
            "ERGAVG_WORKERS must be a positive integer, got 0",
        ));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build_global()
        .map_err(|e| CliError::validation(format!("worker pool: {e}")))
}

/// A report plus the defect flag: true means a proved statement failed on
/// validated input, reported with exit code 3 after the report is printed.
type Outcome = (RunReport, bool);

fn run(cli: &Cli) -> Result<Outcome, CliError> {
    match &cli.command {
        Command::Average {
            system,
            f1,
            f2,
            f3,
            stages,
        } => {
            let report = if cli.exact {
                commands::cmd_average::<num::BigRational>(system, f1, f2, f3, stages)?
            } else {
                commands::cmd_average::<f64>(system, f1, f2, f3, stages)?
            };
            Ok((report, false))
        }
        Command::Bounds { system, f } => {
            if cli.exact {
                commands::cmd_bounds::<num::BigRational>(system, f)
            } else {
                commands::cmd_bounds::<f64>(system, f)
            }
        }
        Command::Scan {
            grid,
            epsilon,
            sub,
            range,
        } => {
            let sub = parse_sub(sub)?;
            let (g_range, h_range) = parse_ranges(range)?;
            let report = commands::cmd_scan(grid, *epsilon, sub, g_range, h_range)?;
            Ok((report, false))
        }
        Command::Partition { coloring, range } => {
            let max_shift = parse_max_shift(range)?;
            let report = commands::cmd_partition(coloring, max_shift)?;
            Ok((report, false))
        }
        Command::Example {
            output,
            dims,
            tau,
            sigma,
        } => {
            if dims.len() != 3 {
                return Err(CliError::validation("--dims wants exactly three values: p,q,r"));
            }
            let report = commands::cmd_example(output, dims[0], dims[1], dims[2], tau, sigma)?;
            Ok((report, false))
        }
        Command::Check { system, seed } => {
            if cli.exact {
                commands::cmd_check::<num::BigRational>(system, *seed)
            } else {
                commands::cmd_check::<f64>(system, *seed)
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = configure_workers() {
        eprintln!("error: {}", e.message);
        return ExitCode::from(e.code);
    }
    match run(&cli) {
        Ok((report, defect)) => {
            if let Err(e) = emit(&report, cli.format, cli.out.as_deref()) {
                eprintln!("error: {}", e.message);
                return ExitCode::from(e.code);
            }
            if defect {
                eprintln!("error: a proved statement failed on validated input (see report)");
                ExitCode::from(3)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
