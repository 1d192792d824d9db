//! Batch frontend: PGM and CSV I/O, subcommand wiring and run reports.

pub mod args;
pub mod commands;
pub mod csv;
pub mod error;
pub mod pgm;
pub mod report;

use std::io::Write;

pub use args::{Cli, Command};
pub use error::{CliError, Result};
pub use pgm::{Pgm, PgmError};
pub use report::RunReport;

/// Runs one parsed command line. `argv` is echoed into the report.
///
/// Compare prints its table to stdout when no output file is given; every
/// command then emits its report, to `--report` if set and stdout otherwise.
pub fn run(cli: &Cli, argv: &[String]) -> Result<RunReport> {
    let name = match &cli.command {
        Command::Rearrange(_) => "rearrange",
        Command::Denoise(_) => "denoise",
        Command::Segment(_) => "segment",
        Command::Noise(_) => "noise",
        Command::Bench(_) => "bench",
        Command::Compare(_) => "compare",
    };
    let mut report = RunReport::new(name, argv);
    let report = &mut report;
    match &cli.command {
        Command::Rearrange(a) => commands::rearrange(a, report)?,
        Command::Denoise(a) => commands::denoise(a, report)?,
        Command::Segment(a) => commands::segment(a, report)?,
        Command::Noise(a) => commands::noise(a, report)?,
        Command::Bench(a) => commands::bench(a, report)?,
        Command::Compare(a) => {
            let table = commands::compare(a, report)?;
            if a.output.is_none() {
                print!("{table}");
            }
        }
    }
    match &cli.report {
        Some(path) => report.append_to(path)?,
        None => {
            let line = report.to_json_line()?;
            std::io::stdout()
                .write_all(line.as_bytes())
                .map_err(|e| CliError::io(std::path::Path::new("<stdout>"), e))?;
        }
    }
    Ok(report.clone())
}

/// Sizes the global thread pool from `NFR_THREADS`, if set.
pub fn configure_threads(value: Option<&str>) -> Result<()> {
    let Some(v) = value else {
        return Ok(());
    };
    let n: usize = match v.trim().parse() {
        Ok(n) if n > 0 => n,
        _ => return error::usage(format!("NFR_THREADS must be a positive integer, got {v:?}")),
    };
    // a pool built earlier in the process keeps its size
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}
