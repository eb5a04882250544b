//! Command line front end: data ingestion, named datasets, run
//! configuration and the `skewprobit` subcommands.

pub mod commands;
pub mod config;
pub mod datasets;
pub mod error;
pub mod formula;
pub mod output;
pub mod table;

use std::ffi::OsString;
use std::io::Write;

use clap::Parser;

pub use error::{CliError, Result};

/// Parses `args` (program name first), runs the command and returns the
/// exit status.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match commands::Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { out.write_all(text.as_bytes()) } else { err.write_all(text.as_bytes()) };
            return code;
        }
    };
    match commands::dispatch(&cli, out) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            if let CliError::Core(skewprobit::Error::NoConvergence { best_point, .. }) = &e {
                let _ = writeln!(err, "best point (unconstrained): {best_point:?}");
            }
            e.exit_code()
        }
    }
}
