//! Command-line front end: argument parsing, dispatch, report emission.

mod args;
mod commands;
mod emit;

use std::ffi::OsString;

use clap::Parser;
use oddcycle::Error;

pub use args::{Cli, Command, Format};
pub use emit::{flatten_scalars, Report, RunManifest};

/// Success.
pub const EXIT_OK: i32 = 0;
/// The computation was refused, for instance an exact search over budget.
pub const EXIT_REFUSED: i32 = 1;
/// Bad flags or invalid arguments.
pub const EXIT_USAGE: i32 = 2;

/// Parses `argv` (program name first), runs the command and returns the
/// process exit status. Reports go to stdout, diagnostics to stderr.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let pool = match rayon::ThreadPoolBuilder::new()
        .num_threads(cli.global.threads.unwrap_or(0))
        .build()
    {
        Ok(pool) => pool,
        Err(e) => {
            eprintln!("error: cannot start worker pool: {e}");
            return EXIT_USAGE;
        }
    };
    match pool.install(|| commands::execute(&cli)) {
        Ok(stdout) => {
            print!("{stdout}");
            EXIT_OK
        }
        Err(e) => report_failure(&e),
    }
}

/// Failure of a command: a library error or an I/O problem.
#[derive(Debug)]
pub enum Failure {
    Library(Error),
    Io(String),
    Usage(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Library(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

fn report_failure(f: &Failure) -> i32 {
    match f {
        Failure::Library(e @ Error::Intractable { what, required, budget }) => {
            let body = serde_json::json!({
                "refused": "intractable",
                "message": e.to_string(),
                "what": what,
                "required": required.to_string(),
                "budget": budget.to_string(),
            });
            eprintln!("{body}");
            EXIT_REFUSED
        }
        Failure::Library(e @ Error::SamplingAborted { attempts, accepted }) => {
            let body = serde_json::json!({
                "refused": "sampling-aborted",
                "message": e.to_string(),
                "attempts": attempts,
                "accepted": accepted,
            });
            eprintln!("{body}");
            EXIT_REFUSED
        }
        Failure::Library(e) => {
            eprintln!("error: {e}");
            EXIT_USAGE
        }
        Failure::Usage(m) => {
            eprintln!("error: {m}");
            EXIT_USAGE
        }
        Failure::Io(m) => {
            eprintln!("error: {m}");
            EXIT_REFUSED
        }
    }
}
