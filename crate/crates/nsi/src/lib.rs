//! Command-line pipeline around `nsi-core`: run configuration, file formats
//! and the `nsi` subcommands.

pub mod cli;
pub mod commands;
pub mod config;
pub mod error;
pub mod formats;

use std::ffi::OsString;
use std::io::Write;

use clap::Parser;

pub use config::RunConfig;
pub use error::CliError;

/// Runs one invocation and returns the process exit code: 0 on success,
/// 1 on usage errors, 2 on domain errors (with a JSON line on `err`).
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match cli::Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let _ = write!(err, "{}", e.render());
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
        }
    };
    let result = cli
        .command
        .invocation()
        .resolve()
        .and_then(|cfg| commands::execute(&cli.command, &cfg));
    match result {
        Ok(text) => {
            let _ = out.write_all(text.as_bytes());
            0
        }
        Err(e) => {
            let _ = writeln!(err, "{}", e.to_json());
            e.exit_code()
        }
    }
}
