//! Library side of the `qwalk` binary.

pub mod args;
pub mod commands;
pub mod error;
pub mod input;
pub mod output;

pub use error::{CliError, CliResult, ExitStatus};

use args::{Cli, Command};

pub fn execute(cli: &Cli) -> CliResult<()> {
    match &cli.command {
        Command::Run(a) => commands::run(a),
        Command::EigReport(a) => commands::eig_report(a),
        Command::Bench(a) => commands::bench(a),
    }
}
