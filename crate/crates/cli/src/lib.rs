//! Command-line front end for the `euler-mmot` solver: solve transport
//! linear programs, check the mass-splitting constructions, sweep instances,
//! and render plans.

pub mod commands;
pub mod config;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::Parser;

pub use commands::{execute, Verdict};
pub use config::RunConfig;

/// Exit status of the executable.
pub mod exit {
    pub const OK: i32 = 0;
    /// Bad arguments, unreadable or malformed input.
    pub const USAGE: i32 = 1;
    /// A checked claim did not hold.
    pub const ASSERTION: i32 = 2;
    /// The solver failed or hit a resource limit.
    pub const SOLVER: i32 = 3;
}

#[derive(Debug, Parser)]
#[command(name = "euler-mmot", version, about = "Exact multi-marginal transport for the discrete generalized Euler equations")]
pub struct Cli {
    /// Run the command described by a JSON config file instead of a subcommand.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Print the resolved run config as JSON and exit.
    #[arg(long)]
    pub print_config: bool,
    #[command(subcommand)]
    pub command: Option<RunConfig>,
}

fn resolve(cli: Cli) -> anyhow::Result<(RunConfig, bool)> {
    let config = match (cli.config, cli.command) {
        (Some(_), Some(_)) => anyhow::bail!(commands::UsageError(
            "give either --config or a subcommand, not both".into()
        )),
        (None, None) => anyhow::bail!(commands::UsageError(
            "no command given; see --help".into()
        )),
        (None, Some(command)) => command,
        (Some(path), None) => {
            let text = std::fs::read_to_string(&path)
                .map_err(|e| commands::UsageError(format!("cannot read {}: {e}", path.display())))?;
            RunConfig::from_json(&text)
                .map_err(|e| commands::UsageError(format!("bad config {}: {e}", path.display())))?
        }
    };
    Ok((config, cli.print_config))
}

/// Runs a parsed command line, writing reports to `out` and diagnostics to `err`.
pub fn run(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let result = resolve(cli).and_then(|(config, print_only)| {
        if print_only {
            out.write_all(config.to_json().as_bytes())?;
            Ok(Verdict::Pass)
        } else {
            execute(&config, out, err)
        }
    });
    match result {
        Ok(Verdict::Pass) => exit::OK,
        Ok(Verdict::Fail(claim)) => {
            let _ = writeln!(err, "assertion failed: {claim}");
            exit::ASSERTION
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e:#}");
            commands::exit_code(&e)
        }
    }
}

/// Parses `args` (program name first) and runs; returns the exit status.
pub fn main_with_args<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => run(cli, out, err),
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = out.write_all(text.as_bytes());
                    exit::OK
                }
                _ => {
                    let _ = err.write_all(text.as_bytes());
                    exit::USAGE
                }
            }
        }
    }
}
