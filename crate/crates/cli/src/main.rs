mod args;
mod commands;
mod config;
mod error;
mod input;

use std::ffi::OsString;

use clap::error::ErrorKind;
use clap::Parser;

use args::{Cli, Command, Runtime};
use error::CliError;

fn runtime(command: &Command) -> &Runtime {
    match command {
        Command::Simulate(a) => &a.runtime,
        Command::Fit(a) => &a.runtime,
        Command::ClusterReport(a) => &a.runtime,
        Command::Diagnostic(a) => &a.runtime,
    }
}

fn init_threads(threads: Option<usize>) -> Result<(), CliError> {
    let Some(t) = threads else { return Ok(()) };
    if t == 0 {
        return Err(CliError::Usage("--threads must be positive".into()));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(t)
        .build_global()
        .map_err(|e| CliError::Runtime(format!("cannot start worker pool: {e}")))
}

fn run(argv: Vec<OsString>) -> Result<(), CliError> {
    let argv = config::merge_config_file(argv)?;
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => match e.kind() {
            ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                print!("{e}");
                return Ok(());
            }
            ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand => {
                eprint!("{e}");
                return Err(CliError::Usage("a subcommand is required".into()));
            }
            _ => {
                let rendered = e.to_string();
                let line = rendered.lines().next().unwrap_or("invalid arguments");
                return Err(CliError::Usage(line.trim_start_matches("error: ").to_string()));
            }
        },
    };
    init_threads(runtime(&cli.command).threads)?;
    let written = match &cli.command {
        Command::Simulate(a) => commands::simulate(a)?,
        Command::Fit(a) => commands::fit(a)?,
        Command::ClusterReport(a) => {
            let (written, summary) = commands::cluster_report(a)?;
            let sizes: Vec<String> = summary.group_sizes.iter().map(usize::to_string).collect();
            println!("K={} group_sizes={} rho0={}", summary.k, sizes.join(","), summary.rho0);
            written
        }
        Command::Diagnostic(a) => commands::diagnostic(a)?,
    };
    for path in written {
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn main() {
    if let Err(e) = run(std::env::args_os().collect()) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
