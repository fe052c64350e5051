use std::fs;
use std::process::ExitCode;

use clap::Parser;

use shadowtail_cli::args::{Cli, Command};
use shadowtail_cli::commands::{self, UsageError};

const EXIT_PIPELINE: u8 = 1;
const EXIT_USAGE: u8 = 2;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };

    let (result, output) = match &cli.command {
        Command::Fit(a) => (commands::fit(a), &a.output),
        Command::Report(a) => (commands::report(a), &a.output),
        Command::Compare(a) => (commands::compare(a), &a.output),
        Command::Simulate(a) => (commands::simulate(a), &a.output),
        Command::Diagnose(a) => (commands::diagnose(a), &a.output),
    };

    let written = result.and_then(|text| match output {
        Some(path) => fs::write(path, text).map_err(|e| anyhow::anyhow!("cannot write {}: {e}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    });

    match written {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<UsageError>().is_some() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::from(EXIT_PIPELINE)
            }
        }
    }
}
