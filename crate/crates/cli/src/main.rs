use std::process::ExitCode;

use bspec::{run, Cli, CliError, ExperimentConfig};
use clap::Parser;

fn main() -> ExitCode {
    let (experiment, flags) = Cli::parse().command.into_parts();
    let result = ExperimentConfig::resolve(experiment, flags).and_then(|cfg| run(&cfg));
    match result {
        Ok(report) => {
            for path in &report.outputs {
                println!("wrote {}", path.display());
            }
            println!("wrote {}", report.manifest.display());
            for (key, value) in &report.summary {
                println!("{key} = {value:.6e}");
            }
            ExitCode::SUCCESS
        }
        Err(err @ CliError::Config(_)) => {
            eprintln!("error: {err}");
            ExitCode::from(2)
        }
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::FAILURE
        }
    }
}
