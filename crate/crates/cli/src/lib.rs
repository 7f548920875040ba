//! Experiment runner for the spectral Boltzmann solvers: configuration,
//! weight caching, CSV output and run manifests.

pub mod config;
pub mod experiments;
pub mod kernel_spec;
pub mod output;
pub mod solvers;

pub use config::{Cli, Command, Evaluator, Experiment, ExperimentConfig, FileConfig, Flags, Method};
pub use experiments::{run, RunReport};
pub use kernel_spec::KernelSpec;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid configuration:\n  {}", .0.join("\n  "))]
    Config(Vec<String>),

    #[error(transparent)]
    Core(#[from] boltzmann_spectral::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("csv output: {0}")]
    Csv(#[from] csv::Error),

    #[error("manifest: {0}")]
    Manifest(#[from] toml::ser::Error),

    #[error("thread pool: {0}")]
    Pool(#[from] rayon::ThreadPoolBuildError),
}
