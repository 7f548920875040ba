//! Experiment configuration.
//!
//! Every option can come from a command-line flag, from a TOML file passed
//! with `--config`, or from the experiment's defaults, in that order of
//! precedence. Validation reports every problem at once, before any compute.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use boltzmann_spectral::analytic::{bkw_positivity_time, BKW_EVAL_TIME};
use boltzmann_spectral::quadrature::LEBEDEV_POINT_COUNTS;
use boltzmann_spectral::timestepper::RelaxationRun;
use boltzmann_spectral::weights::DEFAULT_MEMORY_CAP;
use boltzmann_spectral::{lebedev, VelocityGrid};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::kernel_spec::KernelSpec;
use crate::CliError;

#[derive(Debug, Parser)]
#[command(name = "bspec", version, about = "Spectral Boltzmann collision operator experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Error of one operator evaluation against the exact BKW collision term.
    BkwError(Flags),
    /// RK4 relaxation from the BKW state, with the error against the exact solution.
    BkwRelax(Flags),
    /// Moment relaxation of the two-stream state, Maxwell molecules.
    MomentsMaxwell(Flags),
    /// Moment relaxation of the two-stream state, hard spheres.
    MomentsHardsphere(Flags),
    /// Moment relaxation of the two-stream state, variable soft spheres.
    MomentsVss(Flags),
    /// Wall-clock timing of operator evaluations.
    Bench(Flags),
    /// Build weights and write them to the cache.
    Precompute(Flags),
}

impl Command {
    pub fn into_parts(self) -> (Experiment, Flags) {
        match self {
            Command::BkwError(f) => (Experiment::BkwError, f),
            Command::BkwRelax(f) => (Experiment::BkwRelax, f),
            Command::MomentsMaxwell(f) => (Experiment::MomentsMaxwell, f),
            Command::MomentsHardsphere(f) => (Experiment::MomentsHardsphere, f),
            Command::MomentsVss(f) => (Experiment::MomentsVss, f),
            Command::Bench(f) => (Experiment::Bench, f),
            Command::Precompute(f) => (Experiment::Precompute, f),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    BkwError,
    BkwRelax,
    MomentsMaxwell,
    MomentsHardsphere,
    MomentsVss,
    Bench,
    Precompute,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::BkwError => "bkw-error",
            Experiment::BkwRelax => "bkw-relax",
            Experiment::MomentsMaxwell => "moments-maxwell",
            Experiment::MomentsHardsphere => "moments-hardsphere",
            Experiment::MomentsVss => "moments-vss",
            Experiment::Bench => "bench",
            Experiment::Precompute => "precompute",
        }
    }

    fn accepts_lists(self) -> bool {
        matches!(self, Experiment::BkwError | Experiment::Bench)
    }

    fn is_relaxation(self) -> bool {
        matches!(
            self,
            Experiment::BkwRelax
                | Experiment::MomentsMaxwell
                | Experiment::MomentsHardsphere
                | Experiment::MomentsVss
        )
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Direct,
    Fast,
    Both,
}

impl Method {
    pub fn evaluators(self) -> &'static [Evaluator] {
        match self {
            Method::Direct => &[Evaluator::Direct],
            Method::Fast => &[Evaluator::Fast],
            Method::Both => &[Evaluator::Fast, Evaluator::Direct],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Evaluator {
    Direct,
    Fast,
}

impl Evaluator {
    pub fn name(self) -> &'static str {
        match self {
            Evaluator::Direct => "direct",
            Evaluator::Fast => "fast",
        }
    }
}

/// How the direct method stores `G`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DirectStorage {
    /// The full `N⁶` table; cacheable.
    Dense,
    /// Indexed by `(|l+m|², |l-m|²)`; angle-independent kernels only, not cached.
    Compact,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Convolution {
    Linear,
    Circular,
}

/// Command-line flags; every one is optional.
#[derive(Debug, Clone, Default, Args)]
pub struct Flags {
    /// TOML file holding any of the options below (snake_case keys).
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Points per velocity dimension; a comma list for bkw-error and bench.
    #[arg(long, value_delimiter = ',')]
    pub n: Option<Vec<usize>>,
    /// Lebedev points on the sphere; a comma list for bkw-error and bench.
    #[arg(long, value_delimiter = ',')]
    pub m: Option<Vec<usize>>,
    /// Gauss-Legendre points in the radial direction [default: N].
    #[arg(long)]
    pub nr: Option<usize>,
    /// Truncation radius R of the relative velocity.
    #[arg(long)]
    pub radius_r: Option<f64>,
    /// Domain half-width L [default: (3+√2)R/4].
    #[arg(long)]
    pub domain_l: Option<f64>,
    /// vhs:gamma=G,b=B or vss:gamma=G,eta=E,b=B.
    #[arg(long)]
    pub kernel: Option<KernelSpec>,
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long)]
    pub t0: Option<f64>,
    #[arg(long)]
    pub t_end: Option<f64>,
    /// BKW evaluation time for bkw-error and bench.
    #[arg(long)]
    pub t_eval: Option<f64>,
    #[arg(long, value_enum)]
    pub method: Option<Method>,
    #[arg(long, value_enum)]
    pub direct_storage: Option<DirectStorage>,
    #[arg(long, value_enum)]
    pub convolution: Option<Convolution>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Weight cache directory.
    #[arg(long)]
    pub cache: Option<PathBuf>,
    /// Worker threads [default: available cores]; 1 selects the serial path.
    #[arg(long)]
    pub threads: Option<usize>,
    /// Largest weight table allowed, in bytes.
    #[arg(long)]
    pub mem_cap_bytes: Option<u64>,
    /// Untimed evaluations before measuring (bench).
    #[arg(long)]
    pub warmup: Option<usize>,
    /// Timed evaluations (bench).
    #[arg(long)]
    pub reps: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum OneOrMany {
    One(usize),
    Many(Vec<usize>),
}

impl OneOrMany {
    fn into_vec(self) -> Vec<usize> {
        match self {
            OneOrMany::One(v) => vec![v],
            OneOrMany::Many(v) => v,
        }
    }
}

/// Contents of a `--config` file.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub n: Option<OneOrMany>,
    pub m: Option<OneOrMany>,
    pub nr: Option<usize>,
    pub radius_r: Option<f64>,
    pub domain_l: Option<f64>,
    pub kernel: Option<KernelSpec>,
    pub dt: Option<f64>,
    pub t0: Option<f64>,
    pub t_end: Option<f64>,
    pub t_eval: Option<f64>,
    pub method: Option<Method>,
    pub direct_storage: Option<DirectStorage>,
    pub convolution: Option<Convolution>,
    pub out: Option<PathBuf>,
    pub cache: Option<PathBuf>,
    pub threads: Option<usize>,
    pub mem_cap_bytes: Option<u64>,
    pub warmup: Option<usize>,
    pub reps: Option<usize>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(vec![format!("cannot read {}: {e}", path.display())]))?;
        toml::from_str(&text)
            .map_err(|e| CliError::Config(vec![format!("{}: {e}", path.display())]))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Source {
    Flag,
    File,
    Default,
}

/// A fully resolved and validated configuration.
#[derive(Debug, Clone, Serialize)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub n: Vec<usize>,
    pub m: Vec<usize>,
    /// `None` means one radial point per grid point.
    pub nr: Option<usize>,
    pub radius_r: f64,
    /// `None` means `(3+√2)R/4`.
    pub domain_l: Option<f64>,
    pub kernel: KernelSpec,
    pub dt: f64,
    pub t0: f64,
    pub t_end: f64,
    pub t_eval: f64,
    pub method: Method,
    pub direct_storage: DirectStorage,
    pub convolution: Convolution,
    pub out: PathBuf,
    pub cache: Option<PathBuf>,
    pub threads: usize,
    pub mem_cap_bytes: u64,
    pub warmup: usize,
    pub reps: usize,
    #[serde(skip)]
    pub config_file: Option<PathBuf>,
    #[serde(skip)]
    pub sources: BTreeMap<&'static str, Source>,
}

struct Defaults {
    n: Vec<usize>,
    m: Vec<usize>,
    radius_r: f64,
    kernel: KernelSpec,
    dt: f64,
    t0: f64,
    t_end: f64,
    method: Method,
}

fn defaults(experiment: Experiment) -> Defaults {
    let bkw = Defaults {
        n: vec![16],
        m: vec![14],
        radius_r: 6.0,
        kernel: KernelSpec::maxwell(),
        dt: 0.1,
        t0: 5.5,
        t_end: 10.0,
        method: Method::Fast,
    };
    let moments = Defaults {
        n: vec![32],
        m: vec![74],
        radius_r: 10.0,
        dt: 0.3,
        t0: 0.0,
        t_end: 10.0,
        ..bkw
    };
    match experiment {
        Experiment::BkwError => Defaults {
            n: vec![8, 16, 32],
            method: Method::Both,
            ..bkw
        },
        Experiment::BkwRelax | Experiment::Precompute => bkw,
        Experiment::Bench => Defaults {
            method: Method::Both,
            ..bkw
        },
        Experiment::MomentsMaxwell => moments,
        Experiment::MomentsHardsphere => Defaults {
            kernel: KernelSpec::hard_sphere(),
            ..moments
        },
        Experiment::MomentsVss => Defaults {
            kernel: KernelSpec::argon(),
            ..moments
        },
    }
}

impl ExperimentConfig {
    /// Resolves flags over the file over the defaults, then validates.
    pub fn resolve(experiment: Experiment, flags: Flags) -> Result<Self, CliError> {
        let file = match &flags.config {
            Some(path) => FileConfig::load(path)?,
            None => FileConfig::default(),
        };
        Self::resolve_with(experiment, flags, file)
    }

    pub fn resolve_with(experiment: Experiment, flags: Flags, file: FileConfig) -> Result<Self, CliError> {
        let d = defaults(experiment);
        let mut s = BTreeMap::new();
        let cfg = ExperimentConfig {
            experiment,
            n: layer(&mut s, "n", flags.n, file.n.map(OneOrMany::into_vec)).unwrap_or(d.n),
            m: layer(&mut s, "m", flags.m, file.m.map(OneOrMany::into_vec)).unwrap_or(d.m),
            nr: layer(&mut s, "nr", flags.nr, file.nr),
            radius_r: layer(&mut s, "radius_r", flags.radius_r, file.radius_r).unwrap_or(d.radius_r),
            domain_l: layer(&mut s, "domain_l", flags.domain_l, file.domain_l),
            kernel: layer(&mut s, "kernel", flags.kernel, file.kernel).unwrap_or(d.kernel),
            dt: layer(&mut s, "dt", flags.dt, file.dt).unwrap_or(d.dt),
            t0: layer(&mut s, "t0", flags.t0, file.t0).unwrap_or(d.t0),
            t_end: layer(&mut s, "t_end", flags.t_end, file.t_end).unwrap_or(d.t_end),
            t_eval: layer(&mut s, "t_eval", flags.t_eval, file.t_eval).unwrap_or(BKW_EVAL_TIME),
            method: layer(&mut s, "method", flags.method, file.method).unwrap_or(d.method),
            direct_storage: layer(&mut s, "direct_storage", flags.direct_storage, file.direct_storage)
                .unwrap_or(DirectStorage::Dense),
            convolution: layer(&mut s, "convolution", flags.convolution, file.convolution)
                .unwrap_or(Convolution::Linear),
            out: layer(&mut s, "out", flags.out, file.out)
                .unwrap_or_else(|| PathBuf::from("out").join(experiment.name())),
            cache: layer(&mut s, "cache", flags.cache, file.cache),
            threads: layer(&mut s, "threads", flags.threads, file.threads).unwrap_or_else(available_cores),
            mem_cap_bytes: layer(&mut s, "mem_cap_bytes", flags.mem_cap_bytes, file.mem_cap_bytes)
                .unwrap_or(DEFAULT_MEMORY_CAP),
            warmup: layer(&mut s, "warmup", flags.warmup, file.warmup).unwrap_or(2),
            reps: layer(&mut s, "reps", flags.reps, file.reps).unwrap_or(5),
            config_file: flags.config,
            sources: s,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), CliError> {
        let mut errors = Vec::new();
        let exp = self.experiment;
        if self.n.is_empty() {
            errors.push("--n needs at least one value".to_string());
        }
        if self.m.is_empty() {
            errors.push("--m needs at least one value".to_string());
        }
        if !exp.accepts_lists() {
            if self.n.len() > 1 {
                errors.push(format!("{exp} takes a single --n, got {:?}", self.n));
            }
            if self.m.len() > 1 {
                errors.push(format!("{exp} takes a single --m, got {:?}", self.m));
            }
        }
        for &n in &self.n {
            if let Err(e) = self.grid(n) {
                errors.push(format!("N = {n}: {e}"));
            }
        }
        for &m in &self.m {
            if lebedev(m).is_err() {
                errors.push(format!(
                    "no Lebedev rule with {m} points (available: {LEBEDEV_POINT_COUNTS:?})"
                ));
            }
        }
        if self.nr == Some(0) {
            errors.push("--nr must be at least 1".to_string());
        }
        if self.threads == 0 {
            errors.push("--threads must be at least 1".to_string());
        }
        if self.mem_cap_bytes == 0 {
            errors.push("--mem-cap-bytes must be positive".to_string());
        }
        if exp == Experiment::Bench && self.reps == 0 {
            errors.push("--reps must be at least 1".to_string());
        }
        if let Err(e) = self.kernel.build() {
            errors.push(e.to_string());
        }
        if exp.is_relaxation() {
            if let Err(e) = RelaxationRun::new(self.t0, self.t_end, self.dt) {
                errors.push(e.to_string());
            }
        }
        let positivity = bkw_positivity_time();
        if exp == Experiment::BkwRelax && self.t0 < positivity {
            errors.push(format!(
                "BKW start time {} is before the positivity time {positivity}",
                self.t0
            ));
        }
        if matches!(exp, Experiment::BkwError | Experiment::Bench) && self.t_eval < positivity {
            errors.push(format!(
                "BKW evaluation time {} is before the positivity time {positivity}",
                self.t_eval
            ));
        }
        if exp == Experiment::Precompute && self.cache.is_none() {
            errors.push("precompute needs --cache".to_string());
        }
        let uses_direct = self.method != Method::Fast;
        if uses_direct && self.direct_storage == DirectStorage::Compact {
            if matches!(self.kernel, KernelSpec::Vss { .. }) {
                errors.push("compact direct storage needs an angle-independent (vhs) kernel".to_string());
            }
            if exp == Experiment::Precompute {
                errors.push("compact direct weights are not cached; use --direct-storage dense".to_string());
            }
        }
        if errors.is_empty() {
            Ok(())
        } else {
            Err(CliError::Config(errors))
        }
    }

    pub fn grid(&self, n: usize) -> boltzmann_spectral::Result<VelocityGrid> {
        match self.domain_l {
            Some(l) => VelocityGrid::new(n, self.radius_r, l),
            None => VelocityGrid::with_default_domain(n, self.radius_r),
        }
    }

    pub fn radial_points(&self, n: usize) -> usize {
        self.nr.unwrap_or(n)
    }

    pub fn serial(&self) -> bool {
        self.threads == 1
    }

    /// Flags that reproduce this configuration without a config file.
    pub fn command_line(&self) -> String {
        let list = |v: &[usize]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",");
        let mut parts = vec![
            "bspec".to_string(),
            self.experiment.to_string(),
            format!("--n {}", list(&self.n)),
            format!("--m {}", list(&self.m)),
        ];
        if let Some(nr) = self.nr {
            parts.push(format!("--nr {nr}"));
        }
        parts.push(format!("--radius-r {}", self.radius_r));
        if let Some(l) = self.domain_l {
            parts.push(format!("--domain-l {l}"));
        }
        parts.push(format!("--kernel {}", self.kernel));
        parts.push(format!("--dt {} --t0 {} --t-end {} --t-eval {}", self.dt, self.t0, self.t_end, self.t_eval));
        parts.push(format!("--method {}", value_name(self.method)));
        parts.push(format!("--direct-storage {}", value_name(self.direct_storage)));
        parts.push(format!("--convolution {}", value_name(self.convolution)));
        parts.push(format!("--out {}", self.out.display()));
        if let Some(cache) = &self.cache {
            parts.push(format!("--cache {}", cache.display()));
        }
        parts.push(format!(
            "--threads {} --mem-cap-bytes {} --warmup {} --reps {}",
            self.threads, self.mem_cap_bytes, self.warmup, self.reps
        ));
        parts.join(" ")
    }
}

fn value_name(v: impl ValueEnum) -> String {
    v.to_possible_value().map(|p| p.get_name().to_string()).unwrap_or_default()
}

/// Flag over file; records where the value came from.
fn layer<T>(
    sources: &mut BTreeMap<&'static str, Source>,
    name: &'static str,
    flag: Option<T>,
    file: Option<T>,
) -> Option<T> {
    let (value, source) = match (flag, file) {
        (Some(v), _) => (Some(v), Source::Flag),
        (None, Some(v)) => (Some(v), Source::File),
        (None, None) => (None, Source::Default),
    };
    sources.insert(name, source);
    value
}

pub fn available_cores() -> usize {
    std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flags() -> Flags {
        Flags::default()
    }

    #[test]
    fn defaults_follow_the_experiment() {
        let c = ExperimentConfig::resolve_with(Experiment::MomentsVss, flags(), FileConfig::default()).unwrap();
        assert_eq!((c.n.clone(), c.m.clone(), c.radius_r, c.dt), (vec![32], vec![74], 10.0, 0.3));
        assert_eq!(c.kernel, KernelSpec::argon());
        assert_eq!(c.nr, None);
        assert_eq!(c.radial_points(32), 32);
        assert_eq!(c.sources["kernel"], Source::Default);
        let c = ExperimentConfig::resolve_with(Experiment::BkwError, flags(), FileConfig::default()).unwrap();
        assert_eq!(c.n, vec![8, 16, 32]);
        assert_eq!(c.method, Method::Both);
    }

    #[test]
    fn flags_override_file_override_defaults() {
        let file: FileConfig = toml::from_str("n = 8\ndt = 0.2\nt_end = 7.0\nkernel = \"vhs:gamma=1\"").unwrap();
        let f = Flags {
            dt: Some(0.05),
            ..flags()
        };
        let c = ExperimentConfig::resolve_with(Experiment::BkwRelax, f, file).unwrap();
        assert_eq!(c.n, vec![8]);
        assert_eq!(c.dt, 0.05);
        assert_eq!(c.t_end, 7.0);
        assert_eq!(c.kernel, KernelSpec::hard_sphere());
        assert_eq!(c.sources["dt"], Source::Flag);
        assert_eq!(c.sources["n"], Source::File);
        assert_eq!(c.sources["t0"], Source::Default);
    }

    #[test]
    fn list_values_in_files() {
        let file: FileConfig = toml::from_str("n = [8, 16]\nm = [14, 38]").unwrap();
        let c = ExperimentConfig::resolve_with(Experiment::Bench, flags(), file).unwrap();
        assert_eq!((c.n, c.m), (vec![8, 16], vec![14, 38]));
    }

    #[test]
    fn unknown_file_keys_are_rejected() {
        assert!(toml::from_str::<FileConfig>("nn = 8").is_err());
    }

    #[test]
    fn all_validation_errors_are_reported_together() {
        let f = Flags {
            n: Some(vec![7, 16]),
            m: Some(vec![15]),
            dt: Some(-1.0),
            t0: Some(1.0),
            threads: Some(0),
            domain_l: Some(1.0),
            ..flags()
        };
        let Err(CliError::Config(errors)) =
            ExperimentConfig::resolve_with(Experiment::BkwRelax, f, FileConfig::default())
        else {
            panic!("expected validation errors");
        };
        let text = errors.join("\n");
        for needle in ["single --n", "N = 7", "N = 16", "Lebedev", "time step", "positivity", "--threads"] {
            assert!(text.contains(needle), "missing '{needle}' in\n{text}");
        }
    }

    #[test]
    fn command_line_round_trips() {
        let f = Flags {
            n: Some(vec![8, 16]),
            kernel: Some(KernelSpec::argon()),
            nr: Some(12),
            ..flags()
        };
        let c = ExperimentConfig::resolve_with(Experiment::Bench, f, FileConfig::default()).unwrap();
        let line = c.command_line();
        let args: Vec<&str> = line.split_whitespace().collect();
        let cli = Cli::try_parse_from(args).unwrap();
        let (exp, flags) = cli.command.into_parts();
        let again = ExperimentConfig::resolve_with(exp, flags, FileConfig::default()).unwrap();
        assert_eq!(again.command_line(), line);
    }

    #[test]
    fn precompute_requires_a_cache() {
        let r = ExperimentConfig::resolve_with(Experiment::Precompute, flags(), FileConfig::default());
        assert!(matches!(r, Err(CliError::Config(e)) if e.iter().any(|m| m.contains("--cache"))));
    }
}
