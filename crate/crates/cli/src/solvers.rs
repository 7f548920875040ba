//! Building evaluators, going through the weight cache when one is configured.

use std::path::{Path, PathBuf};
use std::time::Instant;

use boltzmann_spectral::cache::{read_direct, read_fast, write_direct, write_fast, CacheHeader, CacheLoad};
use boltzmann_spectral::fast::{CollisionParts, Execution};
use boltzmann_spectral::{
    gauss_legendre, lebedev, precompute_f, precompute_g, precompute_g_compact,
    CollisionOperator, CompactDirectSolver, ConvolutionMode, DirectSolver, FastSolver,
    SpectralCoefficients, VelocityGrid,
};
use serde::Serialize;

use crate::config::{Convolution, DirectStorage, Evaluator, ExperimentConfig};
use crate::CliError;

/// Sphere rule for the `ĝ` integral of angle-dependent kernels.
pub const GHAT_POINTS: usize = 74;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CacheStatus {
    /// No cache directory configured.
    Disabled,
    /// Compact direct weights are never written.
    NotCacheable,
    Hit,
    /// No file yet; computed and written.
    Written,
    /// A file with a different header was found, recomputed and overwritten.
    Replaced,
}

/// Where a set of weights came from, for the manifest.
#[derive(Debug, Clone, Serialize)]
pub struct WeightRecord {
    pub evaluator: &'static str,
    pub n: usize,
    pub m: usize,
    pub nr: usize,
    pub kernel: String,
    pub status: CacheStatus,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
    pub seconds: f64,
}

pub enum DirectOperator {
    Dense(DirectSolver),
    Compact(CompactDirectSolver),
}

impl DirectOperator {
    pub fn parts(&self, f: &SpectralCoefficients) -> boltzmann_spectral::Result<CollisionParts> {
        match self {
            DirectOperator::Dense(s) => s.parts(f),
            DirectOperator::Compact(s) => s.parts(f),
        }
    }
}

impl CollisionOperator for DirectOperator {
    fn grid(&self) -> &VelocityGrid {
        match self {
            DirectOperator::Dense(s) => s.grid(),
            DirectOperator::Compact(s) => s.grid(),
        }
    }

    fn collide_spectral(&self, f: &SpectralCoefficients) -> boltzmann_spectral::Result<SpectralCoefficients> {
        match self {
            DirectOperator::Dense(s) => s.collide_spectral(f),
            DirectOperator::Compact(s) => s.collide_spectral(f),
        }
    }
}

pub enum Operator {
    Fast(FastSolver),
    Direct(DirectOperator),
}

impl Operator {
    pub fn parts(&self, f: &SpectralCoefficients) -> boltzmann_spectral::Result<CollisionParts> {
        match self {
            Operator::Fast(s) => s.parts(f),
            Operator::Direct(s) => s.parts(f),
        }
    }
}

impl CollisionOperator for Operator {
    fn grid(&self) -> &VelocityGrid {
        match self {
            Operator::Fast(s) => s.grid(),
            Operator::Direct(s) => s.grid(),
        }
    }

    fn collide_spectral(&self, f: &SpectralCoefficients) -> boltzmann_spectral::Result<SpectralCoefficients> {
        match self {
            Operator::Fast(s) => s.collide_spectral(f),
            Operator::Direct(s) => s.collide_spectral(f),
        }
    }
}

pub fn cache_file(dir: &Path, evaluator: Evaluator, n: usize, m: usize) -> PathBuf {
    dir.join(format!("{}-n{n}-m{m}.bspw", evaluator.name()))
}

/// Builds (or loads) the evaluator for grid size `n` and sphere rule `m`.
pub fn build(
    cfg: &ExperimentConfig,
    evaluator: Evaluator,
    n: usize,
    m: usize,
) -> Result<(Operator, WeightRecord), CliError> {
    let start = Instant::now();
    let grid = cfg.grid(n)?;
    let kernel = cfg.kernel.build()?;
    let nr = cfg.radial_points(n);
    let radial = gauss_legendre(nr, 0.0, grid.radius())?;
    let sphere = lebedev(m)?;
    let path = cfg.cache.as_ref().map(|dir| cache_file(dir, evaluator, n, m));
    let mut record = WeightRecord {
        evaluator: evaluator.name(),
        n,
        m,
        nr,
        kernel: cfg.kernel.to_string(),
        status: CacheStatus::Disabled,
        path: path.clone(),
        seconds: 0.0,
    };
    let op = match evaluator {
        Evaluator::Fast => {
            let compute = || precompute_f(&grid, &kernel, &radial, &sphere, &lebedev(GHAT_POINTS)?, cfg.mem_cap_bytes);
            let (weights, status) = match &path {
                None => (compute()?, CacheStatus::Disabled),
                Some(path) => match load(path, || read_fast(path, &grid, &kernel, &radial, &sphere))? {
                    Some(CacheLoad::Hit(w)) => (w, CacheStatus::Hit),
                    found => {
                        let w = compute()?;
                        ensure_dir(path)?;
                        write_fast(path, &w)?;
                        (w, replaced_or_written(path, found))
                    }
                },
            };
            record.status = status;
            let execution = if cfg.serial() { Execution::Serial } else { Execution::Parallel };
            let mode = match cfg.convolution {
                Convolution::Linear => ConvolutionMode::Linear,
                Convolution::Circular => ConvolutionMode::Circular,
            };
            Operator::Fast(FastSolver::with_options(weights, mode, execution))
        }
        Evaluator::Direct if cfg.direct_storage == DirectStorage::Compact => {
            record.status = CacheStatus::NotCacheable;
            record.path = None;
            Operator::Direct(DirectOperator::Compact(precompute_g_compact(
                &grid,
                &kernel,
                &radial,
                cfg.mem_cap_bytes,
            )?))
        }
        Evaluator::Direct => {
            let compute = || -> boltzmann_spectral::Result<_> {
                precompute_g(&grid, &kernel, &radial, &sphere, &lebedev(GHAT_POINTS)?, cfg.mem_cap_bytes)
            };
            let (weights, status) = match &path {
                None => (compute()?, CacheStatus::Disabled),
                Some(path) => match load(path, || read_direct(path, &grid, &kernel, nr, m))? {
                    Some(CacheLoad::Hit(w)) => (w, CacheStatus::Hit),
                    found => {
                        let w = compute()?;
                        ensure_dir(path)?;
                        write_direct(path, &w, nr, m)?;
                        (w, replaced_or_written(path, found))
                    }
                },
            };
            record.status = status;
            Operator::Direct(DirectOperator::Dense(DirectSolver::new(weights)))
        }
    };
    record.seconds = start.elapsed().as_secs_f64();
    Ok((op, record))
}

/// `None` when there is no file yet; header mismatches come back as `Mismatch`.
fn load<T>(
    path: &Path,
    read: impl FnOnce() -> boltzmann_spectral::Result<CacheLoad<T>>,
) -> Result<Option<CacheLoad<T>>, CliError> {
    if !path.exists() {
        return Ok(None);
    }
    Ok(Some(read()?))
}

fn replaced_or_written<T>(path: &Path, found: Option<CacheLoad<T>>) -> CacheStatus {
    match found {
        Some(CacheLoad::Mismatch { found }) => {
            eprintln!(
                "warning: {} holds weights for a different configuration ({}); recomputed and overwritten",
                path.display(),
                describe(&found)
            );
            CacheStatus::Replaced
        }
        _ => CacheStatus::Written,
    }
}

fn describe(h: &CacheHeader) -> String {
    format!(
        "kind {:?}, kernel tag {} {:?}, N = {}, N_r = {}, M = {}, L = {}, R = {}",
        h.kind, h.kernel_tag, h.kernel_params, h.n, h.radial_points, h.sphere_points, h.half_width, h.radius
    )
}

fn ensure_dir(path: &Path) -> Result<(), CliError> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)?;
    }
    Ok(())
}

/// True when `err` is the memory-cap refusal.
pub fn is_capacity(err: &CliError) -> bool {
    matches!(err, CliError::Core(boltzmann_spectral::Error::Capacity { .. }))
}

