//! The experiments behind each subcommand.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::time::Instant;

use boltzmann_spectral::analytic::{bkw_f, bkw_q, maxwell_moments_exact, two_stream_initial};
use boltzmann_spectral::cache::peek_header;
use boltzmann_spectral::timestepper::{relax, RelaxationRun, TrajectoryRow};
use boltzmann_spectral::{CollisionOperator, DistributionFunction, MomentSet};

use crate::config::{Evaluator, Experiment, ExperimentConfig};
use crate::output::{write_manifest, Cell, ManifestInput, Table};
use crate::solvers::{self, CacheStatus, Operator, WeightRecord};
use crate::CliError;

/// Files and headline numbers of a finished run.
#[derive(Debug)]
pub struct RunReport {
    pub outputs: Vec<PathBuf>,
    pub manifest: PathBuf,
    pub weights: Vec<WeightRecord>,
    pub notes: Vec<String>,
    pub summary: BTreeMap<String, f64>,
}

struct Context<'a> {
    cfg: &'a ExperimentConfig,
    weights: Vec<WeightRecord>,
    outputs: Vec<PathBuf>,
    notes: Vec<String>,
    summary: BTreeMap<String, f64>,
}

impl Context<'_> {
    fn build(&mut self, evaluator: Evaluator, n: usize, m: usize) -> Result<Operator, CliError> {
        let (op, record) = solvers::build(self.cfg, evaluator, n, m)?;
        self.weights.push(record);
        Ok(op)
    }

    /// As `build`, but a memory-cap refusal becomes a note and `None`.
    fn build_or_skip(&mut self, evaluator: Evaluator, n: usize, m: usize) -> Result<Option<Operator>, CliError> {
        match self.build(evaluator, n, m) {
            Ok(op) => Ok(Some(op)),
            Err(err) if solvers::is_capacity(&err) => {
                let note = format!("{} N = {n} skipped: {err}", evaluator.name());
                eprintln!("warning: {note}");
                self.notes.push(note);
                Ok(None)
            }
            Err(err) => Err(err),
        }
    }

    fn write(&mut self, name: &str, table: &Table) -> Result<(), CliError> {
        let path = self.cfg.out.join(name);
        table.write(&path)?;
        self.outputs.push(path);
        Ok(())
    }

    fn record(&mut self, key: impl Into<String>, value: f64) {
        self.summary.insert(key.into(), value);
    }
}

/// Runs the configured experiment and writes its CSVs and manifest.
pub fn run(cfg: &ExperimentConfig) -> Result<RunReport, CliError> {
    std::fs::create_dir_all(&cfg.out)?;
    let pool = rayon::ThreadPoolBuilder::new().num_threads(cfg.threads).build()?;
    let mut ctx = Context {
        cfg,
        weights: Vec::new(),
        outputs: Vec::new(),
        notes: Vec::new(),
        summary: BTreeMap::new(),
    };
    pool.install(|| match cfg.experiment {
        Experiment::BkwError => bkw_error(&mut ctx),
        Experiment::BkwRelax => bkw_relax(&mut ctx),
        Experiment::MomentsMaxwell | Experiment::MomentsHardsphere | Experiment::MomentsVss => {
            moments_relax(&mut ctx)
        }
        Experiment::Bench => bench(&mut ctx),
        Experiment::Precompute => precompute(&mut ctx),
    })?;
    let manifest = write_manifest(ManifestInput {
        cfg,
        weights: &ctx.weights,
        outputs: &ctx.outputs,
        notes: &ctx.notes,
        summary: &ctx.summary,
    })?;
    Ok(RunReport {
        outputs: ctx.outputs,
        manifest,
        weights: ctx.weights,
        notes: ctx.notes,
        summary: ctx.summary,
    })
}

/// Sphere sizes to visit: the direct method ignores `M` for angle-independent kernels.
fn sphere_sizes(cfg: &ExperimentConfig, evaluator: Evaluator) -> Vec<usize> {
    let isotropic = matches!(cfg.kernel, crate::kernel_spec::KernelSpec::Vhs { .. });
    if evaluator == Evaluator::Direct && isotropic {
        vec![cfg.m[0]]
    } else {
        cfg.m.clone()
    }
}

fn bkw_error(ctx: &mut Context<'_>) -> Result<(), CliError> {
    let cfg = ctx.cfg;
    let mut table = Table::new(["N", "M", "evaluator", "Linf_error", "eval_seconds"]);
    for &n in &cfg.n {
        let grid = cfg.grid(n)?;
        let f = bkw_f(cfg.t_eval, &grid)?;
        let exact = bkw_q(cfg.t_eval, &grid)?;
        for &ev in cfg.method.evaluators() {
            for m in sphere_sizes(cfg, ev) {
                let Some(op) = ctx.build_or_skip(ev, n, m)? else { continue };
                let start = Instant::now();
                let q = op.collide(&f)?;
                let seconds = start.elapsed().as_secs_f64();
                let err = q.max_abs_diff(&exact)?;
                table.push(vec![n.into(), m.into(), ev.name().into(), err.into(), seconds.into()]);
                ctx.record(format!("linf_error.{}.n{n}.m{m}", ev.name()), err);
            }
        }
    }
    ctx.write("bkw-error.csv", &table)
}

fn bkw_relax(ctx: &mut Context<'_>) -> Result<(), CliError> {
    let cfg = ctx.cfg;
    let (n, m) = (cfg.n[0], cfg.m[0]);
    let grid = cfg.grid(n)?;
    let run = RelaxationRun::new(cfg.t0, cfg.t_end, cfg.dt)?;
    let f0 = bkw_f(cfg.t0, &grid)?;
    for &ev in cfg.method.evaluators() {
        let op = ctx.build(ev, n, m)?;
        let mut q = |f: &DistributionFunction| op.collide(f);
        let mut exact = |t: f64| bkw_f(t, &grid).ok();
        let out = relax(&f0, &run, &mut q, Some(&mut exact), &mut |_| {}).into_result()?;
        let mut table = Table::new(["t", "rel_Linf_error", "rho", "u1", "u2", "u3", "T", "entropy"]);
        let mut worst = 0.0f64;
        for row in &out.rows {
            let mom = &row.moments;
            worst = worst.max(row.error.unwrap_or(f64::NAN));
            table.push(vec![
                row.t.into(),
                row.error.into(),
                mom.density.into(),
                mom.velocity[0].into(),
                mom.velocity[1].into(),
                mom.velocity[2].into(),
                mom.temperature.into(),
                row.entropy.into(),
            ]);
        }
        let last = out.rows.last().and_then(|r| r.error).unwrap_or(f64::NAN);
        ctx.record(format!("max_rel_error.{}", ev.name()), worst);
        ctx.record(format!("final_rel_error.{}", ev.name()), last);
        ctx.write(&format!("bkw-relax-{}.csv", ev.name()), &table)?;
    }
    Ok(())
}

pub const MOMENT_NAMES: [&str; 6] = ["P11", "P22", "P33", "P12", "q1", "q2"];

/// The six non-trivial moments of the two-stream relaxation.
pub fn six(m: &MomentSet) -> [f64; 6] {
    let p = &m.momentum_flow;
    [p[0][0], p[1][1], p[2][2], p[0][1], m.energy_flow[0], m.energy_flow[1]]
}

fn moments_relax(ctx: &mut Context<'_>) -> Result<(), CliError> {
    let cfg = ctx.cfg;
    let (n, m) = (cfg.n[0], cfg.m[0]);
    let grid = cfg.grid(n)?;
    let run = RelaxationRun::new(cfg.t0, cfg.t_end, cfg.dt)?;
    let f0 = two_stream_initial(&grid);
    let with_exact = cfg.experiment == Experiment::MomentsMaxwell;
    let name = cfg.experiment.name();
    let mut trajectories: Vec<(Evaluator, Vec<TrajectoryRow>)> = Vec::new();
    for &ev in cfg.method.evaluators() {
        let op = ctx.build(ev, n, m)?;
        let mut q = |f: &DistributionFunction| op.collide(f);
        let out = relax(&f0, &run, &mut q, None, &mut |_| {}).into_result()?;
        drop(op);

        let mut header: Vec<String> = std::iter::once("t")
            .chain(MOMENT_NAMES)
            .chain(["entropy", "rho", "u1", "u2", "u3", "trace_P"])
            .map(String::from)
            .collect();
        if with_exact {
            header.extend(MOMENT_NAMES.iter().map(|c| format!("{c}_exact")));
            header.extend(MOMENT_NAMES.iter().map(|c| format!("{c}_diff")));
        }
        let mut table = Table::new(header);
        let mut worst = [0.0f64; 6];
        for row in &out.rows {
            let mom = &row.moments;
            let vals = six(mom);
            let mut cells: Vec<Cell> = vec![row.t.into()];
            cells.extend(vals.iter().map(|&v| Cell::from(v)));
            cells.extend([
                row.entropy.into(),
                mom.density.into(),
                mom.velocity[0].into(),
                mom.velocity[1].into(),
                mom.velocity[2].into(),
                mom.energy().into(),
            ]);
            if with_exact {
                let exact = six(&maxwell_moments_exact(row.t));
                cells.extend(exact.iter().map(|&v| Cell::from(v)));
                for i in 0..6 {
                    let d = vals[i] - exact[i];
                    worst[i] = worst[i].max(d.abs());
                    cells.push(d.into());
                }
            }
            table.push(cells);
        }
        let tag = ev.name();
        if with_exact {
            for (c, w) in MOMENT_NAMES.iter().zip(worst) {
                ctx.record(format!("max_abs_diff_exact.{tag}.{c}"), w);
            }
        }
        record_invariants(ctx, tag, &out.rows);
        ctx.write(&format!("{name}-{tag}.csv"), &table)?;
        trajectories.push((ev, out.rows));
    }
    if let [(_, fast), (_, direct)] = trajectories.as_slice() {
        let mut header = vec!["t".to_string()];
        header.extend(MOMENT_NAMES.iter().map(|c| format!("{c}_diff")));
        let mut table = Table::new(header);
        let mut worst = [0.0f64; 6];
        for (a, b) in fast.iter().zip(direct) {
            let (x, y) = (six(&a.moments), six(&b.moments));
            let mut cells: Vec<Cell> = vec![a.t.into()];
            for i in 0..6 {
                worst[i] = worst[i].max((x[i] - y[i]).abs());
                cells.push((x[i] - y[i]).into());
            }
            table.push(cells);
        }
        for (c, w) in MOMENT_NAMES.iter().zip(worst) {
            ctx.record(format!("max_abs_fast_minus_direct.{c}"), w);
        }
        ctx.write(&format!("{name}-fast-minus-direct.csv"), &table)?;
    }
    Ok(())
}

/// Conservation drift and the smallest entropy increment along a trajectory.
fn record_invariants(ctx: &mut Context<'_>, tag: &str, rows: &[TrajectoryRow]) {
    let first = &rows[0].moments;
    let mut drift = [0.0f64; 3];
    for row in rows {
        let m = &row.moments;
        let du: f64 = (0..3).map(|i| (m.velocity[i] - first.velocity[i]).powi(2)).sum::<f64>().sqrt();
        drift[0] = drift[0].max((m.density - first.density).abs());
        drift[1] = drift[1].max(du);
        drift[2] = drift[2].max((m.energy() - first.energy()).abs());
    }
    let min_increment = rows
        .windows(2)
        .map(|w| w[1].entropy - w[0].entropy)
        .fold(f64::INFINITY, f64::min);
    ctx.record(format!("drift.{tag}.rho"), drift[0]);
    ctx.record(format!("drift.{tag}.u"), drift[1]);
    ctx.record(format!("drift.{tag}.trace_P"), drift[2]);
    ctx.record(format!("entropy_min_increment.{tag}"), min_increment);
}

fn bench(ctx: &mut Context<'_>) -> Result<(), CliError> {
    let cfg = ctx.cfg;
    let mut table = Table::new([
        "N",
        "M",
        "evaluator",
        "threads",
        "precompute_seconds",
        "mean_seconds",
        "min_seconds",
        "speedup",
    ]);
    let evaluators = cfg.method.evaluators();
    for &n in &cfg.n {
        let f = bkw_f(cfg.t_eval, &cfg.grid(n)?)?;
        let mut direct_mean = None;
        let mut fast_points = Vec::new();
        // Direct first, so fast rows can report the speedup.
        for &ev in evaluators.iter().rev() {
            for m in sphere_sizes(cfg, ev) {
                let Some(op) = ctx.build_or_skip(ev, n, m)? else { continue };
                let precompute = ctx.weights.last().map_or(0.0, |w| w.seconds);
                let (mean, min) = time_evaluations(&op, &f, cfg.warmup, cfg.reps)?;
                let speedup = match (ev, direct_mean) {
                    (Evaluator::Fast, Some(d)) => Some(d / mean),
                    _ => None,
                };
                table.push(vec![
                    n.into(),
                    m.into(),
                    ev.name().into(),
                    cfg.threads.into(),
                    precompute.into(),
                    mean.into(),
                    min.into(),
                    speedup.into(),
                ]);
                let tag = ev.name();
                ctx.record(format!("mean_seconds.{tag}.n{n}.m{m}"), mean);
                ctx.record(format!("min_seconds.{tag}.n{n}.m{m}"), min);
                match ev {
                    Evaluator::Direct => direct_mean = Some(mean),
                    Evaluator::Fast => {
                        fast_points.push((m as f64, mean));
                        if let Some(s) = speedup {
                            ctx.record(format!("speedup.n{n}.m{m}"), s);
                        }
                    }
                }
            }
        }
        if fast_points.len() >= 2 {
            ctx.record(format!("m_slope.n{n}"), log_log_slope(&fast_points));
        }
    }
    ctx.record("threads", cfg.threads as f64);
    ctx.write("bench.csv", &table)
}

/// Mean and minimum wall time of `reps` evaluations after `warmup` untimed ones.
pub fn time_evaluations(
    op: &impl CollisionOperator,
    f: &DistributionFunction,
    warmup: usize,
    reps: usize,
) -> Result<(f64, f64), CliError> {
    for _ in 0..warmup {
        std::hint::black_box(op.collide(f)?);
    }
    let mut times = Vec::with_capacity(reps);
    for _ in 0..reps {
        let start = Instant::now();
        std::hint::black_box(op.collide(f)?);
        times.push(start.elapsed().as_secs_f64());
    }
    let mean = times.iter().sum::<f64>() / reps as f64;
    let min = times.iter().copied().fold(f64::INFINITY, f64::min);
    Ok((mean, min))
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn log_log_slope(points: &[(f64, f64)]) -> f64 {
    let logs: Vec<(f64, f64)> = points.iter().map(|&(x, y)| (x.ln(), y.ln())).collect();
    let k = logs.len() as f64;
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / k;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = logs.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

fn precompute(ctx: &mut Context<'_>) -> Result<(), CliError> {
    let cfg = ctx.cfg;
    let (n, m) = (cfg.n[0], cfg.m[0]);
    let mut table = Table::new(["evaluator", "N", "M", "N_r", "path", "status", "payload_bytes", "seconds"]);
    for &ev in cfg.method.evaluators() {
        ctx.build(ev, n, m)?;
        let record = ctx.weights.last().expect("just built").clone();
        let path = record.path.clone().expect("precompute requires a cache");
        let payload = peek_header(&path)?.payload_bytes();
        table.push(vec![
            ev.name().into(),
            n.into(),
            m.into(),
            record.nr.into(),
            path.display().to_string().as_str().into(),
            status_name(record.status).into(),
            Cell::Text(payload.to_string()),
            record.seconds.into(),
        ]);
    }
    ctx.write("precompute.csv", &table)
}

pub fn status_name(status: CacheStatus) -> &'static str {
    match status {
        CacheStatus::Disabled => "disabled",
        CacheStatus::NotCacheable => "not-cacheable",
        CacheStatus::Hit => "hit",
        CacheStatus::Written => "written",
        CacheStatus::Replaced => "replaced",
    }
}
