//! Fixed-step classical Runge-Kutta integration of `∂f/∂t = Q(f)`.

use crate::error::{Error, Result};
use crate::grid::DistributionFunction;
use crate::moments::{entropy, moments, MomentSet};

/// Upper bound on the number of steps a run may take.
pub const DEFAULT_MAX_STEPS: usize = 1_000_000;

/// Time window and step of a relaxation run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelaxationRun {
    pub t0: f64,
    pub t_end: f64,
    pub dt: f64,
}

impl RelaxationRun {
    pub fn new(t0: f64, t_end: f64, dt: f64) -> Result<Self> {
        Self::with_step_cap(t0, t_end, dt, DEFAULT_MAX_STEPS)
    }

    pub fn with_step_cap(t0: f64, t_end: f64, dt: f64, max_steps: usize) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::config(format!("time step must be positive, got {dt}")));
        }
        if !(t_end > t0) {
            return Err(Error::config(format!(
                "end time {t_end} must exceed start time {t0}"
            )));
        }
        let run = Self { t0, t_end, dt };
        if run.steps() > max_steps {
            return Err(Error::config(format!(
                "run needs {} steps, above the cap of {max_steps}",
                run.steps()
            )));
        }
        Ok(run)
    }

    /// Number of steps; the last one is shortened to land on `t_end`.
    pub fn steps(&self) -> usize {
        let exact = (self.t_end - self.t0) / self.dt;
        let rounded = exact.round();
        if (exact - rounded).abs() < 1e-9 * exact.max(1.0) {
            rounded as usize
        } else {
            exact.ceil() as usize
        }
    }

    /// Time after step `i` (1-based), with the final one pinned to `t_end`.
    pub fn time_after(&self, i: usize) -> f64 {
        if i >= self.steps() {
            self.t_end
        } else {
            self.t0 + i as f64 * self.dt
        }
    }
}

/// One classical RK4 step of size `dt`.
pub fn rk4_step<Q>(f: &DistributionFunction, dt: f64, collide: &mut Q) -> Result<DistributionFunction>
where
    Q: FnMut(&DistributionFunction) -> Result<DistributionFunction>,
{
    let k1 = collide(f)?;
    let k2 = collide(&f.axpy(0.5 * dt, &k1)?)?;
    let k3 = collide(&f.axpy(0.5 * dt, &k2)?)?;
    let k4 = collide(&f.axpy(dt, &k3)?)?;
    let values = f.values()
        + &((k1.values() + &(k2.values() * 2.0) + &(k3.values() * 2.0) + k4.values())
            * (dt / 6.0));
    DistributionFunction::new(*f.grid(), values)
}

/// Diagnostics recorded after each full step.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryRow {
    pub step: usize,
    pub t: f64,
    pub moments: MomentSet,
    pub entropy: f64,
    /// Relative `L∞` distance to a reference solution, when one is supplied.
    pub error: Option<f64>,
}

#[derive(Debug)]
pub struct Relaxation {
    pub rows: Vec<TrajectoryRow>,
    pub state: DistributionFunction,
    /// Set when the run stopped early; `rows` and `state` hold what was reached.
    pub failure: Option<Error>,
}

impl Relaxation {
    pub fn into_result(self) -> Result<Self> {
        match self.failure {
            Some(err) => Err(err),
            None => Ok(self),
        }
    }
}

fn row(
    step: usize,
    t: f64,
    f: &DistributionFunction,
    reference: &mut Option<&mut dyn FnMut(f64) -> Option<DistributionFunction>>,
) -> TrajectoryRow {
    let error = reference.as_mut().and_then(|exact| {
        let exact = exact(t)?;
        let scale = exact.max_abs();
        f.max_abs_diff(&exact).ok().map(|d| d / scale)
    });
    TrajectoryRow {
        step,
        t,
        moments: moments(f),
        entropy: entropy(f).value,
        error,
    }
}

/// Integrates from `f0` over `run`, recording a row at `t0` and after every step.
///
/// `reference(t)` may supply an exact solution for the error column;
/// `on_row` sees each row as soon as it is produced.
pub fn relax<Q>(
    f0: &DistributionFunction,
    run: &RelaxationRun,
    collide: &mut Q,
    mut reference: Option<&mut dyn FnMut(f64) -> Option<DistributionFunction>>,
    on_row: &mut dyn FnMut(&TrajectoryRow),
) -> Relaxation
where
    Q: FnMut(&DistributionFunction) -> Result<DistributionFunction>,
{
    let mut state = f0.clone();
    let first = row(0, run.t0, &state, &mut reference);
    on_row(&first);
    let mut rows = vec![first];
    let mut t = run.t0;
    for step in 1..=run.steps() {
        let t_next = run.time_after(step);
        let next = match rk4_step(&state, t_next - t, collide) {
            Ok(next) => next,
            Err(Error::Data(_)) => {
                return Relaxation {
                    rows,
                    state,
                    failure: Some(Error::NonFinite { step }),
                }
            }
            Err(err) => {
                return Relaxation {
                    rows,
                    state,
                    failure: Some(err),
                }
            }
        };
        state = next;
        t = t_next;
        let r = row(step, t, &state, &mut reference);
        on_row(&r);
        rows.push(r);
    }
    Relaxation {
        rows,
        state,
        failure: None,
    }
}
