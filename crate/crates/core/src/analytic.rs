//! Closed-form references: Maxwellians, the BKW solution for Maxwell
//! molecules with its exact collision operator, and exact moment trajectories
//! for the two-Maxwellian initial state.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::grid::{DistributionFunction, VelocityGrid};
use crate::moments::MomentSet;

/// `ρ (2πT)^{-3/2} exp(-|v-u|²/(2T))` at a single velocity.
pub fn maxwellian_density(rho: f64, u: [f64; 3], temperature: f64, v: [f64; 3]) -> f64 {
    let d2: f64 = (0..3).map(|i| (v[i] - u[i]).powi(2)).sum();
    rho * (2.0 * PI * temperature).powf(-1.5) * (-d2 / (2.0 * temperature)).exp()
}

pub fn maxwellian(
    rho: f64,
    u: [f64; 3],
    temperature: f64,
    grid: &VelocityGrid,
) -> Result<DistributionFunction> {
    if !(rho > 0.0 && temperature > 0.0) {
        return Err(Error::Domain(format!(
            "Maxwellian needs positive density and temperature, got rho = {rho}, T = {temperature}"
        )));
    }
    Ok(DistributionFunction::from_fn(*grid, |v| {
        maxwellian_density(rho, u, temperature, v)
    }))
}

/// Drift velocities of the two-Maxwellian initial state.
pub const TWO_STREAM_VELOCITIES: [[f64; 3]; 2] = [[-2.0, 2.0, 0.0], [2.0, 0.0, 0.0]];

/// `½ (M_{u₁} + M_{u₂})` with unit temperature, `u₁ = (-2,2,0)`, `u₂ = (2,0,0)`.
pub fn two_stream_initial(grid: &VelocityGrid) -> DistributionFunction {
    let [u1, u2] = TWO_STREAM_VELOCITIES;
    DistributionFunction::from_fn(*grid, |v| {
        0.5 * (maxwellian_density(1.0, u1, 1.0, v) + maxwellian_density(1.0, u2, 1.0, v))
    })
}

/// Earliest time at which the BKW profile is non-negative, `6 ln(5/2)`.
pub fn bkw_positivity_time() -> f64 {
    6.0 * 2.5f64.ln()
}

/// Default initial time for BKW runs.
pub const BKW_T0: f64 = 5.5;

/// Time at which single evaluations are compared against the exact operator.
pub const BKW_EVAL_TIME: f64 = 6.5;

/// `K(t) = 1 - e^{-t/6}` and its derivative.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BkwState {
    pub t: f64,
    pub k: f64,
    pub k_prime: f64,
}

impl BkwState {
    pub fn at(t: f64) -> Result<Self> {
        if !(t >= bkw_positivity_time()) {
            return Err(Error::Domain(format!(
                "BKW solution is only positive for t >= 6 ln(5/2) ≈ {:.4}, got {t}",
                bkw_positivity_time()
            )));
        }
        Ok(Self::unchecked(t))
    }

    fn unchecked(t: f64) -> Self {
        let e = (-t / 6.0).exp();
        Self {
            t,
            k: 1.0 - e,
            k_prime: e / 6.0,
        }
    }

    /// `f(t, v)` at squared speed `v2`.
    pub fn density(&self, v2: f64) -> f64 {
        let k = self.k;
        (2.0 * (2.0 * PI * k).powf(1.5)).recip()
            * (-v2 / (2.0 * k)).exp()
            * ((5.0 * k - 3.0) / k + (1.0 - k) / (k * k) * v2)
    }

    /// `∂f/∂t = Q(f)` at squared speed `v2`.
    pub fn collision(&self, v2: f64) -> f64 {
        let k = self.k;
        let gauss = (2.0 * (2.0 * PI * k).powf(1.5)).recip() * (-v2 / (2.0 * k)).exp();
        ((-1.5 / k + v2 / (2.0 * k * k)) * self.density(v2)
            + gauss * (3.0 / (k * k) + (k - 2.0) / (k * k * k) * v2))
            * self.k_prime
    }
}

fn speed_sq(v: [f64; 3]) -> f64 {
    v[0] * v[0] + v[1] * v[1] + v[2] * v[2]
}

pub fn bkw_f(t: f64, grid: &VelocityGrid) -> Result<DistributionFunction> {
    let state = BkwState::at(t)?;
    Ok(DistributionFunction::from_fn(*grid, |v| state.density(speed_sq(v))))
}

pub fn bkw_q(t: f64, grid: &VelocityGrid) -> Result<DistributionFunction> {
    let state = BkwState::at(t)?;
    Ok(DistributionFunction::from_fn(*grid, |v| state.collision(speed_sq(v))))
}

/// Exact momentum and energy flows of the two-Maxwellian state relaxing
/// under Maxwell molecules with `B = 1/(4π)`.
pub fn maxwell_moments_exact(t: f64) -> MomentSet {
    let e = (-t / 2.0).exp();
    let p11 = 7.0 / 3.0 * e + 8.0 / 3.0;
    let p22 = -2.0 / 3.0 * e + 11.0 / 3.0;
    let p33 = -5.0 / 3.0 * e + 8.0 / 3.0;
    let p12 = -2.0 * e;
    let q1 = -2.0 * e;
    let q2 = -2.0 / 3.0 * e + 43.0 / 6.0;
    let velocity = [0.0, 1.0, 0.0];
    let trace = p11 + p22 + p33;
    MomentSet {
        density: 1.0,
        velocity,
        temperature: Some((trace - 1.0) / 3.0),
        momentum_flow: [[p11, p12, 0.0], [p12, p22, 0.0], [0.0, 0.0, p33]],
        energy_flow: [q1, q2, 0.0],
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::moments::moments;

    fn grid() -> VelocityGrid {
        VelocityGrid::with_default_domain(32, 6.0).unwrap()
    }

    #[test]
    fn maxwellian_peak_and_moments() {
        let g = VelocityGrid::new(32, 6.0, 8.0).unwrap();
        let u = [0.5, -0.25, 0.0];
        let m = maxwellian(2.0, u, 1.0, &g).unwrap();
        let peak = maxwellian_density(2.0, u, 1.0, u);
        assert!((peak - 2.0 * (2.0 * PI).powf(-1.5)).abs() < 1e-15);
        let mo = moments(&m);
        assert!((mo.density - 2.0).abs() < 1e-9);
        assert!((mo.velocity[0] - 0.5).abs() < 1e-9);
        assert!((mo.temperature.unwrap() - 1.0).abs() < 1e-9);
        assert!(maxwellian(0.0, u, 1.0, &g).is_err());
    }

    #[test]
    fn two_stream_state_moments_match_exact_formulas_at_zero() {
        let g = VelocityGrid::with_default_domain(32, 10.0).unwrap();
        let m = moments(&two_stream_initial(&g));
        let exact = maxwell_moments_exact(0.0);
        assert!((m.density - 1.0).abs() < 1e-10);
        assert!((m.velocity[1] - 1.0).abs() < 1e-10 && m.velocity[0].abs() < 1e-10);
        for i in 0..3 {
            for j in 0..3 {
                assert!(
                    (m.momentum_flow[i][j] - exact.momentum_flow[i][j]).abs() < 1e-9,
                    "P{i}{j}"
                );
            }
            assert!((m.energy_flow[i] - exact.energy_flow[i]).abs() < 1e-9, "q{i}");
        }
        assert!((m.momentum_flow[0][0] - 5.0).abs() < 1e-9);
    }

    #[test]
    fn exact_moments_trace_and_limits() {
        assert_eq!(maxwell_moments_exact(0.0).momentum_flow[0][0], 5.0);
        for t in [0.0, 0.3, 2.0, 10.0] {
            assert!((maxwell_moments_exact(t).energy() - 9.0).abs() < 1e-14);
        }
        assert!((maxwell_moments_exact(200.0).energy_flow[1] - 43.0 / 6.0).abs() < 1e-14);
    }

    #[test]
    fn bkw_limits_and_normalization() {
        let g = grid();
        let far = BkwState::unchecked(400.0);
        let v2: f64 = 1.7;
        let unit = (2.0 * PI).powf(-1.5) * (-v2 / 2.0).exp();
        assert!((far.density(v2) - unit).abs() < 1e-14);
        assert!(far.collision(v2).abs() < 1e-14);
        for t in [5.5, 6.5, 9.0] {
            let m = moments(&bkw_f(t, &g).unwrap());
            assert!((m.density - 1.0).abs() < 1e-8, "t = {t}");
            assert!((m.energy() - 3.0).abs() < 1e-8, "t = {t}");
            // The periodic node set is one-sided, so odd moments pick up a tiny bias.
            assert!(m.velocity.iter().all(|u| u.abs() < 1e-10), "{:?}", m.velocity);
        }
        assert!(BkwState::at(5.4).is_err());
        assert!(BkwState::at(5.5).is_ok());
    }

    #[test]
    fn exact_operator_is_the_time_derivative() {
        let t = 6.5;
        let s = BkwState::at(t).unwrap();
        for v2 in [0.0, 0.5, 2.0, 6.0, 12.0] {
            let q = s.collision(v2);
            let fd = |h: f64| {
                (BkwState::at(t + h).unwrap().density(v2) - BkwState::at(t - h).unwrap().density(v2))
                    / (2.0 * h)
            };
            let e1 = (fd(1e-2) - q).abs();
            let e2 = (fd(1e-3) - q).abs();
            assert!(e2 < 1e-7, "v2 = {v2}: {e2}");
            // Second-order: shrinking h tenfold cuts the error about a hundredfold.
            if e1 > 1e-11 {
                assert!(e1 / e2 > 50.0, "v2 = {v2}: {e1} / {e2}");
            }
        }
    }

    #[test]
    fn exact_operator_conserves_invariants_on_the_grid() {
        let g = grid();
        let q = bkw_q(6.5, &g).unwrap();
        let inv = crate::moments::invariant_integrals(&q);
        assert!(inv.mass.abs() < 1e-10);
        assert!(inv.momentum_norm() < 1e-12);
        assert!(inv.energy.abs() < 1e-9);
    }
}
