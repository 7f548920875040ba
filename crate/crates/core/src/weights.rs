//! Pieces shared by the direct and fast weight constructions.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::VelocityGrid;
use crate::kernels::CollisionKernel;
use crate::quadrature::SphereRule;

/// Default cap on any single weight table: 8 GiB.
pub const DEFAULT_MEMORY_CAP: u64 = 8 << 30;

pub(crate) const COMPLEX_BYTES: u128 = 16;

pub(crate) fn check_capacity(what: &str, entries: u128, cap: u64) -> Result<()> {
    let required = entries * COMPLEX_BYTES;
    if required > cap as u128 {
        Err(Error::Capacity {
            what: what.to_string(),
            required,
            cap: cap as u128,
        })
    } else {
        Ok(())
    }
}

/// `sin(x)/x` with `Sinc(0) = 1`.
pub fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        let x2 = x * x;
        1.0 - x2 / 6.0 + x2 * x2 / 120.0
    } else {
        x.sin() / x
    }
}

/// Wavenumber scale `π r / (2L)` multiplying lattice indices in the phases.
pub(crate) fn phase_scale(grid: &VelocityGrid, r: f64) -> f64 {
    std::f64::consts::PI * r / (2.0 * grid.half_width())
}

/// `F(k, r, ω_s) = r² Σ_g w_g B(r, ω_s·g) e^{-i (πr/2L) k·g}` for every `k`
/// in `ks` and every node `ω_s` of `sphere`. Output layout is `[k][s]`.
pub(crate) fn angular_integrals(
    grid: &VelocityGrid,
    kernel: &CollisionKernel,
    r: f64,
    sphere: &SphereRule,
    ghat: &SphereRule,
    ks: &[[i64; 3]],
) -> Vec<Complex64> {
    let theta = phase_scale(grid, r);
    let m = sphere.len();
    let mg = ghat.len();
    // c[s][g] = r² w_g B(r, ω_s·g)
    let mut coupling = vec![0.0; m * mg];
    for (s, (w, _)) in sphere.iter().enumerate() {
        for (g, (gh, wg)) in ghat.iter().enumerate() {
            let cos = w[0] * gh[0] + w[1] * gh[1] + w[2] * gh[2];
            coupling[s * mg + g] = r * r * wg * kernel.eval_unchecked(r, cos);
        }
    }
    let (kmin, kmax) = ks.iter().flatten().fold((0i64, 0i64), |(lo, hi), &k| (lo.min(k), hi.max(k)));
    let span = (kmax - kmin + 1) as usize;
    // Per-axis phase factors e^{-iθ k_a g_a} for every ĝ node.
    let mut axis_phase = vec![Complex64::default(); mg * 3 * span];
    for (g, (gh, _)) in ghat.iter().enumerate() {
        for a in 0..3 {
            for (j, k) in (kmin..=kmax).enumerate() {
                axis_phase[(g * 3 + a) * span + j] =
                    Complex64::from_polar(1.0, -theta * k as f64 * gh[a]);
            }
        }
    }
    let mut out = vec![Complex64::default(); ks.len() * m];
    let mut phase = vec![Complex64::default(); mg];
    for (ki, k) in ks.iter().enumerate() {
        let j = k.map(|c| (c - kmin) as usize);
        for (g, p) in phase.iter_mut().enumerate() {
            let base = g * 3 * span;
            *p = axis_phase[base + j[0]]
                * axis_phase[base + span + j[1]]
                * axis_phase[base + 2 * span + j[2]];
        }
        for s in 0..m {
            let row = &coupling[s * mg..(s + 1) * mg];
            out[ki * m + s] = row.iter().zip(&phase).map(|(&c, &p)| p * c).sum();
        }
    }
    out
}

/// Every lattice triple with components in `lo..=hi`, first component slowest.
pub(crate) fn lattice(lo: i64, hi: i64) -> Vec<[i64; 3]> {
    let mut out = Vec::new();
    for a in lo..=hi {
        for b in lo..=hi {
            for c in lo..=hi {
                out.push([a, b, c]);
            }
        }
    }
    out
}

/// Mode triples of the grid in DFT storage order.
pub(crate) fn grid_modes(grid: &VelocityGrid) -> Vec<[i64; 3]> {
    let modes = grid.modes();
    let mut out = Vec::with_capacity(grid.len());
    for &a in &modes {
        for &b in &modes {
            for &c in &modes {
                out.push([a, b, c]);
            }
        }
    }
    out
}

pub(crate) fn norm_sq(k: [i64; 3]) -> i64 {
    k[0] * k[0] + k[1] * k[1] + k[2] * k[2]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::lebedev;
    use std::f64::consts::PI;

    #[test]
    fn sinc_branches_agree() {
        assert_eq!(sinc(0.0), 1.0);
        for x in [1e-5f64, 9.9e-5, 1.01e-4, 1e-3] {
            let direct = x.sin() / x;
            assert!((sinc(x) - direct).abs() < 1e-15);
        }
    }

    #[test]
    fn isotropic_angular_integral_is_a_sinc() {
        let grid = VelocityGrid::with_default_domain(8, 6.0).unwrap();
        let kernel = CollisionKernel::maxwell();
        let rule = lebedev(74).unwrap();
        let ks = vec![[0, 0, 0], [1, 0, 0], [1, -2, 3], [-4, 3, 3]];
        let r = 0.5;
        let f = angular_integrals(&grid, &kernel, r, &lebedev(6).unwrap(), &rule, &ks);
        for (ki, k) in ks.iter().enumerate() {
            let kn = (norm_sq(*k) as f64).sqrt();
            let want = r * r * sinc(PI * r * kn / (2.0 * grid.half_width()));
            for s in 0..6 {
                assert!((f[ki * 6 + s] - Complex64::new(want, 0.0)).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn capacity_error_names_bytes() {
        let err = check_capacity("table", 1 << 30, 1 << 20).unwrap_err();
        assert!(err.to_string().contains(&(16u128 << 30).to_string()));
    }
}
