//! Reference O(N⁶) method: a dense table `G(l, m)` and the weighted
//! convolution `Q_k = Σ_{l+m=k} [G(l,m) - G(m,m)] f_l f_m`.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::{SpectralCoefficients, VelocityGrid};
use crate::kernels::CollisionKernel;
use crate::quadrature::{RadialRule, SphereRule};
use crate::weights::{
    angular_integrals, check_capacity, grid_modes, lattice, norm_sq, phase_scale, sinc,
};

/// Dense weights `G(l, m)`, stored with `l` outer and `m` inner, both in DFT order.
#[derive(Debug, Clone)]
pub struct DirectWeights {
    grid: VelocityGrid,
    kernel: CollisionKernel,
    table: Vec<Complex64>,
}

impl DirectWeights {
    /// Reassembles weights from a raw table, e.g. one read from a cache file.
    pub fn from_table(
        grid: VelocityGrid,
        kernel: CollisionKernel,
        table: Vec<Complex64>,
    ) -> Result<Self> {
        let n3 = grid.len();
        if table.len() != n3 * n3 {
            return Err(Error::config(format!(
                "direct weight table has {} entries, expected {}",
                table.len(),
                n3 * n3
            )));
        }
        Ok(Self {
            grid,
            kernel,
            table,
        })
    }

    pub fn grid(&self) -> &VelocityGrid {
        &self.grid
    }

    pub fn kernel(&self) -> &CollisionKernel {
        &self.kernel
    }

    pub fn table(&self) -> &[Complex64] {
        &self.table
    }

    /// `G(l, m)` by flat mode indices.
    pub fn at(&self, l: usize, m: usize) -> Complex64 {
        self.table[l * self.grid.len() + m]
    }

    /// `G(l, m)` by mode triples.
    pub fn get(&self, l: [i64; 3], m: [i64; 3]) -> Result<Complex64> {
        Ok(self.at(flat_mode(&self.grid, l)?, flat_mode(&self.grid, m)?))
    }

    /// The loss weights `G(m, m)` in DFT order.
    pub fn diagonal(&self) -> Vec<Complex64> {
        (0..self.grid.len()).map(|m| self.at(m, m)).collect()
    }
}

fn flat_mode(grid: &VelocityGrid, k: [i64; 3]) -> Result<usize> {
    let idx = |c: i64| {
        grid.index(c)
            .ok_or_else(|| Error::config(format!("mode {k:?} outside the truncated lattice")))
    };
    Ok(grid.flat(idx(k[0])?, idx(k[1])?, idx(k[2])?))
}

/// Fills `G(l, m)`.
///
/// Angle-independent kernels use the reduced one-dimensional formula
/// `16π² ∫ r² B(r) Sinc(πr|l+m|/2L) Sinc(πr|l-m|/2L) dr` with the radial rule;
/// the sphere rules are ignored. Other kernels use the triple quadrature over
/// `r`, `ĝ` and `ω`.
pub fn precompute_g(
    grid: &VelocityGrid,
    kernel: &CollisionKernel,
    radial: &RadialRule,
    omega_rule: &SphereRule,
    ghat_rule: &SphereRule,
    memory_cap: u64,
) -> Result<DirectWeights> {
    let n3 = grid.len();
    check_capacity("direct weight table", (n3 as u128) * (n3 as u128), memory_cap)?;
    let table = if kernel.is_angle_independent() {
        reduced_table(grid, kernel, radial)
    } else {
        quadrature_table(grid, kernel, radial, omega_rule, ghat_rule)
    };
    Ok(DirectWeights {
        grid: *grid,
        kernel: kernel.clone(),
        table,
    })
}

/// `G(l, m)` of an angle-independent kernel as a function of `(|l+m|², |l-m|²)`.
struct ReducedNodes {
    weights: Vec<f64>,
    // sinc_by_sq[q][s] = Sinc(θ_q √s)
    sinc_by_sq: Vec<Vec<f64>>,
}

impl ReducedNodes {
    fn new(grid: &VelocityGrid, kernel: &CollisionKernel, radial: &RadialRule) -> Self {
        let n = grid.n();
        // |l ± m|² never exceeds 3N².
        let max_sq = 3 * n * n;
        let prefactor = 16.0 * std::f64::consts::PI.powi(2);
        let mut weights = Vec::with_capacity(radial.len());
        let mut sinc_by_sq = Vec::with_capacity(radial.len());
        for (r, w) in radial.iter() {
            let theta = phase_scale(grid, r);
            weights.push(w * prefactor * r * r * kernel.eval_unchecked(r, 0.0));
            sinc_by_sq.push((0..=max_sq).map(|s| sinc(theta * (s as f64).sqrt())).collect());
        }
        Self {
            weights,
            sinc_by_sq,
        }
    }

    fn value(&self, plus: usize, minus: usize) -> f64 {
        let mut acc = 0.0;
        for (w, row) in self.weights.iter().zip(&self.sinc_by_sq) {
            acc += w * row[plus] * row[minus];
        }
        acc
    }
}

fn reduced_table(grid: &VelocityGrid, kernel: &CollisionKernel, radial: &RadialRule) -> Vec<Complex64> {
    let nodes = ReducedNodes::new(grid, kernel, radial);
    let modes = grid_modes(grid);
    let n3 = modes.len();
    let mut table = vec![Complex64::default(); n3 * n3];
    table
        .par_chunks_mut(n3)
        .zip(modes.par_iter())
        .for_each(|(row, &l)| {
            for (entry, &m) in row.iter_mut().zip(&modes) {
                let plus = norm_sq([l[0] + m[0], l[1] + m[1], l[2] + m[2]]) as usize;
                let minus = norm_sq([l[0] - m[0], l[1] - m[1], l[2] - m[2]]) as usize;
                *entry = Complex64::new(nodes.value(plus, minus), 0.0);
            }
        });
    table
}

fn quadrature_table(
    grid: &VelocityGrid,
    kernel: &CollisionKernel,
    radial: &RadialRule,
    omega_rule: &SphereRule,
    ghat_rule: &SphereRule,
) -> Vec<Complex64> {
    let n = grid.n() as i64;
    // l + m ranges over [-N, N-2]³ and l - m over [-(N-1), N-1]³.
    let sums = lattice(-n, n - 2);
    let side = (2 * n - 1) as usize;
    let sum_index = |k: [i64; 3]| {
        let j = k.map(|c| (c + n) as usize);
        (j[0] * side + j[1]) * side + j[2]
    };
    let m_count = omega_rule.len();
    // Per radial node: F over all sums, and per-axis phases e^{iθ d ω_a}.
    struct RadialNode {
        weight: f64,
        f: Vec<Complex64>,
        phase: Vec<Complex64>,
    }
    let span = (2 * n - 1) as usize;
    let radial_nodes: Vec<RadialNode> = radial
        .iter()
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|(r, w)| {
            let theta = phase_scale(grid, r);
            let f = angular_integrals(grid, kernel, r, omega_rule, ghat_rule, &sums);
            let mut phase = vec![Complex64::default(); m_count * 3 * span];
            for (s, (om, _)) in omega_rule.iter().enumerate() {
                for a in 0..3 {
                    for (j, d) in (-(n - 1)..n).enumerate() {
                        phase[(s * 3 + a) * span + j] =
                            Complex64::from_polar(1.0, theta * d as f64 * om[a]);
                    }
                }
            }
            RadialNode { weight: w, f, phase }
        })
        .collect();
    let weights_s: Vec<f64> = omega_rule.weights().to_vec();
    let modes = grid_modes(grid);
    let n3 = modes.len();
    let mut table = vec![Complex64::default(); n3 * n3];
    table
        .par_chunks_mut(n3)
        .zip(modes.par_iter())
        .for_each(|(row, &l)| {
            for (entry, &m) in row.iter_mut().zip(&modes) {
                let ks = sum_index([l[0] + m[0], l[1] + m[1], l[2] + m[2]]);
                let d = [l[0] - m[0], l[1] - m[1], l[2] - m[2]].map(|c| (c + n - 1) as usize);
                let mut acc = Complex64::default();
                for node in &radial_nodes {
                    let f_row = &node.f[ks * m_count..(ks + 1) * m_count];
                    let mut inner = Complex64::default();
                    for s in 0..m_count {
                        let base = s * 3 * span;
                        let ph = node.phase[base + d[0]]
                            * node.phase[base + span + d[1]]
                            * node.phase[base + 2 * span + d[2]];
                        inner += f_row[s] * ph * weights_s[s];
                    }
                    acc += inner * node.weight;
                }
                *entry = acc;
            }
        });
    table
}

/// Constrained sum `Σ_{l+m=k} weight(l, m) a_l b_m` over the truncated lattice.
fn constrained_sum(
    grid: &VelocityGrid,
    a: &[Complex64],
    b: &[Complex64],
    weight: impl Fn(usize, usize) -> Complex64 + Sync,
) -> Vec<Complex64> {
    let n = grid.n();
    let modes = grid.modes();
    let mut out = vec![Complex64::default(); grid.len()];
    out.par_iter_mut().enumerate().for_each(|(k_flat, out_k)| {
        let k0 = modes[k_flat / (n * n)];
        let k1 = modes[(k_flat / n) % n];
        let k2 = modes[k_flat % n];
        let mut acc = Complex64::default();
        for (i0, &l0) in modes.iter().enumerate() {
            let Some(j0) = grid.index(k0 - l0) else { continue };
            for (i1, &l1) in modes.iter().enumerate() {
                let Some(j1) = grid.index(k1 - l1) else { continue };
                for (i2, &l2) in modes.iter().enumerate() {
                    let Some(j2) = grid.index(k2 - l2) else { continue };
                    let l = grid.flat(i0, i1, i2);
                    let m = grid.flat(j0, j1, j2);
                    acc += weight(l, m) * a[l] * b[m];
                }
            }
        }
        *out_k = acc;
    });
    out
}

/// `Q_k = Σ_{l+m=k} [G(l,m) - G(m,m)] f_l f_m`, evaluated term by term.
pub fn evaluate_direct(
    f: &SpectralCoefficients,
    weights: &DirectWeights,
) -> Result<SpectralCoefficients> {
    weights.grid.ensure_same(f.grid(), "direct evaluation")?;
    let c = f.as_slice();
    let out = constrained_sum(&weights.grid, c, c, |l, m| weights.at(l, m) - weights.at(m, m));
    Ok(SpectralCoefficients::from_vec(weights.grid, out))
}

/// Gain part `Σ_{l+m=k} G(l,m) f_l f_m`.
pub fn gain_direct(f: &SpectralCoefficients, weights: &DirectWeights) -> Result<SpectralCoefficients> {
    weights.grid.ensure_same(f.grid(), "direct gain")?;
    let c = f.as_slice();
    let out = constrained_sum(&weights.grid, c, c, |l, m| weights.at(l, m));
    Ok(SpectralCoefficients::from_vec(weights.grid, out))
}

/// Loss part `Σ_{l+m=k} G(m,m) f_l f_m`.
pub fn loss_direct(f: &SpectralCoefficients, weights: &DirectWeights) -> Result<SpectralCoefficients> {
    weights.grid.ensure_same(f.grid(), "direct loss")?;
    let c = f.as_slice();
    let out = constrained_sum(&weights.grid, c, c, |_, m| weights.at(m, m));
    Ok(SpectralCoefficients::from_vec(weights.grid, out))
}

/// Direct-method collision operator bundling its weight table.
#[derive(Debug, Clone)]
pub struct DirectSolver {
    weights: DirectWeights,
}

impl DirectSolver {
    pub fn new(weights: DirectWeights) -> Self {
        Self { weights }
    }

    pub fn weights(&self) -> &DirectWeights {
        &self.weights
    }
}

impl crate::CollisionOperator for DirectSolver {
    fn grid(&self) -> &VelocityGrid {
        &self.weights.grid
    }

    fn collide_spectral(&self, f: &SpectralCoefficients) -> Result<SpectralCoefficients> {
        evaluate_direct(f, &self.weights)
    }
}

/// Direct method for angle-independent kernels with `G` tabulated by
/// `(|l+m|², |l-m|²)`: `(3N²+1)²` reals instead of `N⁶` complex entries.
///
/// Weights are bitwise those of the dense reduced table; only the storage
/// differs. The double sum is still `O(N⁶)`.
#[derive(Debug, Clone)]
pub struct CompactDirectSolver {
    grid: VelocityGrid,
    kernel: CollisionKernel,
    side: usize,
    values: Vec<f64>,
    modes: Vec<[i64; 3]>,
}

pub fn precompute_g_compact(
    grid: &VelocityGrid,
    kernel: &CollisionKernel,
    radial: &RadialRule,
    memory_cap: u64,
) -> Result<CompactDirectSolver> {
    if !kernel.is_angle_independent() {
        return Err(Error::config(format!(
            "compact direct weights need an angle-independent kernel, got {}",
            kernel.descriptor()
        )));
    }
    let side = 3 * grid.n() * grid.n() + 1;
    // Reals, so half the complex entry count.
    check_capacity("compact direct weight table", ((side * side) as u128).div_ceil(2), memory_cap)?;
    let nodes = ReducedNodes::new(grid, kernel, radial);
    let mut values = vec![0.0; side * side];
    values.par_chunks_mut(side).enumerate().for_each(|(plus, row)| {
        for (minus, v) in row.iter_mut().enumerate() {
            *v = nodes.value(plus, minus);
        }
    });
    Ok(CompactDirectSolver {
        grid: *grid,
        kernel: kernel.clone(),
        side,
        values,
        modes: grid_modes(grid),
    })
}

impl CompactDirectSolver {
    pub fn kernel(&self) -> &CollisionKernel {
        &self.kernel
    }

    /// `G(l, m)` by flat mode indices.
    pub fn at(&self, l: usize, m: usize) -> f64 {
        let (a, b) = (self.modes[l], self.modes[m]);
        let plus = norm_sq([a[0] + b[0], a[1] + b[1], a[2] + b[2]]) as usize;
        let minus = norm_sq([a[0] - b[0], a[1] - b[1], a[2] - b[2]]) as usize;
        self.values[plus * self.side + minus]
    }

    /// Gain and loss sums accumulated in one pass over the pairs.
    pub fn parts(&self, f: &SpectralCoefficients) -> Result<crate::fast::CollisionParts> {
        self.grid.ensure_same(f.grid(), "compact direct evaluation")?;
        let grid = &self.grid;
        let n = grid.n();
        let axis = grid.modes();
        let c = f.as_slice();
        let loss_w: Vec<f64> = (0..grid.len()).map(|m| self.at(m, m)).collect();
        let mut sums = vec![(Complex64::default(), Complex64::default()); grid.len()];
        sums.par_iter_mut().enumerate().for_each(|(k_flat, out)| {
            let k = [axis[k_flat / (n * n)], axis[(k_flat / n) % n], axis[k_flat % n]];
            let mut gain = Complex64::default();
            let mut loss = Complex64::default();
            for (i0, &l0) in axis.iter().enumerate() {
                let Some(j0) = grid.index(k[0] - l0) else { continue };
                for (i1, &l1) in axis.iter().enumerate() {
                    let Some(j1) = grid.index(k[1] - l1) else { continue };
                    for (i2, &l2) in axis.iter().enumerate() {
                        let Some(j2) = grid.index(k[2] - l2) else { continue };
                        let l = grid.flat(i0, i1, i2);
                        let m = grid.flat(j0, j1, j2);
                        let ff = c[l] * c[m];
                        gain += ff * self.at(l, m);
                        loss += ff * loss_w[m];
                    }
                }
            }
            *out = (gain, loss);
        });
        let (gain, loss): (Vec<_>, Vec<_>) = sums.into_iter().unzip();
        Ok(crate::fast::CollisionParts {
            gain: SpectralCoefficients::from_vec(self.grid, gain),
            loss: SpectralCoefficients::from_vec(self.grid, loss),
        })
    }
}

impl crate::CollisionOperator for CompactDirectSolver {
    fn grid(&self) -> &VelocityGrid {
        &self.grid
    }

    fn collide_spectral(&self, f: &SpectralCoefficients) -> Result<SpectralCoefficients> {
        Ok(self.parts(f)?.total())
    }
}

impl DirectSolver {
    pub fn parts(&self, f: &SpectralCoefficients) -> Result<crate::fast::CollisionParts> {
        Ok(crate::fast::CollisionParts {
            gain: gain_direct(f, &self.weights)?,
            loss: loss_direct(f, &self.weights)?,
        })
    }
}
