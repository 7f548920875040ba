//! Fast spectral method.
//!
//! The gain weight is written as a quadrature over `(r_q, ω_s)` of a product
//! `F(l+m, r, ω) e^{iθ l·ω} e^{-iθ m·ω}` with `θ = πr/(2L)`. Each quadrature
//! node then contributes a plain convolution of two phase-modulated copies of
//! `f`, which costs `O(N³ log N)` through zero-padded FFTs. The loss term is a
//! single convolution of `f` with `G(m,m) f`.
//!
//! For angle-independent kernels `F` has the closed form
//! `4π r² B(r) Sinc(θ|k|)`, which does not depend on `ω`. The products for all
//! `ω_s` at one radius are then summed in physical space before a single
//! analysis transform.
//!
//! Swapping `ω` for `-ω` exchanges the two modulated copies, so antipodal
//! nodes produce the same product and are synthesized once.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::{DistributionFunction, SpectralCoefficients, VelocityGrid};
use crate::kernels::CollisionKernel;
use crate::quadrature::{RadialRule, SphereRule};
use crate::spectral::{
    forward_transform, inverse_transform_with_residual, ConvolutionMode, ConvolutionWorkspace,
    Convolver,
};
use crate::weights::{angular_integrals, check_capacity, grid_modes, norm_sq, phase_scale, sinc};

/// `F(k, r) = 4π b r^{γ+2} Sinc(π r |k| / (2L))`.
pub fn analytic_f_vhs(b: f64, gamma: f64, k: [i64; 3], r: f64, grid: &VelocityGrid) -> f64 {
    let kn = (norm_sq(k) as f64).sqrt();
    4.0 * std::f64::consts::PI * b * r.powf(gamma + 2.0) * sinc(phase_scale(grid, r) * kn)
}

/// How the angular factor `F(k, r, ω)` is obtained.
#[derive(Debug, Clone)]
pub enum AngularFactor {
    /// Closed form for angle-independent kernels, evaluated on the fly.
    Isotropic,
    /// Precomputed `F(k, r_q, ω_s)`, `k` outermost, then `q`, then `s`.
    Table(Vec<Complex64>),
}

#[derive(Debug, Clone)]
pub struct FastWeights {
    grid: VelocityGrid,
    kernel: CollisionKernel,
    radial: RadialRule,
    sphere: SphereRule,
    angular: AngularFactor,
    loss_diag: Vec<Complex64>,
}

/// Selects the table path even for angle-independent kernels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum WeightPath {
    #[default]
    Auto,
    Table,
}

impl FastWeights {
    pub fn grid(&self) -> &VelocityGrid {
        &self.grid
    }

    pub fn kernel(&self) -> &CollisionKernel {
        &self.kernel
    }

    pub fn radial(&self) -> &RadialRule {
        &self.radial
    }

    pub fn sphere(&self) -> &SphereRule {
        &self.sphere
    }

    pub fn angular(&self) -> &AngularFactor {
        &self.angular
    }

    /// `F` table if this set of weights carries one.
    pub fn f_table(&self) -> Option<&[Complex64]> {
        match &self.angular {
            AngularFactor::Table(t) => Some(t),
            AngularFactor::Isotropic => None,
        }
    }

    /// `G(m, m)` in DFT order.
    pub fn loss_diag(&self) -> &[Complex64] {
        &self.loss_diag
    }

    /// `F(k, r_q, ω_s)` for a mode `k` of the grid.
    pub fn f_value(&self, k: [i64; 3], q: usize, s: usize) -> Result<Complex64> {
        let idx = |c: i64| {
            self.grid
                .index(c)
                .ok_or_else(|| Error::config(format!("mode {k:?} outside the truncated lattice")))
        };
        let flat = self.grid.flat(idx(k[0])?, idx(k[1])?, idx(k[2])?);
        Ok(match &self.angular {
            AngularFactor::Table(t) => t[(flat * self.radial.len() + q) * self.sphere.len() + s],
            AngularFactor::Isotropic => {
                let r = self.radial.nodes()[q];
                Complex64::new(isotropic_f(&self.grid, &self.kernel, k, r), 0.0)
            }
        })
    }

    /// Reassembles weights from stored parts, e.g. a cache file.
    pub fn from_parts(
        grid: VelocityGrid,
        kernel: CollisionKernel,
        radial: RadialRule,
        sphere: SphereRule,
        f_table: Option<Vec<Complex64>>,
        loss_diag: Vec<Complex64>,
    ) -> Result<Self> {
        let n3 = grid.len();
        if loss_diag.len() != n3 {
            return Err(Error::config(format!(
                "loss diagonal has {} entries, expected {n3}",
                loss_diag.len()
            )));
        }
        let angular = match f_table {
            Some(t) => {
                let want = n3 * radial.len() * sphere.len();
                if t.len() != want {
                    return Err(Error::config(format!(
                        "F table has {} entries, expected {want}",
                        t.len()
                    )));
                }
                AngularFactor::Table(t)
            }
            None if kernel.is_angle_independent() => AngularFactor::Isotropic,
            None => {
                return Err(Error::config(
                    "angle-dependent kernel requires a precomputed F table",
                ))
            }
        };
        Ok(Self {
            grid,
            kernel,
            radial,
            sphere,
            angular,
            loss_diag,
        })
    }
}

fn isotropic_f(grid: &VelocityGrid, kernel: &CollisionKernel, k: [i64; 3], r: f64) -> f64 {
    let kn = (norm_sq(k) as f64).sqrt();
    4.0 * std::f64::consts::PI * r * r * kernel.eval_unchecked(r, 0.0) * sinc(phase_scale(grid, r) * kn)
}

/// Number of complex entries in an `F` table.
pub fn f_table_entries(grid: &VelocityGrid, radial_points: usize, sphere_points: usize) -> u128 {
    grid.len() as u128 * radial_points as u128 * sphere_points as u128
}

/// Builds the fast-method weights.
///
/// Angle-independent kernels take the closed-form path and only store the loss
/// diagonal, computed with the reduced radial integral. Otherwise the `F`
/// table is filled by quadrature over `ĝ` with `ghat_rule`, and the loss
/// diagonal is assembled from the same quadrature nodes.
pub fn precompute_f(
    grid: &VelocityGrid,
    kernel: &CollisionKernel,
    radial: &RadialRule,
    sphere: &SphereRule,
    ghat_rule: &SphereRule,
    memory_cap: u64,
) -> Result<FastWeights> {
    precompute_f_with_path(grid, kernel, radial, sphere, ghat_rule, memory_cap, WeightPath::Auto)
}

pub fn precompute_f_with_path(
    grid: &VelocityGrid,
    kernel: &CollisionKernel,
    radial: &RadialRule,
    sphere: &SphereRule,
    ghat_rule: &SphereRule,
    memory_cap: u64,
    path: WeightPath,
) -> Result<FastWeights> {
    let use_table = path == WeightPath::Table || !kernel.is_angle_independent();
    let modes = grid_modes(grid);
    let (angular, loss_diag) = if use_table {
        check_capacity("F table", f_table_entries(grid, radial.len(), sphere.len()), memory_cap)?;
        let (table, diag) = table_weights(grid, kernel, radial, sphere, ghat_rule, &modes);
        (AngularFactor::Table(table), diag)
    } else {
        let prefactor = 16.0 * std::f64::consts::PI.powi(2);
        let diag = modes
            .iter()
            .map(|&m| {
                let m2 = [2 * m[0], 2 * m[1], 2 * m[2]];
                let kn = (norm_sq(m2) as f64).sqrt();
                let g: f64 = radial
                    .iter()
                    .map(|(r, w)| {
                        w * prefactor * r * r * kernel.eval_unchecked(r, 0.0)
                            * sinc(phase_scale(grid, r) * kn)
                    })
                    .sum();
                Complex64::new(g, 0.0)
            })
            .collect();
        (AngularFactor::Isotropic, diag)
    };
    Ok(FastWeights {
        grid: *grid,
        kernel: kernel.clone(),
        radial: radial.clone(),
        sphere: sphere.clone(),
        angular,
        loss_diag,
    })
}

fn table_weights(
    grid: &VelocityGrid,
    kernel: &CollisionKernel,
    radial: &RadialRule,
    sphere: &SphereRule,
    ghat_rule: &SphereRule,
    modes: &[[i64; 3]],
) -> (Vec<Complex64>, Vec<Complex64>) {
    let n3 = modes.len();
    let nr = radial.len();
    let m = sphere.len();
    let doubled: Vec<[i64; 3]> = modes.iter().map(|k| k.map(|c| 2 * c)).collect();
    // Per radial node: F over the modes ([k][s]) and the loss contribution.
    let per_radius: Vec<(Vec<Complex64>, Vec<Complex64>)> = radial
        .iter()
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|(r, w)| {
            let f = angular_integrals(grid, kernel, r, sphere, ghat_rule, modes);
            let f2 = angular_integrals(grid, kernel, r, sphere, ghat_rule, &doubled);
            let diag: Vec<Complex64> = (0..n3)
                .map(|k| {
                    let row = &f2[k * m..(k + 1) * m];
                    row.iter().zip(sphere.weights()).map(|(&v, &ws)| v * ws).sum::<Complex64>() * w
                })
                .collect();
            (f, diag)
        })
        .collect();
    let mut table = vec![Complex64::default(); n3 * nr * m];
    for (q, (f, _)) in per_radius.iter().enumerate() {
        for k in 0..n3 {
            let dst = (k * nr + q) * m;
            table[dst..dst + m].copy_from_slice(&f[k * m..(k + 1) * m]);
        }
    }
    let mut diag = vec![Complex64::default(); n3];
    for (_, d) in &per_radius {
        for (acc, v) in diag.iter_mut().zip(d) {
            *acc += v;
        }
    }
    (table, diag)
}

/// Execution strategy for the quadrature-node loop.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Serial,
    #[default]
    Parallel,
}

/// Evaluates the collision operator with precomputed fast weights.
pub struct FastSolver {
    weights: FastWeights,
    convolver: Convolver,
    execution: Execution,
    /// Mode triple of every flat index.
    modes: Vec<[i64; 3]>,
    /// Sphere nodes grouped as `(s, -s)`; both members share one product.
    pairs: Vec<(usize, Option<usize>)>,
}

/// Gain and loss parts of one evaluation, in Fourier space.
#[derive(Debug, Clone)]
pub struct CollisionParts {
    pub gain: SpectralCoefficients,
    pub loss: SpectralCoefficients,
}

impl CollisionParts {
    pub fn total(&self) -> SpectralCoefficients {
        self.gain.sub(&self.loss).expect("parts share a grid")
    }
}

/// Physical-space result of a fast evaluation.
#[derive(Debug, Clone)]
pub struct FastEvaluation {
    pub collision: DistributionFunction,
    /// Largest discarded imaginary part of the synthesized operator.
    pub imag_residual: f64,
}

impl FastSolver {
    pub fn new(weights: FastWeights) -> Self {
        Self::with_options(weights, ConvolutionMode::Linear, Execution::Parallel)
    }

    pub fn with_options(weights: FastWeights, mode: ConvolutionMode, execution: Execution) -> Self {
        let convolver = Convolver::new(weights.grid.n(), mode);
        let modes = grid_modes(&weights.grid);
        let pairs = weights.sphere.antipodal_pairs();
        Self {
            weights,
            convolver,
            execution,
            modes,
            pairs,
        }
    }

    pub fn weights(&self) -> &FastWeights {
        &self.weights
    }

    pub fn execution(&self) -> Execution {
        self.execution
    }

    /// `Q⁻_k = Σ_{l+m=k} G(m,m) f_l f_m` as one convolution.
    pub fn loss_term(&self, f: &SpectralCoefficients) -> Result<SpectralCoefficients> {
        self.weights.grid.ensure_same(f.grid(), "fast loss term")?;
        let c = f.as_slice();
        let weighted: Vec<Complex64> =
            c.iter().zip(&self.weights.loss_diag).map(|(a, g)| a * g).collect();
        let mut out = vec![Complex64::default(); c.len()];
        let mut ws = self.convolver.workspace();
        self.convolver.convolve_slices(c, &weighted, &mut out, &mut ws);
        Ok(SpectralCoefficients::from_vec(self.weights.grid, out))
    }

    /// `Q⁺_k ≈ Σ_{q,s} w_q w_s F(k, r_q, ω_s) Σ_{l+m=k} (e^{iθ l·ω} f_l)(e^{-iθ m·ω} f_m)`.
    pub fn gain_term(&self, f: &SpectralCoefficients) -> Result<SpectralCoefficients> {
        self.weights.grid.ensure_same(f.grid(), "fast gain term")?;
        let c = f.as_slice();
        let nr = self.weights.radial.len();
        let per_radius: Vec<Vec<Complex64>> = match self.execution {
            Execution::Serial => {
                let mut ws = self.convolver.workspace();
                (0..nr).map(|q| self.radial_contribution(c, q, &mut ws)).collect()
            }
            Execution::Parallel => (0..nr)
                .into_par_iter()
                .map_init(
                    || self.convolver.workspace(),
                    |ws, q| self.radial_contribution(c, q, ws),
                )
                .collect(),
        };
        // Summed in radial order either way, so both strategies agree bitwise.
        let mut out = vec![Complex64::default(); c.len()];
        for part in &per_radius {
            for (acc, v) in out.iter_mut().zip(part) {
                *acc += v;
            }
        }
        Ok(SpectralCoefficients::from_vec(self.weights.grid, out))
    }

    /// Contribution of radial node `q` to the gain term.
    fn radial_contribution(
        &self,
        f: &[Complex64],
        q: usize,
        ws: &mut ConvolutionWorkspace,
    ) -> Vec<Complex64> {
        let grid = &self.weights.grid;
        let n = grid.n();
        let r = self.weights.radial.nodes()[q];
        let wq = self.weights.radial.weights()[q];
        let theta = phase_scale(grid, r);
        let axis_modes = grid.modes();
        let m = self.weights.sphere.len();
        let sphere_p = self.weights.sphere.points();
        let sphere_w = self.weights.sphere.weights();
        let mut lhs_modes = vec![Complex64::default(); f.len()];
        let mut rhs_modes = vec![Complex64::default(); f.len()];
        let mut phase = [
            vec![Complex64::default(); n],
            vec![Complex64::default(); n],
            vec![Complex64::default(); n],
        ];
        let mut modulate = |omega: [f64; 3], lhs: &mut [Complex64], rhs: &mut [Complex64]| {
            for a in 0..3 {
                for (p, &k) in phase[a].iter_mut().zip(&axis_modes) {
                    *p = Complex64::from_polar(1.0, theta * k as f64 * omega[a]);
                }
            }
            let mut i = 0;
            for p0 in &phase[0] {
                for p1 in &phase[1] {
                    let p01 = p0 * p1;
                    for p2 in &phase[2] {
                        let p = p01 * p2;
                        lhs[i] = p * f[i];
                        rhs[i] = p.conj() * f[i];
                        i += 1;
                    }
                }
            }
        };
        let mut out = vec![Complex64::default(); f.len()];
        let ConvolutionWorkspace {
            lhs,
            rhs,
            fft,
        } = ws;
        match &self.weights.angular {
            AngularFactor::Isotropic => {
                let mut acc = vec![Complex64::default(); lhs.len()];
                for &(s, partner) in &self.pairs {
                    let w = sphere_w[s] + partner.map_or(0.0, |t| sphere_w[t]);
                    modulate(sphere_p[s], &mut lhs_modes, &mut rhs_modes);
                    self.convolver.synthesize(lhs, fft, |i| lhs_modes[i]);
                    self.convolver.synthesize(rhs, fft, |i| rhs_modes[i]);
                    for ((a, x), y) in acc.iter_mut().zip(lhs.iter()).zip(rhs.iter()) {
                        *a += x * y * w;
                    }
                }
                let kernel = &self.weights.kernel;
                let modes = &self.modes;
                self.convolver.analyze(&mut acc, fft, |i, v| {
                    out[i] = v * (wq * isotropic_f(grid, kernel, modes[i], r));
                });
            }
            AngularFactor::Table(table) => {
                let nr = self.weights.radial.len();
                for &(s, partner) in &self.pairs {
                    modulate(sphere_p[s], &mut lhs_modes, &mut rhs_modes);
                    self.convolver.synthesize(lhs, fft, |i| lhs_modes[i]);
                    self.convolver.synthesize(rhs, fft, |i| rhs_modes[i]);
                    for (x, y) in lhs.iter_mut().zip(rhs.iter()) {
                        *x *= y;
                    }
                    let (ws, wt) = (wq * sphere_w[s], partner.map(|t| (t, wq * sphere_w[t])));
                    self.convolver.analyze(lhs, fft, |i, v| {
                        let row = (i * nr + q) * m;
                        let mut weight = table[row + s] * ws;
                        if let Some((t, wt)) = wt {
                            weight += table[row + t] * wt;
                        }
                        out[i] += v * weight;
                    });
                }
            }
        }
        out
    }

    /// Gain and loss parts in Fourier space.
    pub fn parts(&self, f: &SpectralCoefficients) -> Result<CollisionParts> {
        Ok(CollisionParts {
            gain: self.gain_term(f)?,
            loss: self.loss_term(f)?,
        })
    }

    /// `Q = Re F⁻¹(Q⁺ - Q⁻)` on the grid.
    pub fn evaluate_fast(&self, f: &DistributionFunction) -> Result<FastEvaluation> {
        let coeffs = forward_transform(f)?;
        let q = self.parts(&coeffs)?.total();
        let synth = inverse_transform_with_residual(&q)?;
        Ok(FastEvaluation {
            collision: synth.function,
            imag_residual: synth.imag_residual,
        })
    }
}

impl crate::CollisionOperator for FastSolver {
    fn grid(&self) -> &VelocityGrid {
        &self.weights.grid
    }

    fn collide_spectral(&self, f: &SpectralCoefficients) -> Result<SpectralCoefficients> {
        Ok(self.parts(f)?.total())
    }
}

/// One-shot loss term; prefer [`FastSolver`] for repeated evaluations.
pub fn loss_term(f: &SpectralCoefficients, weights: &FastWeights) -> Result<SpectralCoefficients> {
    FastSolver::new(weights.clone()).loss_term(f)
}

/// One-shot gain term; prefer [`FastSolver`] for repeated evaluations.
pub fn gain_term(f: &SpectralCoefficients, weights: &FastWeights) -> Result<SpectralCoefficients> {
    FastSolver::new(weights.clone()).gain_term(f)
}

/// One-shot evaluation; prefer [`FastSolver`] for repeated evaluations.
pub fn evaluate_fast(f: &DistributionFunction, weights: &FastWeights) -> Result<FastEvaluation> {
    weights.grid.ensure_same(f.grid(), "fast evaluation")?;
    FastSolver::new(weights.clone()).evaluate_fast(f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::{gauss_legendre, lebedev, tensor_sphere};
    use crate::weights::DEFAULT_MEMORY_CAP;
    use crate::CollisionOperator;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn random_coeffs(grid: VelocityGrid, seed: u64) -> SpectralCoefficients {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        SpectralCoefficients::from_fn(grid, |_| {
            Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        })
    }

    fn weights(n: usize, nr: usize, m: usize, kernel: &CollisionKernel) -> FastWeights {
        let grid = VelocityGrid::with_default_domain(n, 6.0).unwrap();
        let radial = gauss_legendre(nr, 0.0, grid.radius()).unwrap();
        let sphere = lebedev(m).unwrap();
        precompute_f(&grid, kernel, &radial, &sphere, &lebedev(74).unwrap(), DEFAULT_MEMORY_CAP)
            .unwrap()
    }

    fn lattice_modes(n: usize) -> Vec<[i64; 3]> {
        let h = n as i64 / 2;
        let mut out = Vec::new();
        for a in -h..h {
            for b in -h..h {
                for c in -h..h {
                    out.push([a, b, c]);
                }
            }
        }
        out
    }

    fn in_range(k: [i64; 3], n: usize) -> bool {
        let h = n as i64 / 2;
        k.iter().all(|&c| (-h..h).contains(&c))
    }

    fn add(a: [i64; 3], b: [i64; 3]) -> [i64; 3] {
        [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
    }

    fn rel_diff(a: &SpectralCoefficients, b: &SpectralCoefficients) -> f64 {
        a.max_abs_diff(b).unwrap() / b.max_abs().max(1e-300)
    }

    #[test]
    fn closed_form_f() {
        let grid = VelocityGrid::with_default_domain(16, 6.0).unwrap();
        let b = 0.3;
        assert!((analytic_f_vhs(b, 0.5, [0, 0, 0], 2.0, &grid) - 4.0 * PI * b * 2.0f64.powf(2.5)).abs() < 1e-12);
        let r = 1.7;
        let k = [1, -2, 2];
        let x = PI * r * 3.0 / (2.0 * grid.half_width());
        let maxwell = analytic_f_vhs(1.0 / (4.0 * PI), 0.0, k, r, &grid);
        assert!((maxwell - r * r * x.sin() / x).abs() < 1e-14);
    }

    #[test]
    fn closed_form_matches_sphere_quadrature_of_the_defining_integral() {
        let grid = VelocityGrid::with_default_domain(8, 6.0).unwrap();
        let rule = lebedev(74).unwrap();
        // The degree-13 rule integrates e^{-iθ k·ĝ} to 1e-10 while θ|k| stays small.
        for (k, r) in [([0, 0, 0], 3.0), ([1, 0, 0], 0.8), ([1, 1, -1], 0.5), ([0, 2, 1], 0.3)] {
            let theta = phase_scale(&grid, r);
            let quad: Complex64 = rule
                .iter()
                .map(|(g, w)| {
                    let dot = (k[0] as f64) * g[0] + (k[1] as f64) * g[1] + (k[2] as f64) * g[2];
                    Complex64::from_polar(w * r * r * 0.25 / PI, -theta * dot)
                })
                .sum();
            let closed = analytic_f_vhs(0.25 / PI, 0.0, k, r, &grid);
            assert!((quad.re - closed).abs() < 1e-10, "{k:?}, {r}: {} vs {closed}", quad.re);
            assert!(quad.im.abs() < 1e-12);
        }
    }

    #[test]
    fn vss_without_angular_dependence_reproduces_the_closed_form() {
        let grid = VelocityGrid::with_default_domain(8, 6.0).unwrap();
        let radial = gauss_legendre(4, 0.0, grid.radius()).unwrap();
        let sphere = lebedev(6).unwrap();
        // Degree 47 resolves the plane waves up to θ|k| ≈ 10 on this grid.
        let ghat = tensor_sphere(48, 24).unwrap();
        let (b, gamma) = (0.1, 0.38);
        let kernel = CollisionKernel::vss(b, gamma, 0.0).unwrap();
        let w = precompute_f(&grid, &kernel, &radial, &sphere, &ghat, DEFAULT_MEMORY_CAP).unwrap();
        assert!(w.f_table().is_some());
        let mut worst: f64 = 0.0;
        for k in lattice_modes(8) {
            for (q, &r) in radial.nodes().iter().enumerate() {
                let closed = analytic_f_vhs(b, gamma, k, r, &grid);
                for s in 0..sphere.len() {
                    let v = w.f_value(k, q, s).unwrap();
                    worst = worst.max((v - closed).norm());
                }
            }
        }
        assert!(worst < 1e-8, "{worst}");
    }

    #[test]
    fn forced_table_path_for_constant_kernel() {
        let grid = VelocityGrid::with_default_domain(8, 6.0).unwrap();
        let radial = gauss_legendre(8, 0.0, grid.radius()).unwrap();
        let sphere = lebedev(6).unwrap();
        let ghat = lebedev(74).unwrap();
        let kernel = CollisionKernel::Custom(crate::kernels::CustomKernel::new(
            "constant",
            false,
            |_, _| 0.25 / PI,
        ));
        let w = precompute_f_with_path(
            &grid,
            &kernel,
            &radial,
            &sphere,
            &ghat,
            DEFAULT_MEMORY_CAP,
            WeightPath::Table,
        )
        .unwrap();
        let mut checked = 0;
        for k in lattice_modes(8) {
            let kn = (norm_sq(k) as f64).sqrt();
            for (q, &r) in radial.nodes().iter().enumerate() {
                let v = w.f_value(k, q, 0).unwrap();
                assert!(v.im.abs() < 1e-12);
                // Only plane waves the degree-13 rule integrates to 1e-8.
                if phase_scale(&grid, r) * kn <= 1.5 {
                    let closed = r * r * sinc(phase_scale(&grid, r) * kn);
                    assert!((v.re - closed).abs() < 1e-8, "{k:?} r={r}");
                    checked += 1;
                }
            }
        }
        assert!(checked > 200, "{checked}");
    }

    #[test]
    fn table_size_matches_memory_estimate() {
        let grid = VelocityGrid::with_default_domain(32, 6.0).unwrap();
        let entries = f_table_entries(&grid, 32, 14);
        assert_eq!(entries, 14_680_064);
        assert_eq!(entries * 16, 234_881_024);
        let kernel = CollisionKernel::vss(0.1, 0.38, 0.4).unwrap();
        let radial = gauss_legendre(32, 0.0, 6.0).unwrap();
        let rule = lebedev(14).unwrap();
        match precompute_f(&grid, &kernel, &radial, &rule, &rule, 1 << 20) {
            Err(Error::Capacity { required, .. }) => assert_eq!(required, 234_881_024),
            other => panic!("expected a capacity error, got {other:?}"),
        }
    }

    #[test]
    fn loss_diagonal_symmetry() {
        for kernel in [CollisionKernel::hard_sphere(), CollisionKernel::vss(0.1, 0.38, 0.4).unwrap()] {
            let w = weights(8, 8, 6, &kernel);
            let grid = *w.grid();
            for m in lattice_modes(8) {
                let neg = m.map(|c| -c);
                if !in_range(neg, 8) {
                    continue;
                }
                let at = |k: [i64; 3]| {
                    let i = grid.flat(
                        grid.index(k[0]).unwrap(),
                        grid.index(k[1]).unwrap(),
                        grid.index(k[2]).unwrap(),
                    );
                    w.loss_diag()[i]
                };
                assert!((at(neg) - at(m).conj()).norm() < 1e-12);
            }
        }
    }

    fn brute_loss(f: &SpectralCoefficients, w: &FastWeights) -> SpectralCoefficients {
        let grid = *f.grid();
        let n = grid.n();
        let idx = |k: [i64; 3]| {
            grid.flat(grid.index(k[0]).unwrap(), grid.index(k[1]).unwrap(), grid.index(k[2]).unwrap())
        };
        let mut out = SpectralCoefficients::zeros(grid);
        let modes = lattice_modes(n);
        for &l in &modes {
            for &m in &modes {
                let k = add(l, m);
                if !in_range(k, n) {
                    continue;
                }
                let v = out.get(k).unwrap()
                    + w.loss_diag()[idx(m)] * f.get(l).unwrap() * f.get(m).unwrap();
                out.set(k, v).unwrap();
            }
        }
        out
    }

    /// `Σ_{l+m=k} Σ_{q,s} w_q w_s F(k,r_q,ω_s) e^{iθ(l-m)·ω} f_l f_m` without FFTs.
    fn brute_gain(f: &SpectralCoefficients, w: &FastWeights) -> SpectralCoefficients {
        let grid = *f.grid();
        let n = grid.n();
        let modes = lattice_modes(n);
        let mut out = SpectralCoefficients::zeros(grid);
        for &k in &modes {
            let mut acc = Complex64::default();
            for (q, (r, wq)) in w.radial().iter().enumerate() {
                let theta = phase_scale(&grid, r);
                for (s, (omega, ws)) in w.sphere().iter().enumerate() {
                    let fk = w.f_value(k, q, s).unwrap();
                    let mut inner = Complex64::default();
                    for &l in &modes {
                        let m = [k[0] - l[0], k[1] - l[1], k[2] - l[2]];
                        if !in_range(m, n) {
                            continue;
                        }
                        let d: f64 = (0..3).map(|a| (l[a] - m[a]) as f64 * omega[a]).sum();
                        inner += Complex64::from_polar(1.0, theta * d) * f.get(l).unwrap() * f.get(m).unwrap();
                    }
                    acc += fk * inner * (wq * ws);
                }
            }
            out.set(k, acc).unwrap();
        }
        out
    }

    #[test]
    fn single_mode_and_zero_loss() {
        let w = weights(8, 8, 6, &CollisionKernel::maxwell());
        let grid = *w.grid();
        let solver = FastSolver::new(w.clone());
        let f = SpectralCoefficients::delta(grid, [0, 0, 0]).unwrap().scaled(Complex64::new(0.5, 0.0));
        let loss = solver.loss_term(&f).unwrap();
        let g00 = w.loss_diag()[0];
        let want = SpectralCoefficients::delta(grid, [0, 0, 0]).unwrap().scaled(g00 * 0.25);
        assert!(loss.max_abs_diff(&want).unwrap() < 1e-14 * g00.norm());
        let zero = SpectralCoefficients::zeros(grid);
        assert_eq!(solver.loss_term(&zero).unwrap().max_abs(), 0.0);
        assert_eq!(solver.gain_term(&zero).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn loss_term_matches_constrained_sum() {
        for kernel in [CollisionKernel::hard_sphere(), CollisionKernel::vss(0.1, 0.38, 0.4).unwrap()] {
            let w = weights(8, 4, 6, &kernel);
            let f = random_coeffs(*w.grid(), 3);
            let fast = FastSolver::new(w.clone()).loss_term(&f).unwrap();
            assert!(rel_diff(&fast, &brute_loss(&f, &w)) < 1e-12);
        }
    }

    #[test]
    fn gain_term_matches_double_sum() {
        for (n, nr, m) in [(4, 4, 6), (8, 8, 6)] {
            for kernel in [CollisionKernel::maxwell(), CollisionKernel::vss(0.1, 0.38, 0.4).unwrap()] {
                let w = weights(n, nr, m, &kernel);
                let f = random_coeffs(*w.grid(), 11);
                let fast = FastSolver::new(w.clone()).gain_term(&f).unwrap();
                let d = rel_diff(&fast, &brute_gain(&f, &w));
                assert!(d < 1e-12, "N={n} {}: {d}", kernel.descriptor());
            }
        }
    }

    #[test]
    fn serial_and_parallel_agree_bitwise() {
        let w = weights(8, 8, 14, &CollisionKernel::vss(0.1, 0.38, 0.4).unwrap());
        let f = random_coeffs(*w.grid(), 5);
        let serial = FastSolver::with_options(w.clone(), ConvolutionMode::Linear, Execution::Serial);
        let parallel = FastSolver::with_options(w, ConvolutionMode::Linear, Execution::Parallel);
        let a = serial.parts(&f).unwrap().total();
        let b = parallel.parts(&f).unwrap().total();
        assert_eq!(a.as_slice(), b.as_slice());
    }

    #[test]
    fn quadratic_scaling() {
        let w = weights(8, 8, 6, &CollisionKernel::hard_sphere());
        let solver = FastSolver::new(w);
        let f = random_coeffs(*solver.grid(), 9);
        let q1 = solver.collide_spectral(&f).unwrap();
        let q2 = solver.collide_spectral(&f.scaled(Complex64::new(3.0, 0.0))).unwrap();
        assert!(rel_diff(&q2, &q1.scaled(Complex64::new(9.0, 0.0))) < 1e-13);
    }

    #[test]
    fn maxwellian_is_nearly_annihilated() {
        let w = weights(16, 16, 14, &CollisionKernel::maxwell());
        let grid = *w.grid();
        let solver = FastSolver::new(w);
        let m = crate::analytic::maxwellian(1.0, [0.0; 3], 1.0, &grid).unwrap();
        let parts = solver.parts(&forward_transform(&m).unwrap()).unwrap();
        let gain = crate::spectral::inverse_transform(&parts.gain).unwrap();
        let q = solver.evaluate_fast(&m).unwrap();
        let ratio = q.collision.max_abs() / gain.max_abs();
        assert!(ratio < 1e-3, "{ratio}");
        // Only the unpaired -N/2 modes feed the imaginary part; it stays at truncation level.
        assert!(q.imag_residual < q.collision.max_abs(), "{}", q.imag_residual);
    }

    #[test]
    fn grid_mismatch_is_reported() {
        let w = weights(8, 4, 6, &CollisionKernel::maxwell());
        let other = SpectralCoefficients::zeros(VelocityGrid::with_default_domain(4, 6.0).unwrap());
        assert!(matches!(
            FastSolver::new(w).gain_term(&other),
            Err(Error::GridMismatch(_))
        ));
    }
}
