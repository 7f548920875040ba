//! Forward/inverse Fourier-series transforms and the constrained-index
//! convolution `c_k = Σ_{l+m=k} a_l b_m`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fft::{CubeFft, FftWorkspace};
use crate::grid::{mode_of_index, DistributionFunction, SpectralCoefficients, VelocityGrid};

/// `(-1)^(k1+k2+k3)` for the mode stored at `(i0, i1, i2)`; this is the phase
/// `e^{iπ k·(1,1,1)}` induced by placing the first node at `-L`.
fn origin_phase(grid: &VelocityGrid, i0: usize, i1: usize, i2: usize) -> f64 {
    let parity = grid.mode(i0) + grid.mode(i1) + grid.mode(i2);
    if parity.rem_euclid(2) == 0 {
        1.0
    } else {
        -1.0
    }
}

/// `f_k = (2L)^{-3} ∫ f(v) e^{-iπ k·v/L} dv` by the rectangle rule on the nodes.
pub fn forward_transform(f: &DistributionFunction) -> Result<SpectralCoefficients> {
    let grid = *f.grid();
    if !f.is_finite() {
        return Err(Error::Data("non-finite samples in forward transform".into()));
    }
    let n = grid.n();
    let mut data: Vec<Complex64> = f.as_slice().iter().map(|&v| Complex64::new(v, 0.0)).collect();
    let fft = CubeFft::new(n);
    let mut ws = fft.workspace();
    fft.to_spectral(&mut data, &mut ws);
    let norm = 1.0 / grid.len() as f64;
    apply_origin_phase(&grid, &mut data, norm);
    Ok(SpectralCoefficients::from_vec(grid, data))
}

fn apply_origin_phase(grid: &VelocityGrid, data: &mut [Complex64], scale: f64) {
    let n = grid.n();
    for i0 in 0..n {
        for i1 in 0..n {
            for i2 in 0..n {
                data[grid.flat(i0, i1, i2)] *= origin_phase(grid, i0, i1, i2) * scale;
            }
        }
    }
}

/// Result of synthesizing grid values from Fourier modes.
#[derive(Debug, Clone)]
pub struct Synthesis {
    pub function: DistributionFunction,
    /// Largest discarded imaginary part.
    pub imag_residual: f64,
}

/// `f_N(v_j) = Σ_k f_k e^{iπ k·v_j/L}` at the nodes, keeping the real part.
pub fn inverse_transform(c: &SpectralCoefficients) -> Result<DistributionFunction> {
    Ok(inverse_transform_with_residual(c)?.function)
}

pub fn inverse_transform_with_residual(c: &SpectralCoefficients) -> Result<Synthesis> {
    let grid = *c.grid();
    if c.as_slice().iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
        return Err(Error::Data("non-finite modes in inverse transform".into()));
    }
    let mut data = c.as_slice().to_vec();
    apply_origin_phase(&grid, &mut data, 1.0);
    let fft = CubeFft::new(grid.n());
    let mut ws = fft.workspace();
    fft.to_physical(&mut data, &mut ws);
    let imag_residual = data.iter().fold(0.0f64, |m, z| m.max(z.im.abs()));
    let values = ndarray::Array3::from_shape_vec(grid.shape(), data.iter().map(|z| z.re).collect())
        .expect("shape matches grid");
    Ok(Synthesis {
        function: DistributionFunction::from_raw(grid, values),
        imag_residual,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ConvolutionMode {
    /// Zero-pad to `3N/2` per axis: exact constrained sum over `l + m = k`.
    ///
    /// Sums `l + m` span `[-N, N-2]`, so with padded length `P` the aliases
    /// `k ± P` of any retained `k ∈ [-N/2, N/2)` fall outside that span once
    /// `P ≥ 3N/2`.
    #[default]
    Linear,
    /// No padding: indices wrap modulo `N`.
    Circular,
}

/// Reusable FFT plans for convolving coefficient arrays of one grid size.
pub struct Convolver {
    n: usize,
    mode: ConvolutionMode,
    fft: CubeFft,
    /// Offset in the padded cube for every mode in DFT order.
    embed: Vec<usize>,
}

pub struct ConvolutionWorkspace {
    pub(crate) lhs: Vec<Complex64>,
    pub(crate) rhs: Vec<Complex64>,
    pub(crate) fft: FftWorkspace,
}

impl Convolver {
    pub fn new(n: usize, mode: ConvolutionMode) -> Self {
        let side = match mode {
            ConvolutionMode::Linear => 3 * n / 2,
            ConvolutionMode::Circular => n,
        };
        let fft = CubeFft::padded(n, side);
        let wrap = |i: usize| mode_of_index(i, n).rem_euclid(side as i64) as usize;
        let mut embed = Vec::with_capacity(n * n * n);
        for i0 in 0..n {
            for i1 in 0..n {
                for i2 in 0..n {
                    embed.push((wrap(i0) * side + wrap(i1)) * side + wrap(i2));
                }
            }
        }
        Self {
            n,
            mode,
            fft,
            embed,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn mode(&self) -> ConvolutionMode {
        self.mode
    }

    pub fn workspace(&self) -> ConvolutionWorkspace {
        let len = self.fft.len();
        ConvolutionWorkspace {
            lhs: vec![Complex64::default(); len],
            rhs: vec![Complex64::default(); len],
            fft: self.fft.workspace(),
        }
    }

    /// Writes `value(i)` for every mode `i` (DFT order) into the padded cube and
    /// synthesizes it in physical space.
    pub(crate) fn synthesize(
        &self,
        buf: &mut [Complex64],
        fft_ws: &mut FftWorkspace,
        value: impl Fn(usize) -> Complex64,
    ) {
        buf.fill(Complex64::default());
        for (i, &dst) in self.embed.iter().enumerate() {
            buf[dst] = value(i);
        }
        self.fft.to_physical(buf, fft_ws);
    }

    /// Analyzes a physical-space product and hands each retained mode,
    /// normalized, to `sink(i, c_i)` in DFT order.
    pub(crate) fn analyze(
        &self,
        buf: &mut [Complex64],
        fft_ws: &mut FftWorkspace,
        mut sink: impl FnMut(usize, Complex64),
    ) {
        self.fft.to_spectral(buf, fft_ws);
        let norm = 1.0 / self.fft.len() as f64;
        for (i, &src) in self.embed.iter().enumerate() {
            sink(i, buf[src] * norm);
        }
    }

    /// `out_k = Σ_{l+m=k} a_l b_m` for slices in DFT order.
    pub fn convolve_slices(
        &self,
        a: &[Complex64],
        b: &[Complex64],
        out: &mut [Complex64],
        ws: &mut ConvolutionWorkspace,
    ) {
        let ConvolutionWorkspace { lhs, rhs, fft } = ws;
        self.synthesize(lhs, fft, |i| a[i]);
        self.synthesize(rhs, fft, |i| b[i]);
        for (x, y) in lhs.iter_mut().zip(rhs.iter()) {
            *x *= y;
        }
        self.analyze(lhs, fft, |i, c| out[i] = c);
    }
}

/// Exact linear convolution of two coefficient arrays on the same grid.
pub fn convolve(a: &SpectralCoefficients, b: &SpectralCoefficients) -> Result<SpectralCoefficients> {
    convolve_with_mode(a, b, ConvolutionMode::Linear)
}

pub fn convolve_with_mode(
    a: &SpectralCoefficients,
    b: &SpectralCoefficients,
    mode: ConvolutionMode,
) -> Result<SpectralCoefficients> {
    a.grid().ensure_same(b.grid(), "convolution operands")?;
    let grid = *a.grid();
    let conv = Convolver::new(grid.n(), mode);
    let mut ws = conv.workspace();
    let mut out = vec![Complex64::default(); grid.len()];
    conv.convolve_slices(a.as_slice(), b.as_slice(), &mut out, &mut ws);
    Ok(SpectralCoefficients::from_vec(grid, out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn grid(n: usize) -> VelocityGrid {
        VelocityGrid::with_default_domain(n, 6.0).unwrap()
    }

    fn random_coeffs(grid: VelocityGrid, rng: &mut ChaCha8Rng) -> SpectralCoefficients {
        SpectralCoefficients::from_fn(grid, |_| {
            Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        })
    }

    /// Brute-force `Σ_{l+m=k}` over the truncated lattice.
    fn brute_convolution(a: &SpectralCoefficients, b: &SpectralCoefficients) -> SpectralCoefficients {
        let g = *a.grid();
        let modes = g.modes();
        SpectralCoefficients::from_fn(g, |k| {
            let mut acc = Complex64::default();
            for &l0 in &modes {
                for &l1 in &modes {
                    for &l2 in &modes {
                        let m = [k[0] - l0, k[1] - l1, k[2] - l2];
                        if let Ok(bm) = b.get(m) {
                            acc += a.get([l0, l1, l2]).unwrap() * bm;
                        }
                    }
                }
            }
            acc
        })
    }

    #[test]
    fn constant_has_only_zero_mode() {
        let g = grid(8);
        let f = DistributionFunction::from_fn(g, |_| 2.5);
        let c = forward_transform(&f).unwrap();
        assert!((c.get([0, 0, 0]).unwrap() - Complex64::new(2.5, 0.0)).norm() < 1e-14);
        let rest = c
            .sub(&SpectralCoefficients::delta(g, [0, 0, 0]).unwrap().scaled(2.5.into()))
            .unwrap();
        assert!(rest.max_abs() < 1e-14);
    }

    #[test]
    fn cosine_splits_into_two_modes() {
        let g = grid(8);
        let l = g.half_width();
        let f = DistributionFunction::from_fn(g, |v| (PI * v[0] / l).cos());
        let c = forward_transform(&f).unwrap();
        for k in [[1, 0, 0], [-1, 0, 0]] {
            assert!((c.get(k).unwrap() - Complex64::new(0.5, 0.0)).norm() < 1e-14);
        }
        let mut expected = SpectralCoefficients::zeros(g);
        expected.set([1, 0, 0], 0.5.into()).unwrap();
        expected.set([-1, 0, 0], 0.5.into()).unwrap();
        assert!(c.max_abs_diff(&expected).unwrap() < 1e-14);
    }

    #[test]
    fn zero_mode_of_maxwellian_is_mass_over_volume() {
        let g = VelocityGrid::with_default_domain(32, 8.0).unwrap();
        let f = DistributionFunction::from_fn(g, |v| {
            (-(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]) / 2.0).exp() / (2.0 * PI).powf(1.5)
        });
        // Rectangle-rule quadrature of the defining integral at k = 0.
        let h = g.spacing();
        let nodes = g.nodes();
        let mut sum = 0.0;
        for &a in &nodes {
            for &b in &nodes {
                for &c in &nodes {
                    sum += (-(a * a + b * b + c * c) / 2.0).exp() / (2.0 * PI).powf(1.5);
                }
            }
        }
        let oracle = sum * h.powi(3) / (2.0 * g.half_width()).powi(3);
        let c0 = forward_transform(&f).unwrap().get([0, 0, 0]).unwrap();
        assert!((c0.re - oracle).abs() < 1e-15);
        assert!(c0.im.abs() < 1e-16);
        assert!((oracle * (2.0 * g.half_width()).powi(3) - 1.0).abs() < 1e-10, "{}", oracle * (2.0 * g.half_width()).powi(3) - 1.0);
    }

    #[test]
    fn unit_zero_mode_synthesizes_to_one() {
        let g = grid(8);
        let f = inverse_transform(&SpectralCoefficients::delta(g, [0, 0, 0]).unwrap()).unwrap();
        assert!(f.values().iter().all(|&v| (v - 1.0).abs() < 1e-15));
    }

    #[test]
    fn round_trip_and_hermitian_symmetry() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in [4, 8, 16] {
            let g = grid(n);
            let f = DistributionFunction::from_fn(g, |_| rng.gen_range(-1.0..1.0));
            let c = forward_transform(&f).unwrap();
            assert!(c.hermitian_defect() < 1e-14, "n = {n}");
            let s = inverse_transform_with_residual(&c).unwrap();
            let err = s.function.max_abs_diff(&f).unwrap() / f.max_abs();
            assert!(err < 1e-12, "n = {n}: {err}");
            assert!(s.imag_residual < 1e-12 * f.max_abs());
        }
    }

    #[test]
    fn hermitian_modes_synthesize_real_signal() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let g = grid(8);
        let half = 4;
        let raw = random_coeffs(g, &mut rng);
        // Symmetrize interior modes; edge modes are dropped.
        let sym = SpectralCoefficients::from_fn(g, |k| {
            if k.iter().any(|&x| x == -half) {
                return Complex64::default();
            }
            let a = raw.get(k).unwrap();
            let b = raw.get([-k[0], -k[1], -k[2]]).unwrap();
            (a + b.conj()) * 0.5
        });
        let s = inverse_transform_with_residual(&sym).unwrap();
        let norm = s.function.max_abs();
        assert!(s.imag_residual < 1e-12 * norm);
    }

    #[test]
    fn non_finite_modes_are_rejected() {
        let g = grid(4);
        let mut c = SpectralCoefficients::zeros(g);
        c.set([1, 0, 0], Complex64::new(f64::INFINITY, 0.0)).unwrap();
        assert!(inverse_transform(&c).is_err());
    }

    #[test]
    fn delta_identity_and_index_addition() {
        let g = grid(8);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let b = random_coeffs(g, &mut rng);
        let one = SpectralCoefficients::delta(g, [0, 0, 0]).unwrap();
        assert!(convolve(&one, &b).unwrap().max_abs_diff(&b).unwrap() < 1e-13);

        let e = SpectralCoefficients::delta(g, [1, 0, 0]).unwrap();
        let c = convolve(&e, &e).unwrap();
        let want = SpectralCoefficients::delta(g, [2, 0, 0]).unwrap();
        assert!(c.max_abs_diff(&want).unwrap() < 1e-14);

        // (N/2 - 1) + 1 falls off the lattice in linear mode but wraps circularly.
        let top = SpectralCoefficients::delta(g, [3, 0, 0]).unwrap();
        assert!(convolve(&top, &e).unwrap().max_abs() < 1e-14);
        let wrapped = convolve_with_mode(&top, &e, ConvolutionMode::Circular).unwrap();
        let want = SpectralCoefficients::delta(g, [-4, 0, 0]).unwrap();
        assert!(wrapped.max_abs_diff(&want).unwrap() < 1e-14);
    }

    #[test]
    fn matches_brute_force_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for n in [4, 8] {
            let g = grid(n);
            for _ in 0..3 {
                let a = random_coeffs(g, &mut rng);
                let b = random_coeffs(g, &mut rng);
                let fast = convolve(&a, &b).unwrap();
                let slow = brute_convolution(&a, &b);
                let err = fast.max_abs_diff(&slow).unwrap() / slow.max_abs();
                assert!(err < 1e-12, "n = {n}: {err}");
            }
        }
    }

    #[test]
    fn grid_mismatch_is_a_configuration_error() {
        let a = SpectralCoefficients::zeros(grid(4));
        let b = SpectralCoefficients::zeros(grid(8));
        assert!(matches!(convolve(&a, &b), Err(Error::GridMismatch(_))));
    }
}
