//! Truncated velocity domain and the two field representations that live on it.
//!
//! Velocities are sampled on the periodic cube `[-L, L)^3` with `N` points per
//! axis, `v_j = -L + j * 2L/N`. Fourier modes `k` take values in
//! `[-N/2, N/2 - 1]^3` and are stored in DFT order, i.e. mode `k` sits at array
//! index `k mod N` along each axis.

use ndarray::Array3;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Ratio `L / R` that satisfies the anti-aliasing bound with equality.
pub const DEFAULT_DOMAIN_RATIO: f64 = (3.0 + std::f64::consts::SQRT_2) / 4.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VelocityGrid {
    n: usize,
    support: f64,
    radius: f64,
    half_width: f64,
}

impl VelocityGrid {
    /// Builds a grid with `N` points per axis, relative-velocity radius `R` and
    /// half-width `L`. The support radius is `S = R / 2` and `L` must satisfy
    /// `L >= (3 + sqrt 2) S / 2`.
    pub fn new(n: usize, radius: f64, half_width: f64) -> Result<Self> {
        if n < 4 || n % 2 != 0 {
            return Err(Error::config(format!(
                "points per axis must be even and at least 4, got {n}"
            )));
        }
        if !(radius.is_finite() && radius > 0.0) {
            return Err(Error::config(format!(
                "truncation radius must be positive, got {radius}"
            )));
        }
        if !half_width.is_finite() {
            return Err(Error::config("domain half-width must be finite"));
        }
        let support = radius / 2.0;
        let min_width = DEFAULT_DOMAIN_RATIO * radius;
        if half_width < min_width * (1.0 - 1e-12) {
            return Err(Error::config(format!(
                "domain half-width L = {half_width} violates the anti-aliasing bound \
                 L >= (3 + sqrt 2) S / 2 = {min_width} for R = {radius}"
            )));
        }
        Ok(Self {
            n,
            support,
            radius,
            half_width,
        })
    }

    /// Grid with `L = (3 + sqrt 2) R / 4`.
    pub fn with_default_domain(n: usize, radius: f64) -> Result<Self> {
        Self::new(n, radius, DEFAULT_DOMAIN_RATIO * radius)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Support radius `S` of the distribution.
    pub fn support(&self) -> f64 {
        self.support
    }

    /// Truncation radius `R = 2S` of the relative velocity.
    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// Half-width `L` of the computational cube.
    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / self.n as f64
    }

    /// Volume element `(2L/N)^3` of the rectangle rule.
    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(3)
    }

    /// Total number of nodes, `N^3`.
    pub fn len(&self) -> usize {
        self.n * self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn shape(&self) -> (usize, usize, usize) {
        (self.n, self.n, self.n)
    }

    pub fn node(&self, j: usize) -> f64 {
        -self.half_width + j as f64 * self.spacing()
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n).map(|j| self.node(j)).collect()
    }

    /// Fourier mode stored at array index `i`.
    pub fn mode(&self, i: usize) -> i64 {
        mode_of_index(i, self.n)
    }

    /// Array index of mode `k`, or `None` when `k` lies outside `[-N/2, N/2 - 1]`.
    pub fn index(&self, k: i64) -> Option<usize> {
        let half = (self.n / 2) as i64;
        if k < -half || k >= half {
            None
        } else {
            Some(k.rem_euclid(self.n as i64) as usize)
        }
    }

    pub fn modes(&self) -> Vec<i64> {
        (0..self.n).map(|i| self.mode(i)).collect()
    }

    /// Flat row-major offset of the triple index `(i0, i1, i2)`.
    pub fn flat(&self, i0: usize, i1: usize, i2: usize) -> usize {
        (i0 * self.n + i1) * self.n + i2
    }

    pub(crate) fn ensure_same(&self, other: &VelocityGrid, what: &str) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::GridMismatch(format!(
                "{what}: {self:?} vs {other:?}"
            )))
        }
    }
}

pub(crate) fn mode_of_index(i: usize, n: usize) -> i64 {
    if i < n / 2 {
        i as i64
    } else {
        i as i64 - n as i64
    }
}

/// Samples of `f` at the grid nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct DistributionFunction {
    grid: VelocityGrid,
    values: Array3<f64>,
}

impl DistributionFunction {
    pub fn new(grid: VelocityGrid, values: Array3<f64>) -> Result<Self> {
        if values.dim() != grid.shape() {
            return Err(Error::config(format!(
                "sample array has shape {:?}, grid expects {:?}",
                values.dim(),
                grid.shape()
            )));
        }
        if let Some(bad) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Data(format!("non-finite sample at flat index {bad}")));
        }
        Ok(Self {
            grid,
            values: values.as_standard_layout().into_owned(),
        })
    }

    pub fn zeros(grid: VelocityGrid) -> Self {
        Self {
            grid,
            values: Array3::zeros(grid.shape()),
        }
    }

    /// Samples `f(v)` at every node.
    pub fn from_fn(grid: VelocityGrid, mut f: impl FnMut([f64; 3]) -> f64) -> Self {
        let nodes = grid.nodes();
        let values =
            Array3::from_shape_fn(grid.shape(), |(a, b, c)| f([nodes[a], nodes[b], nodes[c]]));
        Self { grid, values }
    }

    pub(crate) fn from_raw(grid: VelocityGrid, values: Array3<f64>) -> Self {
        Self { grid, values }
    }

    pub fn grid(&self) -> &VelocityGrid {
        &self.grid
    }

    pub fn values(&self) -> &Array3<f64> {
        &self.values
    }

    pub fn into_values(self) -> Array3<f64> {
        self.values
    }

    pub fn as_slice(&self) -> &[f64] {
        self.values
            .as_slice()
            .expect("distribution samples are kept in standard layout")
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    /// `self + s * other` on a shared grid.
    pub fn axpy(&self, s: f64, other: &DistributionFunction) -> Result<Self> {
        self.grid.ensure_same(&other.grid, "axpy")?;
        let values = &self.values + &(&other.values * s);
        Ok(Self::from_raw(self.grid, values))
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self::from_raw(self.grid, &self.values * s)
    }

    /// Largest pointwise difference `max |self - other|`.
    pub fn max_abs_diff(&self, other: &DistributionFunction) -> Result<f64> {
        self.grid.ensure_same(&other.grid, "difference")?;
        Ok(self
            .values
            .iter()
            .zip(other.values.iter())
            .fold(0.0, |m, (a, b)| m.max((a - b).abs())))
    }

    /// Fraction of the absolute mass carried by nodes with `|v| > S`.
    pub fn mass_outside_support(&self) -> f64 {
        let nodes = self.grid.nodes();
        let s2 = self.grid.support().powi(2);
        let mut outside = 0.0;
        let mut total = 0.0;
        for ((a, b, c), &v) in self.values.indexed_iter() {
            let r2 = nodes[a].powi(2) + nodes[b].powi(2) + nodes[c].powi(2);
            total += v.abs();
            if r2 > s2 {
                outside += v.abs();
            }
        }
        if total > 0.0 {
            outside / total
        } else {
            0.0
        }
    }
}

/// Fourier modes `f_k`, stored in DFT order.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralCoefficients {
    grid: VelocityGrid,
    modes: Array3<Complex64>,
}

impl SpectralCoefficients {
    pub fn new(grid: VelocityGrid, modes: Array3<Complex64>) -> Result<Self> {
        if modes.dim() != grid.shape() {
            return Err(Error::config(format!(
                "mode array has shape {:?}, grid expects {:?}",
                modes.dim(),
                grid.shape()
            )));
        }
        if modes.iter().any(|c| !(c.re.is_finite() && c.im.is_finite())) {
            return Err(Error::Data("non-finite Fourier mode".into()));
        }
        Ok(Self {
            grid,
            modes: modes.as_standard_layout().into_owned(),
        })
    }

    pub fn zeros(grid: VelocityGrid) -> Self {
        Self {
            grid,
            modes: Array3::zeros(grid.shape()),
        }
    }

    /// Unit coefficient at mode `k`, zero elsewhere.
    pub fn delta(grid: VelocityGrid, k: [i64; 3]) -> Result<Self> {
        let mut out = Self::zeros(grid);
        out.set(k, Complex64::new(1.0, 0.0))?;
        Ok(out)
    }

    /// Builds coefficients from a function of the mode triple.
    pub fn from_fn(grid: VelocityGrid, mut f: impl FnMut([i64; 3]) -> Complex64) -> Self {
        let modes = Array3::from_shape_fn(grid.shape(), |(a, b, c)| {
            f([grid.mode(a), grid.mode(b), grid.mode(c)])
        });
        Self { grid, modes }
    }

    pub(crate) fn from_vec(grid: VelocityGrid, data: Vec<Complex64>) -> Self {
        let modes = Array3::from_shape_vec(grid.shape(), data)
            .expect("mode vector length matches the grid");
        Self { grid, modes }
    }

    pub fn grid(&self) -> &VelocityGrid {
        &self.grid
    }

    pub fn modes(&self) -> &Array3<Complex64> {
        &self.modes
    }

    pub fn as_slice(&self) -> &[Complex64] {
        self.modes
            .as_slice()
            .expect("modes are kept in standard layout")
    }

    pub(crate) fn as_mut_slice(&mut self) -> &mut [Complex64] {
        self.modes
            .as_slice_mut()
            .expect("modes are kept in standard layout")
    }

    fn flat_index(&self, k: [i64; 3]) -> Result<usize> {
        let idx = |c: i64| {
            self.grid
                .index(c)
                .ok_or_else(|| Error::config(format!("mode {k:?} outside the truncated lattice")))
        };
        Ok(self.grid.flat(idx(k[0])?, idx(k[1])?, idx(k[2])?))
    }

    pub fn get(&self, k: [i64; 3]) -> Result<Complex64> {
        Ok(self.as_slice()[self.flat_index(k)?])
    }

    pub fn set(&mut self, k: [i64; 3], value: Complex64) -> Result<()> {
        let i = self.flat_index(k)?;
        self.as_mut_slice()[i] = value;
        Ok(())
    }

    pub fn max_abs(&self) -> f64 {
        self.modes.iter().fold(0.0, |m, c| m.max(c.norm()))
    }

    pub fn scaled(&self, s: Complex64) -> Self {
        Self {
            grid: self.grid,
            modes: self.modes.mapv(|c| c * s),
        }
    }

    pub fn sub(&self, other: &SpectralCoefficients) -> Result<Self> {
        self.grid.ensure_same(&other.grid, "subtraction")?;
        Ok(Self {
            grid: self.grid,
            modes: &self.modes - &other.modes,
        })
    }

    pub fn add(&self, other: &SpectralCoefficients) -> Result<Self> {
        self.grid.ensure_same(&other.grid, "addition")?;
        Ok(Self {
            grid: self.grid,
            modes: &self.modes + &other.modes,
        })
    }

    /// `max |a_k - b_k|`.
    pub fn max_abs_diff(&self, other: &SpectralCoefficients) -> Result<f64> {
        self.grid.ensure_same(&other.grid, "difference")?;
        Ok(self
            .modes
            .iter()
            .zip(other.modes.iter())
            .fold(0.0, |m, (a, b)| m.max((a - b).norm())))
    }

    /// Largest `|f_{-k} - conj(f_k)|` over modes whose negation is representable.
    pub fn hermitian_defect(&self) -> f64 {
        let half = (self.grid.n() / 2) as i64;
        let mut worst: f64 = 0.0;
        for ((a, b, c), v) in self.modes.indexed_iter() {
            let k = [self.grid.mode(a), self.grid.mode(b), self.grid.mode(c)];
            if k.iter().any(|&ki| ki == -half) {
                continue;
            }
            let neg = self
                .get([-k[0], -k[1], -k[2]])
                .expect("negated interior mode is in range");
            worst = worst.max((neg - v.conj()).norm());
        }
        worst
    }
}
