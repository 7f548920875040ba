//! Spectral solvers for the spatially homogeneous Boltzmann collision operator.
//!
//! The distribution is sampled on a periodic velocity box `[-L, L)³` and
//! represented by its truncated Fourier series. Two evaluators are provided:
//! a direct `O(N⁶)` weighted convolution ([`direct`]) and a fast
//! `O(M N_r N³ log N)` method ([`fast`]) that factors the gain weight over a
//! radial-spherical quadrature. Both implement [`CollisionOperator`].

pub mod analytic;
pub mod cache;
pub mod direct;
pub mod error;
pub mod fast;
mod fft;
pub mod grid;
pub mod kernels;
pub mod moments;
pub mod quadrature;
pub mod spectral;
pub mod timestepper;
pub mod weights;

pub use direct::{precompute_g, precompute_g_compact, CompactDirectSolver, DirectSolver, DirectWeights};
pub use error::{Error, Result};
pub use fast::{precompute_f, Execution, FastSolver, FastWeights};
pub use grid::{DistributionFunction, SpectralCoefficients, VelocityGrid};
pub use kernels::CollisionKernel;
pub use moments::{entropy, invariant_integrals, moments, MomentSet};
pub use quadrature::{gauss_legendre, lebedev, RadialRule, SphereRule};
pub use spectral::{forward_transform, inverse_transform, ConvolutionMode};

/// A discretized collision operator `Q(f, f)` on a fixed grid.
pub trait CollisionOperator: Sync {
    fn grid(&self) -> &VelocityGrid;

    /// `Q̂` from `f̂`.
    fn collide_spectral(&self, f: &SpectralCoefficients) -> Result<SpectralCoefficients>;

    /// `Q(f)` on the velocity grid; the imaginary residue of synthesis is dropped.
    fn collide(&self, f: &DistributionFunction) -> Result<DistributionFunction> {
        self.grid().ensure_same(f.grid(), "distribution")?;
        let q = self.collide_spectral(&forward_transform(f)?)?;
        inverse_transform(&q)
    }
}
