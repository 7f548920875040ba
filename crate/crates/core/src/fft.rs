//! Three-dimensional FFTs on cubes stored in row-major order, with optional
//! pruning for zero-padded spectra.
//!
//! When a spectrum of side `n` is embedded in a cube of side `p > n`, only the
//! indices `[0, n/2) ∪ [p - n/2, p)` along each axis carry data. Transforming
//! to physical space therefore only needs the last axis on `n^2` lanes and the
//! middle axis on `n p` lanes; the return trip needs the same lanes because
//! only the embedded block is read back.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

pub(crate) struct CubeFft {
    side: usize,
    to_spectral: Arc<dyn Fft<f64>>,
    to_physical: Arc<dyn Fft<f64>>,
    active: Vec<bool>,
    pruned: bool,
}

pub(crate) struct FftWorkspace {
    lanes: Vec<Complex64>,
    scratch: Vec<Complex64>,
}

impl CubeFft {
    /// Plain transform of a full `side^3` cube.
    pub fn new(side: usize) -> Self {
        Self::build(side, side)
    }

    /// Transform of a `side^3` cube whose spectrum only occupies the
    /// embedded `n^3` block of a zero-padded array.
    pub fn padded(n: usize, side: usize) -> Self {
        assert!(side >= n && n % 2 == 0);
        Self::build(n, side)
    }

    fn build(n: usize, side: usize) -> Self {
        let mut planner = FftPlanner::new();
        let to_spectral = planner.plan_fft_forward(side);
        let to_physical = planner.plan_fft_inverse(side);
        let half = n / 2;
        let active = (0..side).map(|i| i < half || i >= side - half).collect();
        Self {
            side,
            to_spectral,
            to_physical,
            active,
            pruned: n < side,
        }
    }

    pub fn len(&self) -> usize {
        self.side * self.side * self.side
    }

    pub fn workspace(&self) -> FftWorkspace {
        let scratch_len = self
            .to_spectral
            .get_inplace_scratch_len()
            .max(self.to_physical.get_inplace_scratch_len());
        FftWorkspace {
            lanes: vec![Complex64::default(); self.side * self.side],
            scratch: vec![Complex64::default(); scratch_len],
        }
    }

    /// Unnormalized synthesis `x_j = Σ_k c_k e^{+2πi jk/p}` in place.
    pub fn to_physical(&self, data: &mut [Complex64], ws: &mut FftWorkspace) {
        let plan = Arc::clone(&self.to_physical);
        self.last_axis(data, plan.as_ref(), ws);
        self.middle_axis(data, plan.as_ref(), ws);
        self.first_axis(data, plan.as_ref(), ws);
    }

    /// Unnormalized analysis `c_k = Σ_j x_j e^{-2πi jk/p}` in place. With
    /// pruning only the embedded block of the result is valid.
    pub fn to_spectral(&self, data: &mut [Complex64], ws: &mut FftWorkspace) {
        let plan = Arc::clone(&self.to_spectral);
        self.first_axis(data, plan.as_ref(), ws);
        self.middle_axis(data, plan.as_ref(), ws);
        self.last_axis(data, plan.as_ref(), ws);
    }

    fn keep(&self, i: usize) -> bool {
        !self.pruned || self.active[i]
    }

    fn last_axis(&self, data: &mut [Complex64], plan: &dyn Fft<f64>, ws: &mut FftWorkspace) {
        let p = self.side;
        if !self.pruned {
            plan.process_with_scratch(data, &mut ws.scratch);
            return;
        }
        for i0 in (0..p).filter(|&i| self.keep(i)) {
            for i1 in (0..p).filter(|&i| self.keep(i)) {
                let off = (i0 * p + i1) * p;
                plan.process_with_scratch(&mut data[off..off + p], &mut ws.scratch);
            }
        }
    }

    fn middle_axis(&self, data: &mut [Complex64], plan: &dyn Fft<f64>, ws: &mut FftWorkspace) {
        let p = self.side;
        let lanes = &mut ws.lanes;
        for i0 in (0..p).filter(|&i| self.keep(i)) {
            let plane = &mut data[i0 * p * p..(i0 + 1) * p * p];
            for i1 in 0..p {
                for i2 in 0..p {
                    lanes[i2 * p + i1] = plane[i1 * p + i2];
                }
            }
            plan.process_with_scratch(lanes, &mut ws.scratch);
            for i1 in 0..p {
                for i2 in 0..p {
                    plane[i1 * p + i2] = lanes[i2 * p + i1];
                }
            }
        }
    }

    fn first_axis(&self, data: &mut [Complex64], plan: &dyn Fft<f64>, ws: &mut FftWorkspace) {
        let p = self.side;
        let lanes = &mut ws.lanes;
        for i1 in 0..p {
            for i0 in 0..p {
                let row = (i0 * p + i1) * p;
                for i2 in 0..p {
                    lanes[i2 * p + i0] = data[row + i2];
                }
            }
            plan.process_with_scratch(lanes, &mut ws.scratch);
            for i0 in 0..p {
                let row = (i0 * p + i1) * p;
                for i2 in 0..p {
                    data[row + i2] = lanes[i2 * p + i0];
                }
            }
        }
    }
}
