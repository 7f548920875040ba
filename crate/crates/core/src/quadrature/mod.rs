//! Radial and spherical quadrature rules.

mod gauss;
mod lebedev;
mod tensor;

pub use gauss::{gauss_legendre, RadialRule};
pub use lebedev::{lebedev, LEBEDEV_POINT_COUNTS};
pub use tensor::tensor_sphere;

/// Nodes `ω_s` on the unit sphere with weights summing to `4π`.
#[derive(Debug, Clone, PartialEq)]
pub struct SphereRule {
    points: Vec<[f64; 3]>,
    weights: Vec<f64>,
    degree: usize,
    label: String,
}

impl SphereRule {
    pub(crate) fn from_parts(
        points: Vec<[f64; 3]>,
        weights: Vec<f64>,
        degree: usize,
        label: String,
    ) -> Self {
        debug_assert_eq!(points.len(), weights.len());
        Self {
            points,
            weights,
            degree,
            label,
        }
    }

    pub fn points(&self) -> &[[f64; 3]] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Number of points `M`.
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Highest total polynomial degree integrated exactly.
    pub fn exactness_degree(&self) -> usize {
        self.degree
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// `Σ_s w_s f(ω_s)`.
    pub fn integrate(&self, f: impl Fn([f64; 3]) -> f64) -> f64 {
        self.points
            .iter()
            .zip(&self.weights)
            .map(|(&p, &w)| w * f(p))
            .sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = ([f64; 3], f64)> + '_ {
        self.points.iter().copied().zip(self.weights.iter().copied())
    }

    /// Groups nodes into antipodal pairs `(s, Some(t))` with `ω_t = -ω_s`;
    /// nodes without a partner come back as `(s, None)`.
    pub fn antipodal_pairs(&self) -> Vec<(usize, Option<usize>)> {
        let mut used = vec![false; self.len()];
        let mut out = Vec::with_capacity(self.len());
        for s in 0..self.len() {
            if used[s] {
                continue;
            }
            used[s] = true;
            let p = self.points[s];
            let partner = (s + 1..self.len()).find(|&t| {
                !used[t] && (0..3).all(|a| (p[a] + self.points[t][a]).abs() < 1e-13)
            });
            if let Some(t) = partner {
                used[t] = true;
            }
            out.push((s, partner));
        }
        out
    }
}

/// Exact `∫_{S²} x^a y^b z^c dω`.
pub fn sphere_monomial_integral(a: u32, b: u32, c: u32) -> f64 {
    if a % 2 == 1 || b % 2 == 1 || c % 2 == 1 {
        return 0.0;
    }
    fn double_factorial(n: i64) -> f64 {
        let mut out = 1.0;
        let mut k = n;
        while k > 1 {
            out *= k as f64;
            k -= 2;
        }
        out
    }
    let (a, b, c) = (a as i64, b as i64, c as i64);
    4.0 * std::f64::consts::PI * double_factorial(a - 1) * double_factorial(b - 1)
        * double_factorial(c - 1)
        / double_factorial(a + b + c + 1)
}
