//! Lebedev-Laikov rules on the unit sphere, expanded from their octahedral
//! orbit generators.

#[path = "lebedev_tables.rs"]
mod tables;

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use super::SphereRule;
use crate::error::{Error, Result};

/// Octahedral point classes. The last field of each variant is the weight of
/// every point in the orbit, for a rule normalized to unit total weight.
#[derive(Debug, Clone, Copy)]
pub(crate) enum Orbit {
    /// `(±1, 0, 0)`: 6 points.
    A1(f64),
    /// `(0, ±1/√2, ±1/√2)`: 12 points.
    A2(f64),
    /// `(±1/√3, ±1/√3, ±1/√3)`: 8 points.
    A3(f64),
    /// `(±l, ±l, ±m)` with `m = √(1 - 2l²)`: 24 points.
    B(f64, f64),
    /// `(±p, ±q, 0)` with `q = √(1 - p²)`: 24 points.
    C(f64, f64),
    /// `(±a, ±b, ±c)` with `c = √(1 - a² - b²)`: 48 points.
    D(f64, f64, f64),
}

impl Orbit {
    fn generator(self) -> ([f64; 3], f64, usize) {
        let third = 1.0 / 3f64.sqrt();
        match self {
            Orbit::A1(w) => ([1.0, 0.0, 0.0], w, 6),
            Orbit::A2(w) => ([0.0, FRAC_1_SQRT_2, FRAC_1_SQRT_2], w, 12),
            Orbit::A3(w) => ([third; 3], w, 8),
            Orbit::B(l, w) => ([l, l, (1.0 - 2.0 * l * l).sqrt()], w, 24),
            Orbit::C(p, w) => ([p, (1.0 - p * p).sqrt(), 0.0], w, 24),
            Orbit::D(a, b, w) => ([a, b, (1.0 - a * a - b * b).sqrt()], w, 48),
        }
    }

    /// All distinct signed permutations of the generator.
    fn expand(self, points: &mut Vec<[f64; 3]>, weights: &mut Vec<f64>) {
        const PERMS: [[usize; 3]; 6] = [
            [0, 1, 2],
            [0, 2, 1],
            [1, 0, 2],
            [1, 2, 0],
            [2, 0, 1],
            [2, 1, 0],
        ];
        let (g, w, count) = self.generator();
        let start = points.len();
        for perm in PERMS {
            for signs in 0..8u8 {
                let mut p = [0.0; 3];
                for (axis, &src) in perm.iter().enumerate() {
                    let s = if signs & (1 << axis) != 0 { -1.0 } else { 1.0 };
                    // Keep +0.0 so duplicates compare bitwise-equal below.
                    p[axis] = if g[src] == 0.0 { 0.0 } else { s * g[src] };
                }
                if !points[start..].contains(&p) {
                    points.push(p);
                    weights.push(w);
                }
            }
        }
        debug_assert_eq!(points.len() - start, count, "orbit {self:?}");
    }
}

/// Point counts for which a Lebedev rule is tabulated.
pub const LEBEDEV_POINT_COUNTS: [usize; 9] = [6, 14, 26, 38, 50, 74, 86, 110, 146];

/// The tabulated Lebedev rule with `m` points, weights summing to `4π`.
///
/// The 74-point rule has one negative weight class (the cube vertices); this is
/// a property of the rule itself.
pub fn lebedev(m: usize) -> Result<SphereRule> {
    let Some(&(_, degree, orbits)) = tables::TABLES.iter().find(|(count, _, _)| *count == m) else {
        return Err(Error::config(format!(
            "no Lebedev rule with {m} points; available: {LEBEDEV_POINT_COUNTS:?}"
        )));
    };
    let mut points = Vec::with_capacity(m);
    let mut weights = Vec::with_capacity(m);
    for orbit in orbits {
        orbit.expand(&mut points, &mut weights);
    }
    assert_eq!(points.len(), m, "Lebedev table for {m} points is inconsistent");
    let total: f64 = weights.iter().sum();
    let scale = 4.0 * PI / total;
    for w in &mut weights {
        *w *= scale;
    }
    Ok(SphereRule::from_parts(
        points,
        weights,
        degree,
        format!("lebedev-{m}"),
    ))
}
