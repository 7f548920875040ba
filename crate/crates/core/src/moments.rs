//! Rectangle-rule moments and the entropy diagnostic.

use crate::grid::DistributionFunction;

/// Macroscopic quantities of a distribution.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MomentSet {
    pub density: f64,
    pub velocity: [f64; 3],
    /// `None` when the density is not positive.
    pub temperature: Option<f64>,
    /// Momentum flow `P_ij = ∫ f v_i v_j dv`.
    pub momentum_flow: [[f64; 3]; 3],
    /// Energy flow `q_i = ½ ∫ f v_i |v|² dv`.
    pub energy_flow: [f64; 3],
}

impl MomentSet {
    /// `∫ f |v|² dv`, the trace of the momentum flow tensor.
    pub fn energy(&self) -> f64 {
        (0..3).map(|i| self.momentum_flow[i][i]).sum()
    }
}

/// Raw rectangle-rule integrals `∫ f φ dv` for `φ = 1, v, |v|²`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct InvariantIntegrals {
    pub mass: f64,
    pub momentum: [f64; 3],
    pub energy: f64,
}

impl InvariantIntegrals {
    pub fn momentum_norm(&self) -> f64 {
        self.momentum.iter().map(|m| m * m).sum::<f64>().sqrt()
    }
}

pub fn moments(f: &DistributionFunction) -> MomentSet {
    let grid = f.grid();
    let nodes = grid.nodes();
    let dv = grid.cell_volume();
    let mut mass = 0.0;
    let mut first = [0.0; 3];
    let mut second = [[0.0; 3]; 3];
    let mut third = [0.0; 3];
    for ((a, b, c), &w) in f.values().indexed_iter() {
        let v = [nodes[a], nodes[b], nodes[c]];
        let v2 = v[0] * v[0] + v[1] * v[1] + v[2] * v[2];
        mass += w;
        for i in 0..3 {
            first[i] += w * v[i];
            third[i] += w * v[i] * v2;
            for j in i..3 {
                second[i][j] += w * v[i] * v[j];
            }
        }
    }
    for i in 0..3 {
        for j in 0..i {
            second[i][j] = second[j][i];
        }
    }
    let density = mass * dv;
    let mut momentum_flow = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            momentum_flow[i][j] = second[i][j] * dv;
        }
    }
    let energy_flow = third.map(|t| 0.5 * t * dv);
    let (velocity, temperature) = if density > 0.0 {
        let u = first.map(|m| m * dv / density);
        // ∫ f |v - u|² = ∫ f |v|² - ρ |u|²
        let trace: f64 = (0..3).map(|i| momentum_flow[i][i]).sum();
        let u2: f64 = u.iter().map(|x| x * x).sum();
        (u, Some((trace - density * u2) / (3.0 * density)))
    } else {
        ([0.0; 3], None)
    };
    MomentSet {
        density,
        velocity,
        temperature,
        momentum_flow,
        energy_flow,
    }
}

/// Integrals of the collision invariants against `f`, without normalization.
/// Used on collision-operator outputs, whose mass is not positive.
pub fn invariant_integrals(f: &DistributionFunction) -> InvariantIntegrals {
    let grid = f.grid();
    let nodes = grid.nodes();
    let dv = grid.cell_volume();
    let mut out = InvariantIntegrals::default();
    for ((a, b, c), &w) in f.values().indexed_iter() {
        let v = [nodes[a], nodes[b], nodes[c]];
        out.mass += w;
        for i in 0..3 {
            out.momentum[i] += w * v[i];
        }
        out.energy += w * (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
    }
    out.mass *= dv;
    out.energy *= dv;
    for m in &mut out.momentum {
        *m *= dv;
    }
    out
}

/// Relative positivity cutoff for the entropy sum.
pub const ENTROPY_CUTOFF: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Entropy {
    pub value: f64,
    /// Fraction of the absolute mass sitting on nodes below the cutoff.
    pub excluded_mass_fraction: f64,
}

/// `-∫ f ln f dv` over nodes where `f > 1e-14 max f`.
pub fn entropy(f: &DistributionFunction) -> Entropy {
    let max = f.values().iter().fold(0.0f64, |m, &v| m.max(v));
    let cutoff = ENTROPY_CUTOFF * max;
    let mut sum = 0.0;
    let mut excluded = 0.0;
    let mut total = 0.0;
    for &v in f.values() {
        total += v.abs();
        if max > 0.0 && v > cutoff {
            sum -= v * v.ln();
        } else {
            excluded += v.abs();
        }
    }
    Entropy {
        value: sum * f.grid().cell_volume(),
        excluded_mass_fraction: if total > 0.0 { excluded / total } else { 0.0 },
    }
}
