use crate::error::{Error, Result};

/// Gauss-Legendre nodes and weights on an interval `[a, b]`.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    lower: f64,
    upper: f64,
}

impl RadialRule {
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn interval(&self) -> (f64, f64) {
        (self.lower, self.upper)
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.nodes.iter().copied().zip(self.weights.iter().copied())
    }
}

/// `P_n(x)` and `P_n'(x)` by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let n_f = n as f64;
    let dp = n_f * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// `n`-point Gauss-Legendre rule mapped from `[-1, 1]` to `[a, b]`.
pub fn gauss_legendre(n: usize, a: f64, b: f64) -> Result<RadialRule> {
    if n == 0 {
        return Err(Error::config("Gauss-Legendre rule needs at least one node"));
    }
    if !(a.is_finite() && b.is_finite() && a < b) {
        return Err(Error::config(format!(
            "Gauss-Legendre interval [{a}, {b}] is empty or non-finite"
        )));
    }
    let mut reference = vec![(0.0, 0.0); n];
    if n == 1 {
        reference[0] = (0.0, 2.0);
    } else {
        let n_f = n as f64;
        // Roots come in ± pairs; solve for the positive half by Newton's method.
        for i in 0..(n + 1) / 2 {
            let mut x =
                (std::f64::consts::PI * (i as f64 + 0.75) / (n_f + 0.5)).cos();
            for _ in 0..100 {
                let (p, dp) = legendre(n, x);
                let dx = p / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, dp) = legendre(n, x);
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            reference[i] = (-x, w);
            reference[n - 1 - i] = (x, w);
        }
        if n % 2 == 1 {
            reference[n / 2].0 = 0.0;
        }
    }
    let half = 0.5 * (b - a);
    let mid = 0.5 * (b + a);
    let (nodes, weights) = reference
        .into_iter()
        .map(|(x, w)| (mid + half * x, half * w))
        .unzip();
    Ok(RadialRule {
        nodes,
        weights,
        lower: a,
        upper: b,
    })
}
