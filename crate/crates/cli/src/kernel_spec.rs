//! Text form of a collision kernel: `vhs:gamma=G,b=B` or `vss:gamma=G,eta=E,b=B`.
//!
//! Omitted parameters default to `gamma = 0`, `eta = 0`, `b = 1/(4π)`.

use std::fmt;
use std::str::FromStr;

use boltzmann_spectral::CollisionKernel;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

pub const DEFAULT_B: f64 = 1.0 / (4.0 * std::f64::consts::PI);

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KernelSpec {
    Vhs { gamma: f64, b: f64 },
    Vss { gamma: f64, eta: f64, b: f64 },
}

impl KernelSpec {
    pub fn maxwell() -> Self {
        KernelSpec::Vhs { gamma: 0.0, b: DEFAULT_B }
    }

    pub fn hard_sphere() -> Self {
        KernelSpec::Vhs { gamma: 1.0, b: DEFAULT_B }
    }

    /// The argon-like soft sphere `γ = 0.38`, `η = 0.4`.
    pub fn argon() -> Self {
        KernelSpec::Vss {
            gamma: 0.38,
            eta: 0.4,
            b: DEFAULT_B,
        }
    }

    pub fn build(&self) -> boltzmann_spectral::Result<CollisionKernel> {
        match *self {
            KernelSpec::Vhs { gamma, b } => CollisionKernel::vhs(b, gamma),
            KernelSpec::Vss { gamma, eta, b } => CollisionKernel::vss(b, gamma, eta),
        }
    }
}

impl fmt::Display for KernelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // `{}` on f64 prints the shortest string that parses back exactly.
        match self {
            KernelSpec::Vhs { gamma, b } => write!(f, "vhs:gamma={gamma},b={b}"),
            KernelSpec::Vss { gamma, eta, b } => write!(f, "vss:gamma={gamma},eta={eta},b={b}"),
        }
    }
}

impl FromStr for KernelSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (family, params) = s.split_once(':').unwrap_or((s, ""));
        let allowed: &[&str] = match family.trim() {
            "vhs" => &["gamma", "b"],
            "vss" => &["gamma", "eta", "b"],
            other => return Err(format!("unknown kernel family '{other}' (expected vhs or vss)")),
        };
        let (mut gamma, mut eta, mut b) = (0.0, 0.0, DEFAULT_B);
        for item in params.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (key, value) = item
                .split_once('=')
                .ok_or_else(|| format!("kernel parameter '{item}' is not key=value"))?;
            let key = key.trim();
            if !allowed.contains(&key) {
                return Err(format!("kernel {family} has no parameter '{key}'"));
            }
            let value: f64 = value
                .trim()
                .parse()
                .map_err(|_| format!("kernel parameter {key}: '{}' is not a number", value.trim()))?;
            match key {
                "gamma" => gamma = value,
                "eta" => eta = value,
                _ => b = value,
            }
        }
        let spec = if family.trim() == "vhs" {
            KernelSpec::Vhs { gamma, b }
        } else {
            KernelSpec::Vss { gamma, eta, b }
        };
        spec.build().map_err(|e| e.to_string())?;
        Ok(spec)
    }
}

impl Serialize for KernelSpec {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for KernelSpec {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}
