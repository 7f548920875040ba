//! Collision kernels `B(r, cos θ)`.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

type KernelFn = dyn Fn(f64, f64) -> f64 + Send + Sync;

/// User-supplied kernel. It must state whether it depends on the deviation angle.
#[derive(Clone)]
pub struct CustomKernel {
    name: String,
    angle_independent: bool,
    eval: Arc<KernelFn>,
}

impl CustomKernel {
    pub fn new(
        name: impl Into<String>,
        angle_independent: bool,
        eval: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            name: name.into(),
            angle_independent,
            eval: Arc::new(eval),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }
}

impl fmt::Debug for CustomKernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomKernel")
            .field("name", &self.name)
            .field("angle_independent", &self.angle_independent)
            .finish_non_exhaustive()
    }
}

#[derive(Debug, Clone)]
pub enum CollisionKernel {
    /// Variable hard sphere: `b r^γ`.
    Vhs { b: f64, gamma: f64 },
    /// Variable soft sphere: `b r^γ (1 + cos θ)^η`.
    Vss { b: f64, gamma: f64, eta: f64 },
    Custom(CustomKernel),
}

impl CollisionKernel {
    pub fn vhs(b: f64, gamma: f64) -> Result<Self> {
        if !(b > 0.0 && b.is_finite()) {
            return Err(Error::config(format!("VHS prefactor must be positive, got {b}")));
        }
        if !(0.0..=1.0).contains(&gamma) {
            return Err(Error::config(format!("VHS exponent must lie in [0, 1], got {gamma}")));
        }
        Ok(Self::Vhs { b, gamma })
    }

    pub fn vss(b: f64, gamma: f64, eta: f64) -> Result<Self> {
        if !(b > 0.0 && b.is_finite()) {
            return Err(Error::config(format!("VSS prefactor must be positive, got {b}")));
        }
        if !(gamma >= 0.0 && gamma.is_finite() && eta >= 0.0 && eta.is_finite()) {
            return Err(Error::config(format!(
                "VSS exponents must be non-negative, got gamma = {gamma}, eta = {eta}"
            )));
        }
        Ok(Self::Vss { b, gamma, eta })
    }

    /// Maxwell molecules, `B = 1/(4π)`.
    pub fn maxwell() -> Self {
        Self::Vhs {
            b: 1.0 / (4.0 * std::f64::consts::PI),
            gamma: 0.0,
        }
    }

    /// Hard spheres, `B = r/(4π)`.
    pub fn hard_sphere() -> Self {
        Self::Vhs {
            b: 1.0 / (4.0 * std::f64::consts::PI),
            gamma: 1.0,
        }
    }

    pub fn is_angle_independent(&self) -> bool {
        match self {
            Self::Vhs { .. } => true,
            Self::Vss { .. } => false,
            Self::Custom(c) => c.angle_independent,
        }
    }

    pub fn eval(&self, r: f64, cos_theta: f64) -> Result<f64> {
        if !(r >= 0.0) {
            return Err(Error::Domain(format!("relative speed must be non-negative, got {r}")));
        }
        if !(-1.0..=1.0).contains(&cos_theta) {
            return Err(Error::Domain(format!(
                "cos(theta) must lie in [-1, 1], got {cos_theta}"
            )));
        }
        Ok(self.eval_unchecked(r, cos_theta))
    }

    /// Evaluation without argument checks; `cos_theta` is clamped to `[-1, 1]`.
    pub(crate) fn eval_unchecked(&self, r: f64, cos_theta: f64) -> f64 {
        let c = cos_theta.clamp(-1.0, 1.0);
        match *self {
            Self::Vhs { b, gamma } => b * speed_power(r, gamma),
            Self::Vss { b, gamma, eta } => b * speed_power(r, gamma) * (1.0 + c).powf(eta),
            Self::Custom(ref k) => (k.eval)(r, c),
        }
    }

    /// Stable textual descriptor, e.g. `vhs:gamma=0,b=0.0795...`.
    pub fn descriptor(&self) -> String {
        match self {
            Self::Vhs { b, gamma } => format!("vhs:gamma={gamma},b={b}"),
            Self::Vss { b, gamma, eta } => format!("vss:gamma={gamma},eta={eta},b={b}"),
            Self::Custom(c) => format!("custom:{}", c.name),
        }
    }
}

/// `r^γ` with the continuous extension `0^γ = 0` for `γ > 0` and `0^0 = 1`.
fn speed_power(r: f64, gamma: f64) -> f64 {
    if gamma == 0.0 {
        1.0
    } else {
        r.powf(gamma)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    #[test]
    fn maxwell_is_constant() {
        let k = CollisionKernel::maxwell();
        for (r, c) in [(0.0, -1.0), (1.0, 0.3), (7.5, 1.0)] {
            assert_eq!(k.eval(r, c).unwrap(), 1.0 / (4.0 * PI));
        }
    }

    #[test]
    fn hard_sphere_value() {
        let k = CollisionKernel::hard_sphere();
        assert!((k.eval(2.0, 0.1).unwrap() - 1.0 / (2.0 * PI)).abs() < 1e-16);
        assert_eq!(k.eval(0.0, 0.1).unwrap(), 0.0);
    }

    #[test]
    fn argon_vss_value() {
        let k = CollisionKernel::vss(1.0 / (4.0 * PI), 0.38, 0.4).unwrap();
        let want = 2f64.powf(0.4) / (4.0 * PI);
        assert!((k.eval(1.0, 1.0).unwrap() - want).abs() < 1e-16);
        assert!(!k.is_angle_independent());
    }

    #[test]
    fn domain_errors() {
        let k = CollisionKernel::maxwell();
        assert!(matches!(k.eval(1.0, 1.5), Err(Error::Domain(_))));
        assert!(matches!(k.eval(-1.0, 0.0), Err(Error::Domain(_))));
        assert!(CollisionKernel::vhs(1.0, 1.5).is_err());
        assert!(CollisionKernel::vss(-1.0, 0.5, 0.1).is_err());
    }

    #[test]
    fn custom_kernel_flag() {
        let k = CollisionKernel::Custom(CustomKernel::new("flat", true, |_, _| 0.25));
        assert!(k.is_angle_independent());
        assert_eq!(k.eval(3.0, -0.5).unwrap(), 0.25);
    }

    proptest! {
        #[test]
        fn vss_without_angle_term_is_vhs(r in 0.0f64..20.0, c in -1.0f64..=1.0, g in 0.0f64..=1.0) {
            let b = 0.3;
            let vss = CollisionKernel::vss(b, g, 0.0).unwrap();
            let vhs = CollisionKernel::vhs(b, g).unwrap();
            prop_assert_eq!(vss.eval(r, c).unwrap(), vhs.eval(r, c).unwrap());
        }

        #[test]
        fn kernels_are_non_negative(r in 0.0f64..20.0, c in -1.0f64..=1.0, g in 0.0f64..=1.0, e in 0.0f64..2.0) {
            prop_assert!(CollisionKernel::vhs(0.1, g).unwrap().eval(r, c).unwrap() >= 0.0);
            prop_assert!(CollisionKernel::vss(0.1, g, e).unwrap().eval(r, c).unwrap() >= 0.0);
        }

        #[test]
        fn maxwell_ignores_speed(r in 0.0f64..50.0) {
            let k = CollisionKernel::vhs(0.7, 0.0).unwrap();
            prop_assert_eq!(k.eval(r, 0.0).unwrap(), 0.7);
        }
    }
}
