use std::f64::consts::PI;

use super::{gauss_legendre, SphereRule};
use crate::error::{Error, Result};

/// Product rule with `n_azimuth` uniform azimuthal nodes and `n_polar`
/// Gauss-Legendre nodes in the polar cosine. The `sin φ₂` Jacobian is absorbed
/// by integrating in `cos φ₂`.
pub fn tensor_sphere(n_azimuth: usize, n_polar: usize) -> Result<SphereRule> {
    if n_azimuth == 0 || n_polar == 0 {
        return Err(Error::config("tensor sphere rule needs at least one node per direction"));
    }
    let polar = gauss_legendre(n_polar, -1.0, 1.0)?;
    let dphi = 2.0 * PI / n_azimuth as f64;
    let mut points = Vec::with_capacity(n_azimuth * n_polar);
    let mut weights = Vec::with_capacity(n_azimuth * n_polar);
    for (cos_t, w_t) in polar.iter() {
        let sin_t = (1.0 - cos_t * cos_t).max(0.0).sqrt();
        for j in 0..n_azimuth {
            let phi = j as f64 * dphi;
            points.push([sin_t * phi.cos(), sin_t * phi.sin(), cos_t]);
            weights.push(w_t * dphi);
        }
    }
    let degree = (n_azimuth - 1).min(2 * n_polar - 1);
    Ok(SphereRule::from_parts(
        points,
        weights,
        degree,
        format!("tensor-{n_azimuth}x{n_polar}"),
    ))
}
