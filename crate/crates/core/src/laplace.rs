//! Zero-mean Laplace sampling by inverse CDF.

use rand::Rng;

use crate::error::{Error, Result};

/// Maps a uniform `u` in (0, 1) to a Laplace(0, `scale`) draw:
/// `x = -scale * sign(u - 1/2) * ln(1 - 2|u - 1/2|)`.
pub fn laplace_from_uniform(u: f64, scale: f64) -> f64 {
    let c = u - 0.5;
    if c == 0.0 {
        return 0.0;
    }
    -scale * c.signum() * (1.0 - 2.0 * c.abs()).ln()
}

/// Uniform draw from the open interval (0, 1).
pub(crate) fn open_unit<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    loop {
        let u: f64 = rng.random();
        if u > 0.0 {
            return u;
        }
    }
}

pub fn laplace_sample<R: Rng + ?Sized>(scale: f64, rng: &mut R) -> Result<f64> {
    if !(scale > 0.0) || !scale.is_finite() {
        return Err(Error::param(format!(
            "laplace scale must be positive and finite, got {scale}"
        )));
    }
    Ok(laplace_from_uniform(open_unit(rng), scale))
}

/// Log-density of Laplace(`center`, `scale`) at `x`.
pub fn laplace_log_density(x: f64, center: f64, scale: f64) -> f64 {
    -(2.0 * scale).ln() - (x - center).abs() / scale
}
