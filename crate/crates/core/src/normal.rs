//! Standard normal density, distribution function and quantile.
//!
//! `Φ` is evaluated through the complementary error function of the
//! `libm` crate (a port of the FreeBSD msun rational approximations,
//! accurate to below one ulp), so `Φ(x) = erfc(−x/√2)/2` keeps full
//! relative precision in the lower tail. The quantile starts from the
//! Abramowitz–Stegun 26.2.23 rational guess and is polished by Halley
//! steps on `Φ`.

use std::f64::consts::{PI, SQRT_2};

use crate::error::{Error, Result};

/// `1/√(2π)`.
pub const FRAC_1_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// Beyond this magnitude `Φ` saturates to exactly 0 or 1.
const SATURATION: f64 = 40.0;

#[inline]
pub fn gaussian_pdf(x: f64) -> f64 {
    FRAC_1_SQRT_2PI * (-0.5 * x * x).exp()
}

/// `Φ(x)`, the standard normal distribution function.
#[inline]
pub fn gaussian_cdf(x: f64) -> f64 {
    if x <= -SATURATION {
        0.0
    } else if x >= SATURATION {
        1.0
    } else {
        0.5 * libm::erfc(-x / SQRT_2)
    }
}

/// Upper tail `1 − Φ(x) = Φ(−x)`.
#[inline]
pub fn gaussian_sf(x: f64) -> f64 {
    gaussian_cdf(-x)
}

/// `Φ⁻¹(p)` for `p ∈ (0, 1)`.
pub fn gaussian_quantile(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::domain(format!("quantile requires 0 < p < 1, got {p}")));
    }
    if p == 0.5 {
        return Ok(0.0);
    }
    // Work in the lower tail where Φ has full relative precision.
    let (q, upper) = if p < 0.5 { (p, false) } else { (1.0 - p, true) };
    let x = lower_tail_quantile(q);
    Ok(if upper { -x } else { x })
}

fn lower_tail_quantile(q: f64) -> f64 {
    const C: [f64; 3] = [2.515_517, 0.802_853, 0.010_328];
    const D: [f64; 3] = [1.432_788, 0.189_269, 0.001_308];
    let s = (-2.0 * q.ln()).sqrt();
    let mut x = -(s - (C[0] + C[1] * s + C[2] * s * s) / (1.0 + D[0] * s + D[1] * s * s + D[2] * s * s * s));
    for _ in 0..8 {
        let err = gaussian_cdf(x) - q;
        // Scaled Newton correction err/φ(x); the exponent stays below the
        // overflow limit for every q representable as a normal double.
        let u = err * (2.0 * PI).sqrt() * (0.5 * x * x).exp();
        if !u.is_finite() {
            break;
        }
        let dx = u / (1.0 + 0.5 * x * u);
        x -= dx;
        if dx.abs() <= 1e-15 * x.abs().max(1.0) {
            break;
        }
    }
    x
}
