//! Browser bindings for three small experiments: the angular correlation
//! curve with its bound, the Komatsu sandwich around the Gaussian tail,
//! and an optimizer trace of `sin(θ_k/2)`.
//!
//! Each binding returns a flat `Float64Array`; the row layout is given on
//! the function. The same computations are exposed as plain Rust functions
//! so they can be tested natively.

use hrcn_core::geometry::rotate_toward;
use hrcn_core::normal::gaussian_sf;
use hrcn_core::optimizer::{run, BandParams, OptConfig};
use hrcn_core::sq_lab::{correlation_bound, pair_correlation_series};
use hrcn_core::synthetic::{generate, komatsu_bounds, random_problem};
use hrcn_core::{Error, Result, Seed};
use wasm_bindgen::prelude::*;

/// Largest batch the trace demo will generate.
pub const MAX_TRACE_SAMPLES: usize = 200_000;

fn js(err: Error) -> JsError {
    JsError::new(&err.to_string())
}

/// Rows `(θ, series, bound)` for `points` angles evenly spaced in `(0, π/2]`.
pub fn correlation_rows(t: f64, kmax: usize, points: usize) -> Result<Vec<f64>> {
    if points == 0 {
        return Err(Error::Domain("need at least one point".into()));
    }
    let mut out = Vec::with_capacity(3 * points);
    for i in 1..=points {
        let theta = std::f64::consts::FRAC_PI_2 * i as f64 / points as f64;
        out.push(theta);
        out.push(pair_correlation_series(theta, t, kmax)?.value);
        out.push(correlation_bound(theta, t)?);
    }
    Ok(out)
}

/// Rows `(t, lower, Φ̄(t), upper)` for `points` thresholds in `[0, t_max]`.
pub fn komatsu_rows(t_max: f64, points: usize) -> Result<Vec<f64>> {
    if points < 2 || !(t_max > 0.0 && t_max.is_finite()) {
        return Err(Error::Domain("need t_max > 0 and at least two points".into()));
    }
    let mut out = Vec::with_capacity(4 * points);
    for i in 0..points {
        let t = t_max * i as f64 / (points - 1) as f64;
        let (lo, hi) = komatsu_bounds(t)?;
        out.extend([t, lo, gaussian_sf(t), hi]);
    }
    Ok(out)
}

/// `sin(θ_k/2)` for `k = 0..=steps+1` when the optimizer starts `angle`
/// radians away from a random target, with the true threshold as `t̂` and
/// band width `½ε′e^{t²/2}` at `ε′ = 0.05`.
pub fn trace_rows(d: usize, t: f64, eta: f64, n: usize, steps: usize, angle: f64, seed: u64) -> Result<Vec<f64>> {
    if n > MAX_TRACE_SAMPLES {
        return Err(Error::Budget(format!(
            "at most {MAX_TRACE_SAMPLES} samples in the demo, got {n}"
        )));
    }
    let spec = random_problem(d, t, eta, Seed(seed))?;
    let target = &spec.target.w;
    let direction: Vec<f64> = Seed(seed).derive(1, 0).gaussian_stream().take(d).collect();
    let w0 = rotate_toward(target, &direction, angle)?;
    let batch = generate(&spec, n)?;
    let band = BandParams::new(t, 0.025 * (0.5 * t * t).exp())?;
    let out = run(&w0, &band, eta, &batch, steps, &OptConfig::default(), Some(target))?;
    Ok(out.trace.iter().map(|r| r.sin_half_theta).collect())
}

#[wasm_bindgen]
pub fn correlation_curve(t: f64, kmax: usize, points: usize) -> std::result::Result<Vec<f64>, JsError> {
    correlation_rows(t, kmax, points).map_err(js)
}

#[wasm_bindgen]
pub fn komatsu_curve(t_max: f64, points: usize) -> std::result::Result<Vec<f64>, JsError> {
    komatsu_rows(t_max, points).map_err(js)
}

#[wasm_bindgen]
pub fn optimizer_trace(
    d: usize,
    t: f64,
    eta: f64,
    n: usize,
    steps: usize,
    angle: f64,
    seed: u64,
) -> std::result::Result<Vec<f64>, JsError> {
    trace_rows(d, t, eta, n, steps, angle, seed).map_err(js)
}
