use serde::Serialize;

use crate::error::{Error, Result};
use crate::reduce::{map_chunks, tree_combine, CHUNK};
use crate::rng::Seed;
use crate::synthetic::fmt_f64;

use super::coefficients::{correlation_bound, pair_correlation_series, sign_mean};

pub const CORRELATION_CSV_HEADER: &str = "theta,t,series_value,bound_value,mc_estimate,mc_stderr,truncation";

const TAG_MC: u64 = 0x4d43_4f56;

/// One grid point of the correlation table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CorrelationReport {
    pub theta: f64,
    pub t: f64,
    pub series_value: f64,
    pub bound_value: f64,
    pub mc_estimate: Option<f64>,
    pub mc_stderr: Option<f64>,
    /// Tail bound of the truncated series.
    pub truncation: f64,
}

impl CorrelationReport {
    pub fn csv(&self) -> String {
        let opt = |v: Option<f64>| v.map(fmt_f64).unwrap_or_default();
        format!(
            "{},{},{},{},{},{},{}",
            fmt_f64(self.theta),
            fmt_f64(self.t),
            fmt_f64(self.series_value),
            fmt_f64(self.bound_value),
            opt(self.mc_estimate),
            opt(self.mc_stderr),
            fmt_f64(self.truncation)
        )
    }

    /// Whether the series agrees with Monte Carlo within `k` standard errors
    /// (plus the truncation bound). `None` without a Monte Carlo estimate.
    pub fn agrees_within(&self, k: f64) -> Option<bool> {
        let (est, se) = (self.mc_estimate?, self.mc_stderr?);
        Some((self.series_value - est).abs() <= k * se + self.truncation)
    }
}

/// Monte Carlo estimate of `Cov(f_v, f_u)` with its standard error.
///
/// Uses `v = e₁`, `u = cos θ·e₁ + sin θ·e₂` and the exact mean
/// `μ = 1 − 2Φ(t)`, averaging `(f_v − μ)(f_u − μ)`. Chunk `c` draws from
/// substream `seed.derive(TAG_MC, c)`.
pub fn mc_covariance(theta: f64, t: f64, n: usize, seed: Seed) -> Result<(f64, f64)> {
    if n < 2 {
        return Err(Error::domain(format!(
            "Monte Carlo needs at least two samples, got {n}"
        )));
    }
    let (s, c) = theta.sin_cos();
    let mu = sign_mean(t);
    let sign = |z: f64| if z > t { 1.0 } else { -1.0 };
    let chunks = n.div_ceil(CHUNK);
    let parts = map_chunks(chunks, |k| {
        let len = CHUNK.min(n - k * CHUNK);
        let mut g = seed.derive(TAG_MC, k as u64).gaussian_stream();
        let (mut sum, mut sq) = (0.0, 0.0);
        for _ in 0..len {
            let x1 = g.next_normal();
            let x2 = g.next_normal();
            let prod = (sign(x1) - mu) * (sign(c * x1 + s * x2) - mu);
            sum += prod;
            sq += prod * prod;
        }
        (sum, sq)
    });
    let (sum, sq) = tree_combine(parts, |a, b| (a.0 + b.0, a.1 + b.1)).unwrap_or((0.0, 0.0));
    let nf = n as f64;
    let mean = sum / nf;
    let var = ((sq - nf * mean * mean) / (nf - 1.0)).max(0.0);
    Ok((mean, (var / nf).sqrt()))
}

/// Series value, closed-form bound, and optionally a Monte Carlo check
/// with `mc_samples` draws.
pub fn correlation_report(
    theta: f64,
    t: f64,
    kmax: usize,
    mc_samples: Option<usize>,
    seed: Seed,
) -> Result<CorrelationReport> {
    let series = pair_correlation_series(theta, t, kmax)?;
    let bound_value = correlation_bound(theta, t)?;
    let (mc_estimate, mc_stderr) = match mc_samples {
        Some(n) => {
            let (e, se) = mc_covariance(theta, t, n, seed)?;
            (Some(e), Some(se))
        }
        None => (None, None),
    };
    Ok(CorrelationReport {
        theta,
        t,
        series_value: series.value,
        bound_value,
        mc_estimate,
        mc_stderr,
        truncation: series.tail_bound,
    })
}
