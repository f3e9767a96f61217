use crate::error::{Error, Result};
use crate::normal::{gaussian_pdf, gaussian_sf};
use crate::quadrature::GaussLegendre;
use crate::synthetic::check_eta;

use super::coefficients::{pair_correlation_series, sign_mean};

/// Relative slack allowed when comparing χ values with their bounds.
pub const CHI_TOLERANCE: f64 = 0.05;

const NODES: usize = 20;
const PANELS: usize = 64;

/// Pairwise correlations of the noisy hard distributions relative to the
/// product of the Gaussian and the label marginal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChiCorrelation {
    pub chi_pair: f64,
    pub chi_self: f64,
    /// Hermite-series covariance `E[f_v f_u] − E[f_v]E[f_u]`.
    pub cov: f64,
    /// The same covariance from the quadrature joint tail.
    pub cov_quadrature: f64,
    /// `2(1−2η)·cov`.
    pub pair_bound: f64,
    /// `(1−2η)·Var(f)` with `Var(f) = 1 − E[f]²`.
    pub self_bound: f64,
    pub pair_within_bound: bool,
    pub self_within_bound: bool,
}

/// `P[v·x > t, u·x > t] = ∫_t^∞ φ(x)·Φ̄((t − x cos θ)/sin θ) dx` by
/// composite Gauss–Legendre, checked against a doubled panel count.
fn joint_tail(theta: f64, t: f64) -> Result<f64> {
    let (s, c) = theta.sin_cos();
    let gl = GaussLegendre::new(NODES);
    let f = |x: f64| gaussian_pdf(x) * gaussian_sf((t - c * x) / s);
    let upper = t.max(0.0) + 40.0;
    let coarse = gl.integrate_composite(t, upper, PANELS, f);
    let fine = gl.integrate_composite(t, upper, 2 * PANELS, f);
    if !((coarse - fine).abs() <= 1e-12 + 1e-9 * fine.abs()) {
        return Err(Error::Numeric(format!(
            "joint-tail quadrature did not converge at theta={theta}, t={t}: {coarse} vs {fine}"
        )));
    }
    Ok(fine)
}

/// χ-correlation of two hard distributions whose directions meet at angle
/// `θ`, for `f_v(x) = sign(v·x − t)` and labels flipped at rate η.
///
/// With `p = Φ(−t)` and `q = η + (1−2η)p = P[y = 1]`, the label-conditional
/// density ratios are `a_v = (η + (1−2η)1{f_v = 1})/q` and
/// `b_v = (1 − η − (1−2η)1{f_v = 1})/(1 − q)`, so
/// `χ = q·E[a_v a_u] + (1−q)·E[b_v b_u] − 1` needs only the joint tail.
pub fn chi_correlation(theta: f64, t: f64, eta: f64) -> Result<ChiCorrelation> {
    if !(theta > 0.0 && theta < std::f64::consts::PI) {
        return Err(Error::domain(format!("theta must lie in (0, π), got {theta}")));
    }
    check_eta(eta)?;
    if !t.is_finite() {
        return Err(Error::domain(format!("threshold must be finite, got {t}")));
    }
    let a = 1.0 - 2.0 * eta;
    let p = gaussian_sf(t);
    let q = eta + a * p;
    let chi = |both: f64| {
        let aa = (eta * eta + 2.0 * eta * a * p + a * a * both) / (q * q);
        let bb = ((1.0 - eta).powi(2) - 2.0 * (1.0 - eta) * a * p + a * a * both) / ((1.0 - q) * (1.0 - q));
        q * aa + (1.0 - q) * bb - 1.0
    };
    let both = joint_tail(theta, t)?;
    let chi_pair = chi(both);
    let chi_self = chi(p);

    let cov = pair_correlation_series(theta, t, 400)?.value;
    let cov_quadrature = 4.0 * (both - p * p);
    let mean = sign_mean(t);
    let pair_bound = 2.0 * a * cov;
    let self_bound = a * (1.0 - mean * mean);
    let slack = |bound: f64| bound + CHI_TOLERANCE * bound.abs() + 1e-12;
    Ok(ChiCorrelation {
        chi_pair,
        chi_self,
        cov,
        cov_quadrature,
        pair_bound,
        self_bound,
        pair_within_bound: chi_pair <= slack(pair_bound),
        self_within_bound: chi_self <= slack(self_bound),
    })
}
