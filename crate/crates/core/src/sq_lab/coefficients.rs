use crate::error::{Error, Result};
use crate::hermite::{hermite_table, HermiteDegree};
use crate::normal::gaussian_cdf;

/// `E[sign(z − t)] = 1 − 2Φ(t)`, the degree-zero coefficient.
pub fn sign_mean(t: f64) -> f64 {
    1.0 - 2.0 * gaussian_cdf(t)
}

/// `c_i = E_{z∼N}[sign(z − t)·He_i(z)]`.
///
/// For `i ≥ 1` this is `2∫_t^∞ He_i φ = √(2/π)·He_{i−1}(t)·e^{−t²/2}/√i`;
/// degree zero is the mean `1 − 2Φ(t)`.
pub fn sign_hermite_coeff(i: impl Into<HermiteDegree>, t: f64) -> f64 {
    let HermiteDegree(i) = i.into();
    if i == 0 {
        return sign_mean(t);
    }
    let h = crate::hermite::hermite_normalized(i - 1, t);
    coeff_from_hermite(i, h, t)
}

#[inline]
fn coeff_from_hermite(i: usize, he_prev: f64, t: f64) -> f64 {
    (2.0 / std::f64::consts::PI).sqrt() * he_prev * (-0.5 * t * t).exp() / (i as f64).sqrt()
}

/// Truncated `Σ_{i≥1} cos^i θ · c_i²` with a rigorous tail bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesValue {
    pub value: f64,
    /// Number of terms summed.
    pub terms: usize,
    /// `|cos θ|^{k+1}·(1 − Σ_{i≤k} c_i²)` after `k` terms: Parseval gives
    /// `Σ_{i≥0} c_i² = E[sign²] = 1`, so the remaining coefficients carry
    /// at most the missing mass.
    pub tail_bound: f64,
}

/// `E[f_v f_u] − E[f_v]E[f_u]` for unit vectors at angle `θ`, through
/// the Hermite series.
///
/// Summation stops at `kmax` terms or once
/// `|cos θ|^k · max_{i≤k} c_i² < 1e−12 · |running sum|`.
pub fn pair_correlation_series(theta: f64, t: f64, kmax: usize) -> Result<SeriesValue> {
    if !(0.0..=std::f64::consts::PI).contains(&theta) {
        return Err(Error::domain(format!("theta must lie in [0, π], got {theta}")));
    }
    if kmax == 0 {
        return Err(Error::domain("kmax must be at least 1"));
    }
    if !t.is_finite() {
        return Err(Error::domain(format!("threshold must be finite, got {t}")));
    }
    let rho = theta.cos();
    let he = hermite_table(kmax - 1, t);
    let c0 = sign_mean(t);
    let mut mass = c0 * c0;
    let mut sum = 0.0;
    let mut power = 1.0;
    let mut max_sq: f64 = 0.0;
    let mut terms = 0;
    for i in 1..=kmax {
        let c = coeff_from_hermite(i, he[i - 1], t);
        let sq = c * c;
        power *= rho;
        sum += power * sq;
        mass += sq;
        max_sq = max_sq.max(sq);
        terms = i;
        if power.abs() * max_sq < 1e-12 * sum.abs() || power == 0.0 {
            break;
        }
    }
    let tail_bound = rho.abs().powi(terms as i32 + 1) * (1.0 - mass).max(0.0);
    Ok(SeriesValue {
        value: sum,
        terms,
        tail_bound,
    })
}

/// `4|cot θ|·e^{−t²}·e^{|cos θ| t²}`; zero at `θ = π/2`.
pub fn correlation_bound(theta: f64, t: f64) -> Result<f64> {
    if !(theta > 0.0 && theta < std::f64::consts::PI) {
        return Err(Error::domain(format!(
            "correlation bound diverges at theta = {theta}; need 0 < theta < π"
        )));
    }
    let c = theta.cos();
    if c.abs() < 1e-15 {
        return Ok(0.0);
    }
    let cot = c / theta.sin();
    Ok(4.0 * cot.abs() * (-t * t).exp() * (c.abs() * t * t).exp())
}
