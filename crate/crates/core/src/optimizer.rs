//! Band-restricted Riemannian subgradient descent on the unit sphere.
//!
//! For a threshold guess `t̂` and band width `γ̂`, only samples with
//! `−t̂ ≤ w·x ≤ −t̂ + γ̂` contribute to the gradient. Each contributes
//! `½(a·sign(w·x + t̂) − y)·proj_{w⊥}(x)` where `a = 1−2η` by default.
//! The iterate moves against the gradient, is renormalized, and the step
//! size shrinks geometrically by `1 − ρ`.

use serde::Serialize;

use crate::error::{check_dim, Error, Result};
use crate::geometry::{axpy, dot, project_orthogonal, sin_half_angle, UnitVector};
use crate::normal::gaussian_cdf;
use crate::reduce::{add_vecs, map_chunks, tree_combine, CHUNK};
use crate::synthetic::Dataset;

/// Step-size decay used throughout.
pub const RHO: f64 = 0.00098;

/// Default upper limit on the iteration count.
pub const DEFAULT_ITERATION_CAP: usize = 5000;

/// `Φ(−t̂ + γ̂) − Φ(−t̂)`.
pub fn band_probability(t_hat: f64, gamma_hat: f64) -> Result<f64> {
    if !(gamma_hat >= 0.0) {
        return Err(Error::domain(format!("band width must be >= 0, got {gamma_hat}")));
    }
    Ok(gaussian_cdf(-t_hat + gamma_hat) - gaussian_cdf(-t_hat))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BandParams {
    pub t_hat: f64,
    pub gamma_hat: f64,
    pub band_mass: f64,
}

impl BandParams {
    pub fn new(t_hat: f64, gamma_hat: f64) -> Result<Self> {
        let band_mass = band_probability(t_hat, gamma_hat)?;
        if !(band_mass > 0.0) {
            return Err(Error::Numeric(format!(
                "band [{}, {}] has zero Gaussian mass",
                -t_hat,
                -t_hat + gamma_hat
            )));
        }
        Ok(Self {
            t_hat,
            gamma_hat,
            band_mass,
        })
    }

    #[inline]
    pub fn contains(&self, projection: f64) -> bool {
        projection >= -self.t_hat && projection <= -self.t_hat + self.gamma_hat
    }
}

/// Which noise factor multiplies `sign(w·x + t̂)` in the subgradient.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Coefficient {
    /// `1 − 2η`, the factor for which `E[y | x]` matches the clean label.
    #[default]
    OneMinusTwoEta,
    /// `1 − η`, an alternative factor kept for comparison runs.
    OneMinusEta,
}

impl Coefficient {
    pub fn factor(self, eta: f64) -> f64 {
        match self {
            Coefficient::OneMinusTwoEta => 1.0 - 2.0 * eta,
            Coefficient::OneMinusEta => 1.0 - eta,
        }
    }
}

/// `½((1−2η)·sign(w·x + t̂) − y)·proj_{w⊥}(x)` with `sign(0) = +1`.
pub fn subgradient(w: &UnitVector, t_hat: f64, eta: f64, x: &[f64], y: i8) -> Result<Vec<f64>> {
    subgradient_with(Coefficient::OneMinusTwoEta, w, t_hat, eta, x, y)
}

pub fn subgradient_with(
    coefficient: Coefficient,
    w: &UnitVector,
    t_hat: f64,
    eta: f64,
    x: &[f64],
    y: i8,
) -> Result<Vec<f64>> {
    check_dim(w.dim(), x.len())?;
    let sign = if w.dot(x) + t_hat >= 0.0 { 1.0 } else { -1.0 };
    let c = 0.5 * (coefficient.factor(eta) * sign - f64::from(y));
    let mut p = project_orthogonal(x, w)?;
    p.iter_mut().for_each(|v| *v *= c);
    Ok(p)
}

#[derive(Debug, Clone, PartialEq)]
pub struct GradientEstimate {
    pub grad: Vec<f64>,
    /// Number of batch samples that fell inside the band.
    pub in_band: usize,
}

impl GradientEstimate {
    /// No sample fell inside the band; the gradient is the zero vector.
    pub fn empty_band(&self) -> bool {
        self.in_band == 0
    }
}

/// Band-conditioned mean subgradient, `(1/N)Σ g_i·1{x_i ∈ band}/P`.
///
/// Every in-band sample has `w·x + t̂ ≥ 0`, so its coefficient is
/// `½(a − y)`. The projection is linear and is applied once to the sum.
pub fn empirical_gradient(
    w: &UnitVector,
    band: &BandParams,
    eta: f64,
    batch: &Dataset,
    coefficient: Coefficient,
) -> Result<GradientEstimate> {
    if batch.is_empty() {
        return Err(Error::domain("gradient batch is empty"));
    }
    check_dim(w.dim(), batch.dim())?;
    let a = coefficient.factor(eta);
    let n = batch.len();
    let parts = map_chunks(n.div_ceil(CHUNK), |c| {
        let mut acc = vec![0.0; w.dim()];
        let mut count = 0usize;
        for i in c * CHUNK..((c + 1) * CHUNK).min(n) {
            let x = batch.x(i);
            if band.contains(dot(w.as_slice(), x)) {
                count += 1;
                let coef = 0.5 * (a - f64::from(batch.y(i)));
                if coef != 0.0 {
                    axpy(coef, x, &mut acc);
                }
            }
        }
        (acc, count)
    });
    let (sum, in_band) = tree_combine(parts, |(a, ca), (b, cb)| (add_vecs(a, b), ca + cb))
        .expect("nonempty batch has at least one chunk");
    let mut grad = project_orthogonal(&sum, w)?;
    let scale = 1.0 / (n as f64 * band.band_mass);
    grad.iter_mut().for_each(|g| *g *= scale);
    Ok(GradientEstimate { grad, in_band })
}

/// Iterate, iteration counter and current step size.
#[derive(Debug, Clone, PartialEq)]
pub struct OptState {
    pub w: UnitVector,
    pub k: usize,
    pub mu: f64,
}

/// `μ₀ = (1−4ρ)√(2π)/(16(1−2η))`.
pub fn initial_step_size(eta: f64, rho: f64) -> f64 {
    (1.0 - 4.0 * rho) * (2.0 * std::f64::consts::PI).sqrt() / (16.0 * (1.0 - 2.0 * eta))
}

/// `w ← normalize(w − μ·grad)`, `k ← k+1`, `μ ← μ(1−ρ)`.
pub fn step(state: &OptState, grad: &[f64], rho: f64) -> Result<OptState> {
    check_dim(state.w.dim(), grad.len())?;
    let along = state.w.dot(grad);
    let scale = crate::geometry::norm(grad).max(1.0);
    if along.abs() > 1e-8 * scale {
        return Err(Error::domain(format!(
            "gradient is not tangent to the sphere (w·g = {along:e})"
        )));
    }
    let mut next = state.w.as_slice().to_vec();
    axpy(-state.mu, grad, &mut next);
    // ‖w − μg‖² = 1 + μ²‖g‖² ≥ 1 for tangent g, so normalization cannot fail.
    let w = UnitVector::new(next).expect("tangent update has norm at least one");
    Ok(OptState {
        w,
        k: state.k + 1,
        mu: state.mu * (1.0 - rho),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OptConfig {
    pub rho: f64,
    pub iteration_cap: usize,
    pub coefficient: Coefficient,
}

impl Default for OptConfig {
    fn default() -> Self {
        Self {
            rho: RHO,
            iteration_cap: DEFAULT_ITERATION_CAP,
            coefficient: Coefficient::default(),
        }
    }
}

impl OptConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.rho > 0.0 && self.rho < 0.25) {
            return Err(Error::domain(format!("rho must lie in (0, 1/4), got {}", self.rho)));
        }
        if self.iteration_cap == 0 {
            return Err(Error::domain("iteration cap must be at least 1"));
        }
        Ok(())
    }

    /// `K = ⌈(10/ρ)·ln(1/(ε′e^{t̂²/2}))⌉`, clamped to `[1, iteration_cap]`.
    pub fn iterations(&self, eps_prime: f64, t_hat: f64) -> usize {
        let k = (10.0 / self.rho) * (-(eps_prime.ln() + 0.5 * t_hat * t_hat));
        if !(k >= 1.0) {
            return 1;
        }
        (k.ceil() as usize).min(self.iteration_cap)
    }
}

/// One row of the optional diagnostic trace.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TraceRow {
    pub k: usize,
    pub mu: f64,
    pub sin_half_theta: f64,
}

pub const TRACE_CSV_HEADER: &str = "k,mu,sin_half_theta";

impl TraceRow {
    pub fn csv(&self) -> String {
        use crate::synthetic::fmt_f64;
        format!("{},{},{}", self.k, fmt_f64(self.mu), fmt_f64(self.sin_half_theta))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptOutcome {
    pub w: UnitVector,
    /// Number of updates performed (`K + 1`).
    pub steps: usize,
    pub empty_band_steps: usize,
    /// `(k, μ_k, sin(θ_k/2))` for `k = 0..=K+1` when a target was supplied.
    pub trace: Vec<TraceRow>,
}

/// Runs updates `k = 0..=K` on one fixed batch and returns `w_{K+1}`,
/// without judging how often the band was empty.
pub fn run(
    w0: &UnitVector,
    band: &BandParams,
    eta: f64,
    batch: &Dataset,
    k_max: usize,
    config: &OptConfig,
    target: Option<&UnitVector>,
) -> Result<OptOutcome> {
    config.validate()?;
    crate::synthetic::check_eta(eta)?;
    check_dim(w0.dim(), batch.dim())?;
    let mut state = OptState {
        w: w0.clone(),
        k: 0,
        mu: initial_step_size(eta, config.rho),
    };
    let mut trace = Vec::new();
    let mut record = |s: &OptState| -> Result<()> {
        if let Some(target) = target {
            trace.push(TraceRow {
                k: s.k,
                mu: s.mu,
                sin_half_theta: sin_half_angle(&s.w, target)?,
            });
        }
        Ok(())
    };
    record(&state)?;
    let mut empty = 0;
    for _ in 0..=k_max {
        let g = empirical_gradient(&state.w, band, eta, batch, config.coefficient)?;
        if g.empty_band() {
            empty += 1;
        }
        state = step(&state, &g.grad, config.rho)?;
        record(&state)?;
    }
    Ok(OptOutcome {
        w: state.w,
        steps: k_max + 1,
        empty_band_steps: empty,
        trace,
    })
}

/// [`run`], failing with a numeric error when more than half of the
/// updates saw an empty band.
pub fn optimize(
    w0: &UnitVector,
    band: &BandParams,
    eta: f64,
    batch: &Dataset,
    k_max: usize,
    config: &OptConfig,
    target: Option<&UnitVector>,
) -> Result<OptOutcome> {
    let out = run(w0, band, eta, batch, k_max, config, target)?;
    if 2 * out.empty_band_steps > out.steps {
        return Err(Error::Numeric(format!(
            "band was empty in {} of {} iterations",
            out.empty_band_steps, out.steps
        )));
    }
    Ok(out)
}
