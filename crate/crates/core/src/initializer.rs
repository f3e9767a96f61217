//! Warm start from Chow parameters.
//!
//! Under the Gaussian, `E[y·x] = √(2/π)(1−2η)e^{−t²/2}·w*`, so the empirical
//! Chow vector points at the target and its length reveals the bias. The
//! adaptive loop halves a bias guess `p_j` until the Chow vector is long
//! enough to be trusted, then spends one large batch on the direction.

use crate::error::{check_dim, Error, Result};
use crate::geometry::UnitVector;
use crate::reduce::{add_vecs, tree_combine, CHUNK};
use crate::source::SampleSource;
use crate::synthetic::{check_eta, Dataset};

use std::f64::consts::PI;

/// Samples are pulled from an oracle in pieces of this many rows, so the
/// large initialization batches never need to be held in memory at once.
const PIECE: usize = 64 * CHUNK;

/// Multipliers on the two sample-size formulas (both 1.0 by default).
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct InitConfig {
    pub loop_multiplier: f64,
    pub final_multiplier: f64,
}

impl Default for InitConfig {
    fn default() -> Self {
        Self {
            loop_multiplier: 1.0,
            final_multiplier: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InitResult {
    pub w0: UnitVector,
    pub p_hat: f64,
    pub kappa: f64,
    pub samples_used: usize,
    pub constant_branch: bool,
    /// Number of halving rounds the loop ran.
    pub rounds: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NoiseEstimate {
    pub p_hat: f64,
    pub eta_hat: f64,
    pub samples_used: usize,
    /// `true` when no round met the stopping rule and the Chow-loop
    /// estimate was used instead.
    pub fallback: bool,
}

fn chunk_sum(data: &Dataset, start: usize, end: usize) -> Vec<f64> {
    let d = data.dim();
    let mut acc = vec![0.0; d];
    for i in start..end {
        let yf = f64::from(data.y(i));
        for (a, v) in acc.iter_mut().zip(data.x(i)) {
            *a += yf * v;
        }
    }
    acc
}

fn push_chunk_sums(data: &Dataset, partials: &mut Vec<Vec<f64>>) {
    let n = data.len();
    let sums = crate::reduce::map_chunks(n.div_ceil(CHUNK), |c| {
        chunk_sum(data, c * CHUNK, ((c + 1) * CHUNK).min(n))
    });
    partials.extend(sums);
}

/// `(1/N)·Σ y_i x_i`.
pub fn chow_estimate(data: &Dataset) -> Result<Vec<f64>> {
    if data.is_empty() {
        return Err(Error::domain("Chow estimate needs at least one sample"));
    }
    let mut partials = Vec::new();
    push_chunk_sums(data, &mut partials);
    Ok(finish_mean(partials, data.dim(), data.len()))
}

fn finish_mean(partials: Vec<Vec<f64>>, d: usize, n: usize) -> Vec<f64> {
    let mut sum = tree_combine(partials, add_vecs).unwrap_or_else(|| vec![0.0; d]);
    let nf = n as f64;
    sum.iter_mut().for_each(|s| *s /= nf);
    sum
}

/// Chow vector of the next `n` samples of `oracle`, streamed in pieces.
/// Equal to `chow_estimate(&oracle.draw(n))` bit for bit.
pub fn chow_from_source<S: SampleSource + ?Sized>(oracle: &mut S, n: usize) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::domain("Chow estimate needs at least one sample"));
    }
    let mut partials = Vec::new();
    let mut left = n;
    while left > 0 {
        let take = left.min(PIECE);
        let piece = oracle.draw(take)?;
        check_dim(oracle.dim(), piece.dim())?;
        push_chunk_sums(&piece, &mut partials);
        left -= take;
    }
    Ok(finish_mean(partials, oracle.dim(), n))
}

fn check_init_args(delta: f64, eta: f64, eps: f64) -> Result<()> {
    if !(delta > 0.0 && delta < 0.5) {
        return Err(Error::domain(format!("delta must lie in (0, 1/2), got {delta}")));
    }
    if !(eps > 0.0 && eps < 0.5) {
        return Err(Error::domain(format!("eps must lie in (0, 1/2), got {eps}")));
    }
    check_eta(eta)
}

fn ceil_count(x: f64) -> Result<usize> {
    if !x.is_finite() || x > 1e15 {
        return Err(Error::Budget(format!("sample size {x:.3e} is not representable")));
    }
    Ok(x.ceil().max(1.0) as usize)
}

/// `n_j = ⌈32π d (ln(1/δ) + ln ln((1−2η)/ε)) / ((1−2η)² p_j²)⌉`, with the
/// double logarithm clamped at zero where it is undefined or negative.
pub fn loop_batch_size(d: usize, delta: f64, eta: f64, eps: f64, p_j: f64, multiplier: f64) -> Result<usize> {
    let a = 1.0 - 2.0 * eta;
    let lnln = (a / eps).ln().ln();
    let lnln = if lnln.is_finite() { lnln.max(0.0) } else { 0.0 };
    let n = multiplier * 32.0 * PI * d as f64 * ((1.0 / delta).ln() + lnln) / (a * a * p_j * p_j);
    ceil_count(n)
}

/// `κ = 1/(5√(2(ln 4 + ln(1/p̂))))`.
pub fn kappa(p_hat: f64) -> f64 {
    1.0 / (5.0 * (2.0 * (4f64.ln() + (1.0 / p_hat).ln())).sqrt())
}

/// `N₁ = ⌈64π d ln(2/δ) / (κ⁴(1−2η)² p̂²)⌉`.
pub fn final_batch_size(d: usize, delta: f64, eta: f64, p_hat: f64, multiplier: f64) -> Result<usize> {
    let a = 1.0 - 2.0 * eta;
    let k = kappa(p_hat);
    let n = multiplier * 64.0 * PI * d as f64 * (2.0 / delta).ln() / (k.powi(4) * a * a * p_hat * p_hat);
    ceil_count(n)
}

struct LoopOutcome {
    p_j: f64,
    u: Vec<f64>,
    by_eps: bool,
    rounds: usize,
}

fn bias_loop<S: SampleSource + ?Sized>(
    oracle: &mut S,
    delta: f64,
    eta: f64,
    eps: f64,
    multiplier: f64,
) -> Result<LoopOutcome> {
    let d = oracle.dim();
    let a = 1.0 - 2.0 * eta;
    let mut j = 0;
    loop {
        j += 1;
        let p_j = 0.5f64.powi(j);
        let n_j = loop_batch_size(d, delta, eta, eps, p_j, multiplier)?;
        let u = chow_from_source(oracle, n_j)?;
        let long_enough = crate::geometry::norm(&u) >= 0.75 * (2.0 / PI).sqrt() * a * p_j;
        let tiny = a * p_j <= eps;
        if long_enough || tiny {
            return Ok(LoopOutcome {
                p_j,
                u,
                by_eps: !long_enough,
                rounds: j as usize,
            });
        }
    }
}

/// Adaptive bias estimation followed by one Chow batch for `w0`.
///
/// When the loop stops only because `(1−2η)p_j ≤ ε`, the target is so
/// biased that a constant hypothesis is already ε-good; no final batch is
/// drawn and `constant_branch` is set.
pub fn initialize<S: SampleSource + ?Sized>(
    oracle: &mut S,
    delta: f64,
    eta: f64,
    eps: f64,
    config: &InitConfig,
) -> Result<InitResult> {
    check_init_args(delta, eta, eps)?;
    let start = oracle.drawn();
    let d = oracle.dim();
    let outcome = bias_loop(oracle, delta, eta, eps, config.loop_multiplier)?;
    let p_hat = 2.0 * outcome.p_j;
    let kappa = kappa(p_hat);
    if outcome.by_eps {
        let w0 = UnitVector::new(outcome.u).unwrap_or_else(|_| UnitVector::basis(d, 0));
        return Ok(InitResult {
            w0,
            p_hat,
            kappa,
            samples_used: oracle.drawn() - start,
            constant_branch: true,
            rounds: outcome.rounds,
        });
    }
    let n1 = final_batch_size(d, delta, eta, p_hat, config.final_multiplier)?;
    let u = chow_from_source(oracle, n1)?;
    let w0 = UnitVector::new(u).map_err(|_| Error::Numeric("Chow vector of the final batch is zero".into()))?;
    Ok(InitResult {
        w0,
        p_hat,
        kappa,
        samples_used: oracle.drawn() - start,
        constant_branch: false,
        rounds: outcome.rounds,
    })
}

/// The constant `C` of the sandwich `C(1−2η̂) ≥ 1−2η ≥ 1−2η̂`.
pub const NOISE_SANDWICH_C: f64 = 8.0;

/// Refinement batches are this many times the stopping round's size.
const REFINE_FACTOR: usize = 64;

fn positive_excess(data: &Dataset) -> f64 {
    let pos = data.labels().iter().filter(|&&y| y == 1).count();
    (pos as f64 / data.len() as f64 - 0.5).abs()
}

/// Estimates `η` (and the bias proxy `p̂ ≈ e^{−t²/2}`) when it is unknown.
///
/// First the Chow loop runs as if `η = 0`, giving `ẑ` with
/// `(1−2η)e^{−t²/2} ≤ ẑ ≤ 4(1−2η)e^{−t²/2}`. Then rounds `s = 1..S`,
/// `S = ⌈log₂(1/ε)⌉`, draw `N_s = ⌈4^s ln(2S/δ)⌉` samples and compute
/// `Ẑ_s = |mean(1{y=1}) − 1/2|`, which estimates `(1−2η)|Φ(t) − 1/2|`. The
/// first round with `Ẑ_s − r_s ≥ Ẑ_s/2`, where `r_s = √(ln(2S/δ)/(2N_s))`
/// is the Hoeffding radius, triggers one refinement batch of `64·N_s`
/// samples, and `1−2η̂ = max(2(Ẑ − r), ẑ/4)` clamped to `(0, 1]`. If no
/// round stops (bias near 1/2), `1−2η̂ = ẑ/4`.
pub fn estimate_eta<S: SampleSource + ?Sized>(
    oracle: &mut S,
    delta: f64,
    eps: f64,
    config: &InitConfig,
) -> Result<NoiseEstimate> {
    check_init_args(delta, 0.0, eps)?;
    let start = oracle.drawn();
    let outcome = bias_loop(oracle, delta, 0.0, eps, config.loop_multiplier)?;
    let z_chow = 2.0 * outcome.p_j;

    let rounds = ((1.0 / eps).log2().ceil() as usize).max(1);
    let log_term = (2.0 * rounds as f64 / delta).ln();
    let radius = |n: usize| (log_term / (2.0 * n as f64)).sqrt();
    let mut lower = None;
    for s in 1..=rounds {
        let n_s = ceil_count(4f64.powi(s as i32) * log_term)?;
        let z = positive_excess(&oracle.draw(n_s)?);
        if z - radius(n_s) >= z / 2.0 {
            let n_ref = n_s * REFINE_FACTOR;
            let z_ref = positive_excess(&oracle.draw(n_ref)?);
            lower = Some(2.0 * (z_ref - radius(n_ref)));
            break;
        }
    }
    let fallback = lower.is_none();
    let a_hat = lower
        .unwrap_or(f64::NEG_INFINITY)
        .max(z_chow / 4.0)
        .clamp(f64::MIN_POSITIVE, 1.0);
    Ok(NoiseEstimate {
        p_hat: z_chow / a_hat,
        eta_hat: (1.0 - a_hat) / 2.0,
        samples_used: oracle.drawn() - start,
        fallback,
    })
}
