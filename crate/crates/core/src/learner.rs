//! The end-to-end learner.
//!
//! 1. Optionally estimate η; then normalize the label sign on a probe batch.
//! 2. Warm-start with [`initialize`]; very biased targets get a constant.
//! 3. Build a threshold grid from `p̂`, draw one gradient batch of size
//!    `N₂`, and run the optimizer once per grid point.
//! 4. Pick the candidate with the fewest mistakes on `N₃` fresh samples.
//!
//! Every sample size is `⌈formula × sample_multiplier × stage scale⌉`.
//! The stage scales default to one; they exist because the formula
//! constants make the initialization batch orders of magnitude larger than
//! the other stages at desk-scale parameters.

use std::io::Write;

use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{check_dim, Error, Result};
use crate::geometry::UnitVector;
use crate::initializer::{estimate_eta, initialize, InitConfig, InitResult, NoiseEstimate};
use crate::optimizer::{self, BandParams, OptConfig};
use crate::reduce::{map_chunks, tree_combine, CHUNK};
use crate::source::{MaybeNegated, SampleSource};
use crate::synthetic::{check_eta, fmt_f64, parse_f64, Constant, Dataset, Halfspace};

/// Default cap on the number of threshold guesses.
pub const DEFAULT_GRID_CAP: usize = 1_000_000;

/// Size of the batch whose label mean decides the sign convention.
pub const DEFAULT_PROBE_SIZE: usize = 1000;

/// Per-stage multipliers applied on top of `sample_multiplier`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StageScales {
    pub init_loop: f64,
    pub init_final: f64,
    pub optimize: f64,
    pub test: f64,
}

impl Default for StageScales {
    fn default() -> Self {
        Self {
            init_loop: 1.0,
            init_final: 1.0,
            optimize: 1.0,
            test: 1.0,
        }
    }
}

/// Stage scales frozen for desk-sized runs (d around 20): a run stays well
/// under 2·10⁶ samples and finishes in seconds.
pub const DESK_SCALES: StageScales = StageScales {
    init_loop: 1.0,
    init_final: 0.005,
    optimize: 20.0,
    test: 10.0,
};

/// Iteration cap paired with [`DESK_SCALES`].
pub const DESK_ITERATION_CAP: usize = 100;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LearnConfig {
    pub eps: f64,
    pub delta: f64,
    /// `None` selects unknown-noise mode.
    pub eta: Option<f64>,
    pub sample_multiplier: f64,
    pub scales: StageScales,
    pub opt: OptConfig,
    pub grid_cap: usize,
    pub probe_size: usize,
}

impl LearnConfig {
    pub fn new(eps: f64, delta: f64, eta: Option<f64>) -> Self {
        Self {
            eps,
            delta,
            eta,
            sample_multiplier: 1.0,
            scales: StageScales::default(),
            opt: OptConfig::default(),
            grid_cap: DEFAULT_GRID_CAP,
            probe_size: DEFAULT_PROBE_SIZE,
        }
    }

    /// [`LearnConfig::new`] with [`DESK_SCALES`] and [`DESK_ITERATION_CAP`].
    pub fn desk(eps: f64, delta: f64, eta: Option<f64>) -> Self {
        let mut c = Self::new(eps, delta, eta);
        c.scales = DESK_SCALES;
        c.opt.iteration_cap = DESK_ITERATION_CAP;
        c
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eps > 0.0 && self.eps < 0.5) {
            return Err(Error::domain(format!("eps must lie in (0, 1/2), got {}", self.eps)));
        }
        if !(self.delta > 0.0 && self.delta < 0.5) {
            return Err(Error::domain(format!("delta must lie in (0, 1/2), got {}", self.delta)));
        }
        if let Some(eta) = self.eta {
            check_eta(eta)?;
        }
        let s = &self.scales;
        for (name, v) in [
            ("sample_multiplier", self.sample_multiplier),
            ("init_loop scale", s.init_loop),
            ("init_final scale", s.init_final),
            ("optimize scale", s.optimize),
            ("test scale", s.test),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::domain(format!("{name} must be positive, got {v}")));
            }
        }
        if self.probe_size == 0 {
            return Err(Error::domain("probe size must be at least 1"));
        }
        if self.grid_cap == 0 {
            return Err(Error::domain("grid cap must be at least 1"));
        }
        self.opt.validate()
    }

    fn init_config(&self) -> InitConfig {
        InitConfig {
            loop_multiplier: self.sample_multiplier * self.scales.init_loop,
            final_multiplier: self.sample_multiplier * self.scales.init_final,
        }
    }
}

fn ceil_count(x: f64) -> Result<usize> {
    if !x.is_finite() || x > 1e15 {
        return Err(Error::Budget(format!("sample size {x:.3e} is not representable")));
    }
    Ok(x.ceil().max(1.0) as usize)
}

/// `N₂ = ⌈m·d ln(1/δ) ln(1/ε′)/((1−2η)²ε′)⌉`.
pub fn gradient_batch_size(d: usize, delta: f64, eta: f64, eps_prime: f64, multiplier: f64) -> Result<usize> {
    let a = 1.0 - 2.0 * eta;
    ceil_count(multiplier * d as f64 * (1.0 / delta).ln() * (1.0 / eps_prime).ln() / (a * a * eps_prime))
}

/// `N₃ = ⌈m·d ln(1/δ)/((1−2η)ε)⌉`.
pub fn test_batch_size(d: usize, delta: f64, eta: f64, eps: f64, multiplier: f64) -> Result<usize> {
    ceil_count(multiplier * d as f64 * (1.0 / delta).ln() / ((1.0 - 2.0 * eta) * eps))
}

/// One threshold guess and its band width.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridPoint {
    pub t: f64,
    pub gamma: f64,
}

/// `t_m = t₀ + (m−1)ε′²/8` for `m = 1..M` with `t₀ = √(2 ln(1/p̂))`
/// (zero when `p̂ ≥ 1`), `M = 8⌈(√(2 ln(4/p̂)) − t₀)/ε′²⌉ + 1` and
/// `γ_m = (ε′/2)e^{t_m²/2}`.
pub fn build_grid(p_hat: f64, eps_prime: f64, cap: usize) -> Result<Vec<GridPoint>> {
    if !(p_hat > 0.0) || !p_hat.is_finite() {
        return Err(Error::domain(format!("bias estimate must be positive, got {p_hat}")));
    }
    if !(eps_prime > 0.0 && eps_prime < 1.0) {
        return Err(Error::domain(format!("eps' must lie in (0, 1), got {eps_prime}")));
    }
    let t0 = if p_hat >= 1.0 {
        0.0
    } else {
        (2.0 * (1.0 / p_hat).ln()).sqrt()
    };
    let top = (2.0 * (4.0 / p_hat).ln()).sqrt();
    let spacing = eps_prime * eps_prime / 8.0;
    let blocks = ((top - t0) / (eps_prime * eps_prime)).ceil();
    let m = 8.0 * blocks + 1.0;
    if !(m <= cap as f64) {
        return Err(Error::Budget(format!(
            "threshold grid needs {m:.0} points (cap {cap}); use a larger eps"
        )));
    }
    Ok((0..m as usize)
        .map(|i| {
            let t = t0 + i as f64 * spacing;
            GridPoint {
                t,
                gamma: 0.5 * eps_prime * (0.5 * t * t).exp(),
            }
        })
        .collect())
}

fn mistakes(h: &Halfspace, data: &Dataset) -> usize {
    let n = data.len();
    let parts = map_chunks(n.div_ceil(CHUNK), |c| {
        (c * CHUNK..((c + 1) * CHUNK).min(n))
            .filter(|&i| h.predict(data.x(i)) != data.y(i))
            .count()
    });
    tree_combine(parts, |a, b| a + b).unwrap_or(0)
}

/// Fraction of samples on which `h` disagrees with the label.
pub fn evaluate(h: &Halfspace, data: &Dataset) -> Result<f64> {
    check_dim(h.dim(), data.dim())?;
    if data.is_empty() {
        return Err(Error::domain("cannot evaluate on an empty dataset"));
    }
    Ok(mistakes(h, data) as f64 / data.len() as f64)
}

/// Index of the candidate with the lowest empirical error (first on ties)
/// and every candidate's error.
pub fn select_best(candidates: &[Halfspace], fresh: &Dataset) -> Result<(usize, Vec<f64>)> {
    if candidates.is_empty() {
        return Err(Error::domain("no candidates to select from"));
    }
    if fresh.is_empty() {
        return Err(Error::domain("selection needs at least one fresh sample"));
    }
    let errors = candidates
        .iter()
        .map(|h| evaluate(h, fresh))
        .collect::<Result<Vec<_>>>()?;
    let mut best = 0;
    for (i, e) in errors.iter().enumerate() {
        if *e < errors[best] {
            best = i;
        }
    }
    Ok((best, errors))
}

/// One optimized candidate.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CandidateRecord {
    pub eta_guess: f64,
    pub t: f64,
    pub gamma: f64,
    pub iterations: usize,
    pub empty_band_steps: usize,
    pub error: f64,
}

/// Number of samples drawn by each stage.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct SampleBreakdown {
    pub eta_estimation: usize,
    pub probe: usize,
    pub init: usize,
    pub gradient: usize,
    pub test: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LearnReport {
    pub hypothesis: Halfspace,
    pub samples_used: usize,
    pub samples: SampleBreakdown,
    pub grid_size: usize,
    pub candidates: Vec<CandidateRecord>,
    pub selected_index: usize,
    pub constant_branch: bool,
    pub flipped: bool,
    pub p_hat: f64,
    /// Noise rate used for sample sizes: the given η or the estimate.
    pub eta_used: f64,
    pub eta_estimate: Option<NoiseEstimate>,
    pub eta_grid: Vec<f64>,
    /// Rough count of floating-point operations spent.
    pub flops: f64,
}

impl LearnReport {
    /// `(t_m, empirical error)` for every candidate, in grid order.
    pub fn per_threshold_errors(&self) -> Vec<(f64, f64)> {
        self.candidates.iter().map(|c| (c.t, c.error)).collect()
    }

    /// Structured report: results, the configuration echo and the
    /// per-threshold table. Contains no timing, so reruns are identical.
    pub fn to_json(&self, config: &LearnConfig) -> Value {
        let h = &self.hypothesis;
        json!({
            "format": "halfspace-rcn-report v1",
            "hypothesis": {
                "w": h.w.as_slice(),
                "t": fmt_f64(h.t),
                "flipped": h.flipped,
                "constant": h.constant().as_str(),
            },
            "samples_used": self.samples_used,
            "samples": self.samples,
            "grid_size": self.grid_size,
            "selected_index": self.selected_index,
            "constant_branch": self.constant_branch,
            "flipped": self.flipped,
            "p_hat": self.p_hat,
            "eta_used": self.eta_used,
            "eta_estimate": self.eta_estimate.as_ref().map(|e| json!({
                "eta_hat": e.eta_hat,
                "p_hat": e.p_hat,
                "samples_used": e.samples_used,
                "fallback": e.fallback,
            })),
            "eta_grid": self.eta_grid,
            "flops": self.flops,
            "config": config,
            "per_threshold_errors": self.candidates,
        })
    }
}

fn constant_report(
    d: usize,
    flipped: bool,
    samples: SampleBreakdown,
    p_hat: f64,
    eta_used: f64,
    eta_estimate: Option<NoiseEstimate>,
) -> LearnReport {
    let mut hypothesis = Halfspace::constant_plus(d);
    hypothesis.flipped = flipped;
    LearnReport {
        hypothesis,
        samples_used: total(&samples),
        samples,
        grid_size: 0,
        candidates: Vec::new(),
        selected_index: 0,
        constant_branch: true,
        flipped,
        p_hat,
        eta_used,
        eta_estimate,
        eta_grid: Vec::new(),
        flops: 0.0,
    }
}

fn total(s: &SampleBreakdown) -> usize {
    s.eta_estimation + s.probe + s.init + s.gradient + s.test
}

/// Noise guesses `0, ε, 2ε, … < 1/2`.
pub fn eta_guesses(eps: f64) -> Vec<f64> {
    (0..).map(|k| k as f64 * eps).take_while(|&g| g < 0.5).collect()
}

struct Candidate {
    h: Halfspace,
    record: CandidateRecord,
}

fn optimize_grid(
    init: &InitResult,
    eta_guess: f64,
    eps: f64,
    batch: &Dataset,
    config: &LearnConfig,
) -> Result<Vec<Candidate>> {
    let eps_prime = eps / (1.0 - 2.0 * eta_guess);
    if eps_prime >= 1.0 {
        return Ok(Vec::new());
    }
    let grid = build_grid(init.p_hat, eps_prime, config.grid_cap)?;
    let results = map_chunks(grid.len(), |m| -> Result<Candidate> {
        let g = grid[m];
        let band = BandParams::new(g.t, g.gamma)?;
        let k = config.opt.iterations(eps_prime, g.t);
        let out = optimizer::run(&init.w0, &band, eta_guess, batch, k, &config.opt, None)?;
        Ok(Candidate {
            h: Halfspace::new(out.w, g.t),
            record: CandidateRecord {
                eta_guess,
                t: g.t,
                gamma: g.gamma,
                iterations: out.steps,
                empty_band_steps: out.empty_band_steps,
                error: f64::NAN,
            },
        })
    });
    results.into_iter().collect()
}

/// Runs the full pipeline against `oracle`.
pub fn learn<S: SampleSource + ?Sized>(oracle: &mut S, config: &LearnConfig) -> Result<LearnReport> {
    config.validate()?;
    let d = oracle.dim();
    let mut samples = SampleBreakdown::default();
    let init_cfg = config.init_config();

    let (eta_used, eta_estimate) = match config.eta {
        Some(eta) => (eta, None),
        None => {
            let est = estimate_eta(oracle, config.delta, config.eps, &init_cfg)?;
            samples.eta_estimation = est.samples_used;
            (est.eta_hat, Some(est))
        }
    };

    let probe = oracle.draw(config.probe_size)?;
    samples.probe = probe.len();
    let label_sum: i64 = probe.labels().iter().map(|&y| i64::from(y)).sum();
    let flipped = label_sum < 0;
    let mut view = if flipped {
        MaybeNegated::Negated(oracle)
    } else {
        MaybeNegated::Plain(oracle)
    };

    let eps = config.eps;
    if eps / (1.0 - 2.0 * eta_used) >= 1.0 {
        return Ok(constant_report(d, flipped, samples, 1.0, eta_used, eta_estimate));
    }

    let init = initialize(&mut view, config.delta, eta_used, eps, &init_cfg)?;
    samples.init = init.samples_used;
    if init.constant_branch {
        return Ok(constant_report(d, flipped, samples, init.p_hat, eta_used, eta_estimate));
    }

    let eps_prime = eps / (1.0 - 2.0 * eta_used);
    let n2 = gradient_batch_size(
        d,
        config.delta,
        eta_used,
        eps_prime,
        config.sample_multiplier * config.scales.optimize,
    )?;
    let batch = view.draw(n2)?;
    samples.gradient = n2;

    let eta_grid = match config.eta {
        Some(eta) => vec![eta],
        None => eta_guesses(eps)
            .into_iter()
            .filter(|g| eps / (1.0 - 2.0 * g) < 1.0)
            .collect(),
    };
    let mut candidates = Vec::new();
    for &guess in &eta_grid {
        candidates.extend(optimize_grid(&init, guess, eps, &batch, config)?);
    }
    if candidates.is_empty() {
        return Ok(constant_report(d, flipped, samples, init.p_hat, eta_used, eta_estimate));
    }

    let n3 = test_batch_size(
        d,
        config.delta,
        eta_used,
        eps,
        config.sample_multiplier * config.scales.test,
    )?;
    let fresh = view.draw(n3)?;
    samples.test = n3;

    let hyps: Vec<Halfspace> = candidates.iter().map(|c| c.h.clone()).collect();
    let (best, errors) = select_best(&hyps, &fresh)?;
    for (c, e) in candidates.iter_mut().zip(&errors) {
        c.record.error = *e;
    }

    let dim = d as f64;
    let opt_flops: f64 = candidates
        .iter()
        .map(|c| 2.0 * dim * n2 as f64 * c.record.iterations as f64)
        .sum();
    let flops = 2.0 * dim * (samples.init + n2) as f64 + opt_flops + 2.0 * dim * (n3 * hyps.len()) as f64;

    let mut hypothesis = hyps[best].clone();
    hypothesis.flipped = flipped;
    Ok(LearnReport {
        hypothesis,
        samples_used: total(&samples),
        samples,
        grid_size: candidates.len(),
        candidates: candidates.into_iter().map(|c| c.record).collect(),
        selected_index: best,
        constant_branch: false,
        flipped,
        p_hat: init.p_hat,
        eta_used,
        eta_estimate,
        eta_grid,
        flops,
    })
}

/// Sample sizes the pipeline would request for a given bias estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PlannedSamples {
    pub probe: usize,
    pub init_loop: usize,
    pub init_final: usize,
    pub gradient: usize,
    pub test: usize,
    pub total: usize,
}

/// Formula-only sample accounting for a known `η`, assuming the Chow loop
/// stops at the round whose guess `p_j` first satisfies `p_j ≤ (4/3)p`
/// (its noiseless stopping point), or at the ε exit.
pub fn planned_samples(d: usize, t: f64, eta: f64, config: &LearnConfig) -> Result<PlannedSamples> {
    config.validate()?;
    check_eta(eta)?;
    let init = config.init_config();
    let a = 1.0 - 2.0 * eta;
    let z = (-0.5 * t * t).exp();
    let mut init_loop = 0;
    let mut j = 0;
    let (p_j, by_eps) = loop {
        j += 1;
        let p_j = 0.5f64.powi(j);
        init_loop += crate::initializer::loop_batch_size(d, config.delta, eta, config.eps, p_j, init.loop_multiplier)?;
        let long = z >= 0.75 * p_j;
        if long || a * p_j <= config.eps {
            break (p_j, !long);
        }
    };
    let probe = config.probe_size;
    if by_eps {
        return Ok(PlannedSamples {
            probe,
            init_loop,
            init_final: 0,
            gradient: 0,
            test: 0,
            total: init_loop + probe,
        });
    }
    let p_hat = 2.0 * p_j;
    let init_final = crate::initializer::final_batch_size(d, config.delta, eta, p_hat, init.final_multiplier)?;
    let eps_prime = config.eps / a;
    let gradient = gradient_batch_size(
        d,
        config.delta,
        eta,
        eps_prime,
        config.sample_multiplier * config.scales.optimize,
    )?;
    let test = test_batch_size(
        d,
        config.delta,
        eta,
        config.eps,
        config.sample_multiplier * config.scales.test,
    )?;
    Ok(PlannedSamples {
        probe,
        init_loop,
        init_final,
        gradient,
        test,
        total: probe + init_loop + init_final + gradient + test,
    })
}

/// Writes the model file: one `key=value` line each for `w`, `t`,
/// `flipped` and `constant`.
pub fn write_model<W: Write>(mut out: W, h: &Halfspace) -> Result<()> {
    let w: Vec<String> = h.w.as_slice().iter().map(|v| fmt_f64(*v)).collect();
    writeln!(out, "w={}", w.join(","))?;
    writeln!(out, "t={}", fmt_f64(h.t))?;
    writeln!(out, "flipped={}", h.flipped)?;
    writeln!(out, "constant={}", h.constant().as_str())?;
    out.flush()?;
    Ok(())
}

pub fn read_model(text: &str) -> Result<Halfspace> {
    let (mut w, mut t, mut flipped, mut constant) = (None, None, None, None);
    for (idx, line) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::parse(lineno, "expected key=value"))?;
        let bad = |what: &str| Error::parse(lineno, format!("bad {what}: {v:?}"));
        match k.trim() {
            "w" => {
                let coords = v
                    .split(',')
                    .map(|s| parse_f64(s).ok_or_else(|| bad("weight")))
                    .collect::<Result<Vec<_>>>()?;
                w = Some(UnitVector::new(coords).map_err(|_| bad("weight vector"))?);
            }
            "t" => t = Some(parse_f64(v).filter(|x| !x.is_nan()).ok_or_else(|| bad("threshold"))?),
            "flipped" => flipped = Some(v.trim().parse::<bool>().map_err(|_| bad("flag"))?),
            "constant" => {
                constant = Some(match v.trim() {
                    "none" => Constant::None,
                    "plus" => Constant::Plus,
                    "minus" => Constant::Minus,
                    _ => return Err(bad("constant")),
                })
            }
            other => return Err(Error::parse(lineno, format!("unknown key {other:?}"))),
        }
    }
    let missing = |k: &str| Error::parse(0, format!("model is missing {k}"));
    let h = Halfspace {
        w: w.ok_or_else(|| missing("w"))?,
        t: t.ok_or_else(|| missing("t"))?,
        flipped: flipped.ok_or_else(|| missing("flipped"))?,
    };
    if let Some(c) = constant {
        if c != h.constant() {
            return Err(Error::parse(0, "constant field disagrees with t and flipped"));
        }
    }
    Ok(h)
}
