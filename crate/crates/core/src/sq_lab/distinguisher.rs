use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{dot, UnitVector};
use crate::normal::gaussian_quantile;
use crate::reduce::map_chunks;
use crate::rng::Seed;
use crate::synthetic::{check_eta, fmt_f64, generate, Dataset, Halfspace, ProblemSpec};

/// Default `c` in the threshold `d/N + c·ε²·ln(1/ε)`.
pub const DEFAULT_CALIBRATION_C: f64 = 0.1;

/// Default `C` in the sample size `⌈C√d/(ε² ln(1/ε))⌉`.
pub const DEFAULT_SAMPLE_CONSTANT: f64 = 8.0;

pub const VERDICT_CSV_HEADER: &str = "trial,case,statistic,threshold,decision";

const TAG_PLANTED: u64 = 0x504c_4e54;
const TAG_NULL: u64 = 0x4e55_4c4c;
const TAG_NULL_LABELS: u64 = 0x4e4c_424c;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DistinguisherVerdict {
    pub statistic: f64,
    pub threshold: f64,
    pub planted: bool,
}

impl DistinguisherVerdict {
    pub fn decision(&self) -> &'static str {
        if self.planted {
            "planted"
        } else {
            "null"
        }
    }
}

/// `⌈C√d/(ε² ln(1/ε))⌉`.
pub fn distinguisher_sample_size(d: usize, eps: f64, constant: f64) -> Result<usize> {
    check_eps(eps)?;
    if d == 0 || !(constant > 0.0) {
        return Err(Error::domain("dimension and sample constant must be positive"));
    }
    Ok((constant * (d as f64).sqrt() / (eps * eps * (1.0 / eps).ln())).ceil() as usize)
}

fn check_eps(eps: f64) -> Result<()> {
    if eps > 0.0 && eps < 0.5 {
        Ok(())
    } else {
        Err(Error::domain(format!("eps must lie in (0, 1/2), got {eps}")))
    }
}

/// Declares "planted" when `‖(1/N)Σ y_i x_i‖² > d/N + c·ε²·ln(1/ε)`.
pub fn distinguish(data: &Dataset, eps: f64, calibration_c: f64) -> Result<DistinguisherVerdict> {
    check_eps(eps)?;
    if data.is_empty() {
        return Err(Error::domain("distinguisher needs at least one sample"));
    }
    let z = crate::initializer::chow_estimate(data)?;
    let statistic = dot(&z, &z);
    let n = data.len() as f64;
    let threshold = data.dim() as f64 / n + calibration_c * eps * eps * (1.0 / eps).ln();
    Ok(DistinguisherVerdict {
        statistic,
        threshold,
        planted: statistic > threshold,
    })
}

/// The two hypotheses being told apart.
///
/// Planted: `y = sign(v·x + Φ^{−1}(ε))` (so `P[f = 1] = ε`) for a uniformly
/// random `v`, flipped at rate η. Null: `y` independent of `x` with the
/// same marginal `P[y = 1] = η + (1−2η)ε`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DistinguisherSetup {
    pub d: usize,
    pub eps: f64,
    pub eta: f64,
    pub n: usize,
}

impl DistinguisherSetup {
    pub fn new(d: usize, eps: f64, eta: f64, n: usize) -> Result<Self> {
        check_eps(eps)?;
        check_eta(eta)?;
        if d == 0 || n == 0 {
            return Err(Error::domain("dimension and sample count must be positive"));
        }
        Ok(Self { d, eps, eta, n })
    }

    pub fn positive_rate(&self) -> f64 {
        self.eta + (1.0 - 2.0 * self.eta) * self.eps
    }

    pub fn planted_sample(&self, seed: Seed, trial: u64) -> Result<Dataset> {
        let s = seed.derive(TAG_PLANTED, trial);
        let v = UnitVector::new(s.derive(0, 0).gaussian_stream().take(self.d).collect())?;
        let t = gaussian_quantile(self.eps)?;
        let spec = ProblemSpec::new(Halfspace::new(v, t), self.eta, s.derive(1, 0))?;
        generate(&spec, self.n)
    }

    pub fn null_sample(&self, seed: Seed, trial: u64) -> Result<Dataset> {
        let s = seed.derive(TAG_NULL, trial);
        let shell = ProblemSpec::new(Halfspace::constant_plus(self.d), 0.0, s)?;
        let xs = generate(&shell, self.n)?;
        let q = self.positive_rate();
        let mut u = seed.derive(TAG_NULL_LABELS, trial).uniform_stream();
        let labels = (0..self.n).map(|_| if u.next_f64() < q { 1 } else { -1 }).collect();
        Dataset::from_parts(self.d, xs.features().to_vec(), labels)
    }
}

fn statistic(data: &Dataset) -> Result<f64> {
    let z = crate::initializer::chow_estimate(data)?;
    Ok(dot(&z, &z))
}

/// `‖Z_N‖²` on `trials` null samples and `trials` planted samples.
pub fn simulate_statistics(setup: &DistinguisherSetup, trials: usize, seed: Seed) -> Result<(Vec<f64>, Vec<f64>)> {
    let null = map_chunks(trials, |i| statistic(&setup.null_sample(seed, i as u64)?));
    let planted = map_chunks(trials, |i| statistic(&setup.planted_sample(seed, i as u64)?));
    Ok((
        null.into_iter().collect::<Result<_>>()?,
        planted.into_iter().collect::<Result<_>>()?,
    ))
}

/// Verdict counts over paired null/planted trials.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialTally {
    pub trials: usize,
    pub threshold: f64,
    pub null_correct: usize,
    pub planted_correct: usize,
    pub null: Vec<DistinguisherVerdict>,
    pub planted: Vec<DistinguisherVerdict>,
}

impl TrialTally {
    pub fn null_accuracy(&self) -> f64 {
        self.null_correct as f64 / self.trials as f64
    }

    pub fn planted_accuracy(&self) -> f64 {
        self.planted_correct as f64 / self.trials as f64
    }

    /// One CSV row per verdict under [`VERDICT_CSV_HEADER`].
    pub fn csv_rows(&self) -> Vec<String> {
        let rows = |case: &str, vs: &[DistinguisherVerdict]| -> Vec<String> {
            vs.iter()
                .enumerate()
                .map(|(i, v)| {
                    format!(
                        "{i},{case},{},{},{}",
                        fmt_f64(v.statistic),
                        fmt_f64(v.threshold),
                        v.decision()
                    )
                })
                .collect()
        };
        let mut out = rows("null", &self.null);
        out.extend(rows("planted", &self.planted));
        out
    }
}

pub fn run_trials(setup: &DistinguisherSetup, trials: usize, calibration_c: f64, seed: Seed) -> Result<TrialTally> {
    if trials == 0 {
        return Err(Error::domain("need at least one trial"));
    }
    let verdicts = |planted: bool| -> Result<Vec<DistinguisherVerdict>> {
        map_chunks(trials, |i| {
            let data = if planted {
                setup.planted_sample(seed, i as u64)?
            } else {
                setup.null_sample(seed, i as u64)?
            };
            distinguish(&data, setup.eps, calibration_c)
        })
        .into_iter()
        .collect()
    };
    let null = verdicts(false)?;
    let planted = verdicts(true)?;
    Ok(TrialTally {
        trials,
        threshold: null[0].threshold,
        null_correct: null.iter().filter(|v| !v.planted).count(),
        planted_correct: planted.iter().filter(|v| v.planted).count(),
        null,
        planted,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Calibration {
    pub c: f64,
    pub threshold: f64,
    pub null_error: f64,
    pub planted_error: f64,
}

/// Chooses the threshold that minimizes the larger of the two error rates
/// on simulated statistics (candidate thresholds are midpoints between
/// consecutive sorted values; the first minimizer wins) and converts it
/// back to `c`.
pub fn calibrate(setup: &DistinguisherSetup, trials: usize, seed: Seed) -> Result<Calibration> {
    if trials == 0 {
        return Err(Error::domain("need at least one trial"));
    }
    let (null, planted) = simulate_statistics(setup, trials, seed)?;
    let mut all: Vec<f64> = null.iter().chain(&planted).copied().collect();
    all.sort_by(f64::total_cmp);
    let n = trials as f64;
    let mut best: Option<(f64, f64, f64)> = None;
    for w in all.windows(2) {
        let thr = 0.5 * (w[0] + w[1]);
        let fp = null.iter().filter(|&&s| s > thr).count() as f64 / n;
        let fneg = planted.iter().filter(|&&s| s <= thr).count() as f64 / n;
        if best.is_none_or(|(_, a, b)| fp.max(fneg) < a.max(b)) {
            best = Some((thr, fp, fneg));
        }
    }
    let (threshold, null_error, planted_error) =
        best.ok_or_else(|| Error::domain("calibration needs two statistics"))?;
    let scale = setup.eps * setup.eps * (1.0 / setup.eps).ln();
    Ok(Calibration {
        c: (threshold - setup.d as f64 / setup.n as f64) / scale,
        threshold,
        null_error,
        planted_error,
    })
}
