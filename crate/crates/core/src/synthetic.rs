//! Synthetic learning problems: a halfspace target under the standard
//! Gaussian marginal with labels flipped independently with probability η.
//!
//! Samples are generated in blocks of [`BLOCK_SIZE`]. Block `b` draws its
//! features from substream `seed.derive(TAG_FEATURES, b)` (d normals per
//! sample, in order) and its flip decisions from
//! `seed.derive(TAG_FLIPS, b)` (one uniform per sample). Sample `i` is
//! therefore a pure function of `(spec, i)`: the x-values do not depend on
//! η, and parallel generation reproduces the sequential order exactly.

use std::io::{BufRead, Write};

use crate::error::{check_dim, Error, Result};
use crate::geometry::UnitVector;
use crate::normal::{gaussian_cdf, gaussian_quantile};
use crate::reduce::map_chunks;
use crate::rng::{GaussianStream, Seed, SplitMix64};

pub const BLOCK_SIZE: usize = 1024;

const TAG_TARGET: u64 = 0x5441_5247_4554;
const TAG_FEATURES: u64 = 0x4645_4154;
const TAG_FLIPS: u64 = 0x464c_4950;

/// `sign(w·x + t)`, negated when `flipped` is set. `t = ±∞` encodes the
/// constant hypotheses.
#[derive(Debug, Clone, PartialEq)]
pub struct Halfspace {
    pub w: UnitVector,
    pub t: f64,
    pub flipped: bool,
}

/// Effective constant output of a halfspace with an infinite threshold.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Constant {
    None,
    Plus,
    Minus,
}

impl Constant {
    pub fn as_str(self) -> &'static str {
        match self {
            Constant::None => "none",
            Constant::Plus => "plus",
            Constant::Minus => "minus",
        }
    }
}

impl Halfspace {
    pub fn new(w: UnitVector, t: f64) -> Self {
        Self { w, t, flipped: false }
    }

    /// The hypothesis that always answers `+1` (before `flipped`).
    pub fn constant_plus(d: usize) -> Self {
        Self::new(UnitVector::basis(d, 0), f64::INFINITY)
    }

    pub fn dim(&self) -> usize {
        self.w.dim()
    }

    #[inline]
    pub fn predict(&self, x: &[f64]) -> i8 {
        let raw = if self.w.dot(x) + self.t >= 0.0 { 1 } else { -1 };
        if self.flipped {
            -raw
        } else {
            raw
        }
    }

    pub fn constant(&self) -> Constant {
        let sign = if self.t == f64::INFINITY {
            1
        } else if self.t == f64::NEG_INFINITY {
            -1
        } else {
            return Constant::None;
        };
        match (sign, self.flipped) {
            (1, false) | (-1, true) => Constant::Plus,
            _ => Constant::Minus,
        }
    }
}

/// A fully specified synthetic problem.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemSpec {
    pub d: usize,
    pub target: Halfspace,
    pub eta: f64,
    pub seed: Seed,
}

impl ProblemSpec {
    pub fn new(target: Halfspace, eta: f64, seed: Seed) -> Result<Self> {
        check_eta(eta)?;
        if target.t.is_nan() {
            return Err(Error::domain("threshold must not be NaN"));
        }
        Ok(Self {
            d: target.dim(),
            target,
            eta,
            seed,
        })
    }

    /// Same target and noise, different random stream.
    pub fn with_seed(&self, seed: Seed) -> Self {
        Self { seed, ..self.clone() }
    }
}

pub(crate) fn check_eta(eta: f64) -> Result<()> {
    if (0.0..0.5).contains(&eta) {
        Ok(())
    } else {
        Err(Error::domain(format!("noise rate must lie in [0, 1/2), got {eta}")))
    }
}

/// Samples `(x, y)` with `x ∈ R^d` stored row-major and `y ∈ {−1, +1}`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Dataset {
    d: usize,
    features: Vec<f64>,
    labels: Vec<i8>,
}

impl Dataset {
    pub fn new(d: usize) -> Self {
        Self {
            d,
            features: Vec::new(),
            labels: Vec::new(),
        }
    }

    pub fn with_capacity(d: usize, n: usize) -> Self {
        Self {
            d,
            features: Vec::with_capacity(n * d),
            labels: Vec::with_capacity(n),
        }
    }

    pub fn from_parts(d: usize, features: Vec<f64>, labels: Vec<i8>) -> Result<Self> {
        if d == 0 {
            return Err(Error::domain("dataset dimension must be positive"));
        }
        check_dim(labels.len() * d, features.len())?;
        if labels.iter().any(|&y| y != 1 && y != -1) {
            return Err(Error::domain("labels must be +1 or -1"));
        }
        Ok(Self { d, features, labels })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    #[inline]
    pub fn x(&self, i: usize) -> &[f64] {
        &self.features[i * self.d..(i + 1) * self.d]
    }

    #[inline]
    pub fn y(&self, i: usize) -> i8 {
        self.labels[i]
    }

    pub fn features(&self) -> &[f64] {
        &self.features
    }

    pub fn labels(&self) -> &[i8] {
        &self.labels
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[f64], i8)> + '_ {
        self.features
            .chunks_exact(self.d.max(1))
            .zip(self.labels.iter().copied())
    }

    pub fn push(&mut self, x: &[f64], y: i8) -> Result<()> {
        check_dim(self.d, x.len())?;
        if y != 1 && y != -1 {
            return Err(Error::domain("labels must be +1 or -1"));
        }
        self.features.extend_from_slice(x);
        self.labels.push(y);
        Ok(())
    }

    pub fn append(&mut self, mut other: Dataset) -> Result<()> {
        check_dim(self.d, other.d)?;
        self.features.append(&mut other.features);
        self.labels.append(&mut other.labels);
        Ok(())
    }

    /// Copy of samples `start..start+n`.
    pub fn slice(&self, start: usize, n: usize) -> Dataset {
        Dataset {
            d: self.d,
            features: self.features[start * self.d..(start + n) * self.d].to_vec(),
            labels: self.labels[start..start + n].to_vec(),
        }
    }

    pub fn negate_labels(&mut self) {
        for y in &mut self.labels {
            *y = -*y;
        }
    }

    /// Mean of `y·x`.
    pub fn chow_vector(&self) -> Vec<f64> {
        let mut acc = vec![0.0; self.d];
        for (x, y) in self.iter() {
            let yf = f64::from(y);
            for (a, v) in acc.iter_mut().zip(x) {
                *a += yf * v;
            }
        }
        let n = self.len().max(1) as f64;
        acc.iter_mut().for_each(|a| *a /= n);
        acc
    }
}

/// Bias `min(Φ(t), Φ(−t))` of `sign(w·x + t)` under the Gaussian.
pub fn bias_from_threshold(t: f64) -> f64 {
    gaussian_cdf(t).min(gaussian_cdf(-t))
}

/// Komatsu's two-sided bound on `Φ(−t)` for `t ≥ 0`:
/// `√(2/π)e^{−t²/2}/(t+√(t²+4)) ≤ Φ(−t) ≤ √(2/π)e^{−t²/2}/(t+√(t²+2))`.
pub fn komatsu_bounds(t: f64) -> Result<(f64, f64)> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::domain(format!("Komatsu bounds need finite t >= 0, got {t}")));
    }
    let scale = (2.0 / std::f64::consts::PI).sqrt() * (-0.5 * t * t).exp();
    let lower = scale / (t + (t * t + 4.0).sqrt());
    let upper = scale / (t + (t * t + 2.0).sqrt());
    Ok((lower, upper))
}

/// Non-negative threshold whose bias is `p ∈ (0, 1/2]`.
pub fn threshold_from_bias(p: f64) -> Result<f64> {
    if !(p > 0.0 && p <= 0.5) {
        return Err(Error::domain(format!("bias must lie in (0, 1/2], got {p}")));
    }
    if p == 0.5 {
        return Ok(0.0);
    }
    Ok(-gaussian_quantile(p)?)
}

/// Problem with `w*` uniform on the sphere (a normalized standard Gaussian
/// vector from the target substream of `seed`).
pub fn random_problem(d: usize, t: f64, eta: f64, seed: Seed) -> Result<ProblemSpec> {
    if d == 0 {
        return Err(Error::domain("dimension must be at least 1"));
    }
    check_eta(eta)?;
    if !t.is_finite() {
        return Err(Error::domain(format!("threshold must be finite, got {t}")));
    }
    let coords: Vec<f64> = seed.derive(TAG_TARGET, 0).gaussian_stream().take(d).collect();
    let w = UnitVector::new(coords)?;
    ProblemSpec::new(Halfspace::new(w, t), eta, seed)
}

/// Sequential reader over the infinite sample sequence of a problem.
#[derive(Debug, Clone)]
pub struct SampleCursor {
    spec: ProblemSpec,
    block: u64,
    offset: usize,
    features: GaussianStream,
    flips: SplitMix64,
}

impl SampleCursor {
    pub fn new(spec: ProblemSpec) -> Self {
        Self::at_block(spec, 0)
    }

    fn at_block(spec: ProblemSpec, block: u64) -> Self {
        let features = spec.seed.derive(TAG_FEATURES, block).gaussian_stream();
        let flips = spec.seed.derive(TAG_FLIPS, block).uniform_stream();
        Self {
            spec,
            block,
            offset: 0,
            features,
            flips,
        }
    }

    /// Global index of the next sample.
    pub fn position(&self) -> u64 {
        self.block * BLOCK_SIZE as u64 + self.offset as u64
    }

    pub fn spec(&self) -> &ProblemSpec {
        &self.spec
    }

    /// Writes the next feature vector into `x` and returns its noisy label.
    pub fn next_into(&mut self, x: &mut [f64]) -> i8 {
        if self.offset == BLOCK_SIZE {
            let spec = self.spec.clone();
            *self = Self::at_block(spec, self.block + 1);
        }
        self.features.fill(x);
        let clean = self.spec.target.predict(x);
        let flip = self.flips.next_f64() < self.spec.eta;
        self.offset += 1;
        if flip {
            -clean
        } else {
            clean
        }
    }

    pub fn take(&mut self, n: usize) -> Dataset {
        let d = self.spec.d;
        let mut out = Dataset::with_capacity(d, n);
        let mut x = vec![0.0; d];
        for _ in 0..n {
            let y = self.next_into(&mut x);
            out.features.extend_from_slice(&x);
            out.labels.push(y);
        }
        out
    }
}

/// The first `n` samples of `spec`'s sample sequence.
pub fn generate(spec: &ProblemSpec, n: usize) -> Result<Dataset> {
    if n == 0 {
        return Err(Error::domain("sample count must be at least 1"));
    }
    Ok(generate_range(spec, 0, n))
}

/// Samples `start..start+n` of `spec`'s sample sequence, generated block by
/// block (in parallel when enabled) and concatenated in order.
pub fn generate_range(spec: &ProblemSpec, start: u64, n: usize) -> Dataset {
    let mut out = Dataset::with_capacity(spec.d, n);
    if n == 0 {
        return out;
    }
    let bs = BLOCK_SIZE as u64;
    let end = start + n as u64;
    let first = start / bs;
    let last = (end - 1) / bs;
    let parts = map_chunks((last - first + 1) as usize, |i| {
        let b = first + i as u64;
        let lo = start.max(b * bs);
        let hi = end.min((b + 1) * bs);
        let mut cursor = SampleCursor::at_block(spec.clone(), b);
        let skip = (lo - b * bs) as usize;
        if skip > 0 {
            let mut scratch = vec![0.0; spec.d];
            for _ in 0..skip {
                cursor.next_into(&mut scratch);
            }
        }
        cursor.take((hi - lo) as usize)
    });
    for part in parts {
        out.features.extend_from_slice(&part.features);
        out.labels.extend_from_slice(&part.labels);
    }
    out
}

/// Metadata line of the v1 dataset file format.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetHeader {
    pub d: usize,
    pub n: usize,
    pub seed: Seed,
    pub eta: f64,
    pub t: f64,
}

const MAGIC: &str = "# halfspace-rcn v1";

/// 17 significant digits: always enough to round-trip an `f64`.
pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "nan".to_string()
    } else if x > 0.0 {
        "inf".to_string()
    } else {
        "-inf".to_string()
    }
}

pub fn parse_f64(s: &str) -> Option<f64> {
    match s.trim() {
        "inf" | "+inf" => Some(f64::INFINITY),
        "-inf" => Some(f64::NEG_INFINITY),
        other => other.parse().ok(),
    }
}

/// Writes the header line followed by one `y,x_1,…,x_d` line per sample.
pub fn write_dataset<W: Write>(mut out: W, header: &DatasetHeader, data: &Dataset) -> Result<()> {
    check_dim(header.d, data.dim())?;
    check_dim(header.n, data.len())?;
    writeln!(
        out,
        "{MAGIC} d={} n={} seed={} eta={} t={}",
        header.d,
        header.n,
        header.seed,
        fmt_f64(header.eta),
        fmt_f64(header.t)
    )?;
    let mut line = String::new();
    for (x, y) in data.iter() {
        line.clear();
        line.push_str(if y > 0 { "1" } else { "-1" });
        for v in x {
            line.push(',');
            line.push_str(&fmt_f64(*v));
        }
        line.push('\n');
        out.write_all(line.as_bytes())?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_dataset<R: BufRead>(input: R) -> Result<(DatasetHeader, Dataset)> {
    let mut lines = input.lines();
    let first = lines.next().ok_or_else(|| Error::parse(1, "empty dataset file"))??;
    let header = parse_header(&first)?;
    let mut data = Dataset::with_capacity(header.d, header.n);
    for (idx, line) in lines.enumerate() {
        let lineno = idx + 2;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let mut fields = line.split(',');
        let y = match fields.next().map(str::trim) {
            Some("1") | Some("+1") => 1,
            Some("-1") => -1,
            other => return Err(Error::parse(lineno, format!("bad label {other:?}"))),
        };
        let start = data.features.len();
        for f in fields {
            let v = parse_f64(f).ok_or_else(|| Error::parse(lineno, format!("bad number {f:?}")))?;
            data.features.push(v);
        }
        let got = data.features.len() - start;
        if got != header.d {
            return Err(Error::parse(
                lineno,
                format!("expected {} features, found {got}", header.d),
            ));
        }
        data.labels.push(y);
    }
    if data.len() != header.n {
        return Err(Error::parse(
            header.n + 1,
            format!("header promises {} samples, file has {}", header.n, data.len()),
        ));
    }
    Ok((header, data))
}

fn parse_header(line: &str) -> Result<DatasetHeader> {
    let rest = line
        .strip_prefix(MAGIC)
        .ok_or_else(|| Error::parse(1, format!("missing '{MAGIC}' header")))?;
    let (mut d, mut n, mut seed, mut eta, mut t) = (None, None, None, None, None);
    for tok in rest.split_whitespace() {
        let (k, v) = tok
            .split_once('=')
            .ok_or_else(|| Error::parse(1, format!("bad header token {tok:?}")))?;
        let bad = || Error::parse(1, format!("bad value for {k}: {v:?}"));
        match k {
            "d" => d = Some(v.parse::<usize>().map_err(|_| bad())?),
            "n" => n = Some(v.parse::<usize>().map_err(|_| bad())?),
            "seed" => seed = Some(Seed(v.parse::<u64>().map_err(|_| bad())?)),
            "eta" => eta = Some(parse_f64(v).ok_or_else(bad)?),
            "t" => t = Some(parse_f64(v).ok_or_else(bad)?),
            _ => return Err(Error::parse(1, format!("unknown header key {k:?}"))),
        }
    }
    let missing = |k: &str| Error::parse(1, format!("header is missing {k}"));
    let d = d.ok_or_else(|| missing("d"))?;
    if d == 0 {
        return Err(Error::parse(1, "dimension must be positive"));
    }
    Ok(DatasetHeader {
        d,
        n: n.ok_or_else(|| missing("n"))?,
        seed: seed.ok_or_else(|| missing("seed"))?,
        eta: eta.ok_or_else(|| missing("eta"))?,
        t: t.ok_or_else(|| missing("t"))?,
    })
}
