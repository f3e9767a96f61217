pub mod eval;
pub mod gen;
pub mod learn;
pub mod sq;
pub mod sweep;

use clap::{Args, ValueEnum};
use hrcn_core::learner::LearnConfig;
use hrcn_core::synthetic::{parse_f64, random_problem, threshold_from_bias};
use hrcn_core::{Error, ProblemSpec, Result, Seed};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Preset {
    /// Every sample size at its formula value.
    Full,
    /// Frozen desk-scale stage multipliers and iteration cap.
    Desk,
}

/// Learner knobs shared by `learn` and `sweep`.
#[derive(Debug, Args)]
pub struct TuningArgs {
    #[arg(long, env = "HRCN_DELTA", default_value_t = 0.1)]
    pub delta: f64,
    #[arg(long, value_enum, env = "HRCN_PRESET", default_value_t = Preset::Desk)]
    pub preset: Preset,
    /// Global factor on every sample size.
    #[arg(long, env = "HRCN_SAMPLE_MULTIPLIER", default_value_t = 1.0)]
    pub sample_multiplier: f64,
    #[arg(long, env = "HRCN_SCALE_INIT_LOOP")]
    pub scale_init_loop: Option<f64>,
    #[arg(long, env = "HRCN_SCALE_INIT_FINAL")]
    pub scale_init_final: Option<f64>,
    #[arg(long, env = "HRCN_SCALE_OPTIMIZE")]
    pub scale_optimize: Option<f64>,
    #[arg(long, env = "HRCN_SCALE_TEST")]
    pub scale_test: Option<f64>,
    #[arg(long, env = "HRCN_ITERATION_CAP")]
    pub iteration_cap: Option<usize>,
    #[arg(long, env = "HRCN_GRID_CAP")]
    pub grid_cap: Option<usize>,
}

impl TuningArgs {
    pub fn config(&self, eps: f64, eta: Option<f64>) -> Result<LearnConfig> {
        let mut c = match self.preset {
            Preset::Full => LearnConfig::new(eps, self.delta, eta),
            Preset::Desk => LearnConfig::desk(eps, self.delta, eta),
        };
        c.sample_multiplier = self.sample_multiplier;
        if let Some(v) = self.scale_init_loop {
            c.scales.init_loop = v;
        }
        if let Some(v) = self.scale_init_final {
            c.scales.init_final = v;
        }
        if let Some(v) = self.scale_optimize {
            c.scales.optimize = v;
        }
        if let Some(v) = self.scale_test {
            c.scales.test = v;
        }
        if let Some(v) = self.iteration_cap {
            c.opt.iteration_cap = v;
        }
        if let Some(v) = self.grid_cap {
            c.grid_cap = v;
        }
        c.validate()?;
        Ok(c)
    }
}

/// Inline generation spec `d=<int>,t=<real>|bias=<real>,eta=<real>,seed=<int>`.
#[derive(Debug, Clone, PartialEq)]
pub struct StreamSpec {
    pub d: usize,
    pub t: f64,
    pub eta: f64,
    pub seed: Seed,
}

impl StreamSpec {
    pub fn parse(text: &str) -> Result<Self> {
        let (mut d, mut t, mut bias, mut eta, mut seed) = (None, None, None, None, None);
        for part in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (k, v) = part
                .split_once('=')
                .ok_or_else(|| Error::Domain(format!("stream spec entry {part:?} is not key=value")))?;
            let real = || parse_f64(v).ok_or_else(|| Error::Domain(format!("bad value for {k}: {v:?}")));
            let int = || {
                v.trim()
                    .parse::<u64>()
                    .map_err(|_| Error::Domain(format!("bad value for {k}: {v:?}")))
            };
            match k.trim() {
                "d" => d = Some(int()? as usize),
                "t" => t = Some(real()?),
                "bias" => bias = Some(real()?),
                "eta" => eta = Some(real()?),
                "seed" => seed = Some(Seed(int()?)),
                other => return Err(Error::Domain(format!("unknown stream spec key {other:?}"))),
            }
        }
        let t = match (t, bias) {
            (Some(_), Some(_)) => return Err(Error::Domain("stream spec takes t or bias, not both".into())),
            (Some(t), None) => t,
            (None, Some(p)) => threshold_from_bias(p)?,
            (None, None) => 0.0,
        };
        Ok(Self {
            d: d.ok_or_else(|| Error::Domain("stream spec needs d".into()))?,
            t,
            eta: eta.unwrap_or(0.0),
            seed: seed.unwrap_or(Seed(0)),
        })
    }

    pub fn problem(&self) -> Result<ProblemSpec> {
        random_problem(self.d, self.t, self.eta, self.seed)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stream_spec_round_trip() {
        let s = StreamSpec::parse("d=20,t=1.0,eta=0.2,seed=7").unwrap();
        assert_eq!(
            s,
            StreamSpec {
                d: 20,
                t: 1.0,
                eta: 0.2,
                seed: Seed(7)
            }
        );
        let b = StreamSpec::parse("d=3,bias=0.5").unwrap();
        assert!(b.t.abs() < 1e-12);
        assert!(StreamSpec::parse("d=3,t=1,bias=0.2").is_err());
        assert!(StreamSpec::parse("t=1").is_err());
        assert!(StreamSpec::parse("d=3,colour=red").is_err());
    }
}
