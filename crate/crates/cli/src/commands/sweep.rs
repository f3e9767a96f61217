use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use clap::Args;
use hrcn_core::learner::{evaluate, learn, planned_samples};
use hrcn_core::source::{SampleSource, StreamSource};
use hrcn_core::synthetic::{fmt_f64, generate_range, random_problem};
use hrcn_core::{Error, Result, Seed};

use super::TuningArgs;
use crate::manifest::RunManifest;
use crate::output::create;

const TAG_SWEEP: u64 = 0x5357_4545_5000;

pub const SWEEP_CSV_HEADER: &str = "setting_id,d,t,eta,eps,trial,seed,samples_used,test_error,wall_ms";

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long, env = "HRCN_D", default_value_t = 20)]
    pub d: usize,
    #[arg(long, value_delimiter = ',', required = true, allow_hyphen_values = true)]
    pub eps_list: Vec<f64>,
    #[arg(long, value_delimiter = ',', required = true, allow_hyphen_values = true)]
    pub t_list: Vec<f64>,
    #[arg(long, value_delimiter = ',', required = true)]
    pub eta_list: Vec<f64>,
    #[arg(long, env = "HRCN_TRIALS", default_value_t = 1)]
    pub trials: usize,
    #[arg(long, env = "HRCN_SEED", default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub tuning: TuningArgs,
    /// Report the planned sample sizes without running the learner.
    #[arg(long)]
    pub formula_only: bool,
    /// Leave `wall_ms` empty so reruns are byte-identical.
    #[arg(long)]
    pub no_timing: bool,
    /// Fresh samples per trial for `test_error`.
    #[arg(long, env = "HRCN_FRESH_TEST", default_value_t = 20_000)]
    pub fresh_test: usize,
    #[arg(long)]
    pub out: PathBuf,
}

struct Setting {
    t: f64,
    eta: f64,
    eps: f64,
}

pub fn run(a: &SweepArgs) -> Result<()> {
    let mut manifest = RunManifest::start("sweep", Some(Seed(a.seed)));
    if a.eps_list.is_empty() || a.t_list.is_empty() || a.eta_list.is_empty() {
        return Err(Error::Domain("eps, t and eta lists must be non-empty".into()));
    }
    if a.trials == 0 {
        return Err(Error::Domain("trials must be at least 1".into()));
    }
    let mut settings = Vec::new();
    for &eta in &a.eta_list {
        for &t in &a.t_list {
            for &eps in &a.eps_list {
                settings.push(Setting { t, eta, eps });
            }
        }
    }
    for s in &settings {
        a.tuning.config(s.eps, Some(s.eta))?;
    }

    let mut out = create(&a.out)?;
    writeln!(out, "{SWEEP_CSV_HEADER}")?;
    let mut total_samples = 0;
    for (id, s) in settings.iter().enumerate() {
        let config = a.tuning.config(s.eps, Some(s.eta))?;
        for trial in 0..a.trials {
            let seed = Seed(a.seed).derive(TAG_SWEEP + id as u64, trial as u64);
            let started = Instant::now();
            let (samples_used, test_error) = if a.formula_only {
                (planned_samples(a.d, s.t, s.eta, &config)?.total, String::new())
            } else {
                let spec = random_problem(a.d, s.t, s.eta, seed)?;
                let mut src = StreamSource::new(spec.clone());
                let report = learn(&mut src, &config)?;
                let error = if a.fresh_test > 0 {
                    let fresh = generate_range(&spec, src.drawn() as u64, a.fresh_test);
                    fmt_f64(evaluate(&report.hypothesis, &fresh)?)
                } else {
                    String::new()
                };
                (report.samples_used, error)
            };
            let wall = if a.no_timing || a.formula_only {
                String::new()
            } else {
                started.elapsed().as_millis().to_string()
            };
            total_samples += samples_used;
            writeln!(
                out,
                "{id},{},{},{},{},{trial},{},{samples_used},{test_error},{wall}",
                a.d,
                fmt_f64(s.t),
                fmt_f64(s.eta),
                fmt_f64(s.eps),
                seed.0
            )?;
        }
    }
    out.flush()?;
    manifest.samples_used = total_samples;
    manifest.finish(&[&a.out])
}
