use std::path::PathBuf;

use clap::{Args, Subcommand};
use hrcn_core::sq_lab::{
    calibrate, chi_correlation, correlation_bound, correlation_report, distinguisher_sample_size, make_packing,
    mehler_sum, run_trials, DistinguisherSetup, CORRELATION_CSV_HEADER, DEFAULT_CALIBRATION_C, DEFAULT_SAMPLE_CONSTANT,
    VERDICT_CSV_HEADER,
};
use hrcn_core::synthetic::fmt_f64;
use hrcn_core::{Result, Seed};

use crate::manifest::RunManifest;
use crate::output::{human, write_csv};

pub const MEHLER_CSV_HEADER: &str = "rho,x,y,kmax,series,closed,relative_gap";
pub const PACKING_CSV_HEADER: &str = "index,coords";

#[derive(Debug, Subcommand)]
pub enum SqCommand {
    /// Correlation series, closed-form bound and optional Monte Carlo.
    Corr(CorrArgs),
    /// Closed-form correlation bound only.
    Bound(BoundArgs),
    /// Truncated Mehler sum against its closed form.
    Mehler(MehlerArgs),
    /// Near-orthogonal packing with a certificate.
    Packing(PackingArgs),
    /// χ-correlations of the noisy hard distributions.
    Chi(ChiArgs),
    /// Run the ‖Z_N‖² test on simulated null and planted instances.
    Distinguish(DistinguishArgs),
    /// Fit the threshold constant that balances the two error rates.
    Calibrate(CalibrateArgs),
}

#[derive(Debug, Args)]
pub struct CorrArgs {
    /// Angles in radians (comma-separated).
    #[arg(long, value_delimiter = ',', required = true)]
    pub theta: Vec<f64>,
    /// Thresholds (comma-separated).
    #[arg(long, value_delimiter = ',', required = true, allow_hyphen_values = true)]
    pub t: Vec<f64>,
    #[arg(long, env = "HRCN_KMAX", default_value_t = 400)]
    pub kmax: usize,
    /// Monte Carlo samples per grid point (0 disables).
    #[arg(long, env = "HRCN_MC", default_value_t = 100_000)]
    pub mc: usize,
    #[arg(long, env = "HRCN_SEED", default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BoundArgs {
    #[arg(long)]
    pub theta: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub t: f64,
}

#[derive(Debug, Args)]
pub struct MehlerArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub rho: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub x: f64,
    /// Defaults to `x`.
    #[arg(long, allow_hyphen_values = true)]
    pub y: Option<f64>,
    #[arg(long, env = "HRCN_KMAX", default_value_t = 400)]
    pub kmax: usize,
}

#[derive(Debug, Args)]
pub struct PackingArgs {
    #[arg(long)]
    pub d: usize,
    #[arg(long)]
    pub c: f64,
    #[arg(long)]
    pub m: usize,
    #[arg(long, env = "HRCN_SEED", default_value_t = 0)]
    pub seed: u64,
    #[arg(long, env = "HRCN_MAX_TRIES", default_value_t = 100_000)]
    pub max_tries: usize,
    /// Write the vectors as CSV.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ChiArgs {
    #[arg(long)]
    pub theta: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub t: f64,
    #[arg(long)]
    pub eta: f64,
}

#[derive(Debug, Args)]
pub struct SetupArgs {
    #[arg(long, default_value_t = 400)]
    pub d: usize,
    #[arg(long, default_value_t = 0.2)]
    pub eps: f64,
    #[arg(long, default_value_t = 1.0 / 3.0)]
    pub eta: f64,
    /// Samples per instance; defaults to `⌈C√d/(ε² ln(1/ε))⌉`.
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long, default_value_t = DEFAULT_SAMPLE_CONSTANT)]
    pub sample_constant: f64,
    #[arg(long, env = "HRCN_TRIALS", default_value_t = 100)]
    pub trials: usize,
    #[arg(long, env = "HRCN_SEED", default_value_t = 0)]
    pub seed: u64,
}

impl SetupArgs {
    fn setup(&self) -> Result<DistinguisherSetup> {
        let n = match self.n {
            Some(n) => n,
            None => distinguisher_sample_size(self.d, self.eps, self.sample_constant)?,
        };
        DistinguisherSetup::new(self.d, self.eps, self.eta, n)
    }
}

#[derive(Debug, Args)]
pub struct DistinguishArgs {
    #[command(flatten)]
    pub setup: SetupArgs,
    /// Threshold constant `c`.
    #[arg(long, env = "HRCN_CALIBRATION_C", default_value_t = DEFAULT_CALIBRATION_C)]
    pub c: f64,
    /// Report only planted instances.
    #[arg(long, conflicts_with = "null")]
    pub planted: bool,
    /// Report only null instances.
    #[arg(long)]
    pub null: bool,
    /// Write every verdict as CSV.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CalibrateArgs {
    #[command(flatten)]
    pub setup: SetupArgs,
}

pub fn run(cmd: &SqCommand) -> Result<()> {
    match cmd {
        SqCommand::Corr(a) => corr(a),
        SqCommand::Bound(a) => {
            println!("bound={}", fmt_f64(correlation_bound(a.theta, a.t)?));
            Ok(())
        }
        SqCommand::Mehler(a) => {
            let y = a.y.unwrap_or(a.x);
            let v = mehler_sum(a.rho, a.x, y, a.kmax)?;
            let row = [a.rho, a.x, y]
                .iter()
                .map(|v| fmt_f64(*v))
                .chain([
                    a.kmax.to_string(),
                    fmt_f64(v.series),
                    fmt_f64(v.closed),
                    fmt_f64(v.relative_gap),
                ])
                .collect::<Vec<_>>()
                .join(",");
            write_csv(None, MEHLER_CSV_HEADER, &[row])
        }
        SqCommand::Packing(a) => packing(a),
        SqCommand::Chi(a) => {
            let c = chi_correlation(a.theta, a.t, a.eta)?;
            println!("chi_pair={}", human(c.chi_pair));
            println!("chi_self={}", human(c.chi_self));
            println!("cov={}", human(c.cov));
            println!("pair_bound={}", human(c.pair_bound));
            println!("self_bound={}", human(c.self_bound));
            println!("pair_within_bound={}", c.pair_within_bound);
            println!("self_within_bound={}", c.self_within_bound);
            Ok(())
        }
        SqCommand::Distinguish(a) => distinguish(a),
        SqCommand::Calibrate(a) => {
            let setup = a.setup.setup()?;
            let cal = calibrate(&setup, a.setup.trials, Seed(a.setup.seed))?;
            println!("n={}", setup.n);
            println!("c={}", fmt_f64(cal.c));
            println!("threshold={}", human(cal.threshold));
            println!("null_error={}", human(cal.null_error));
            println!("planted_error={}", human(cal.planted_error));
            Ok(())
        }
    }
}

fn corr(a: &CorrArgs) -> Result<()> {
    let manifest = RunManifest::start("sq corr", Some(Seed(a.seed)));
    let mc = (a.mc > 0).then_some(a.mc);
    let mut rows = Vec::new();
    for (i, &theta) in a.theta.iter().enumerate() {
        for (j, &t) in a.t.iter().enumerate() {
            let seed = Seed(a.seed).derive(i as u64, j as u64);
            rows.push(correlation_report(theta, t, a.kmax, mc, seed)?.csv());
        }
    }
    write_csv(a.out.as_deref(), CORRELATION_CSV_HEADER, &rows)?;
    match &a.out {
        Some(p) => manifest.finish(&[p]),
        None => Ok(()),
    }
}

fn packing(a: &PackingArgs) -> Result<()> {
    let manifest = RunManifest::start("sq packing", Some(Seed(a.seed)));
    let p = make_packing(a.d, a.c, a.m, Seed(a.seed), a.max_tries)?;
    println!("vectors={}", p.vectors.len());
    println!(
        "certificate: max_abs_inner={} < threshold={}",
        human(p.max_abs_inner),
        human(p.threshold)
    );
    if let Some(path) = &a.out {
        let rows: Vec<String> = p
            .vectors
            .iter()
            .enumerate()
            .map(|(i, v)| {
                let coords: Vec<String> = v.as_slice().iter().map(|x| fmt_f64(*x)).collect();
                format!("{i},{}", coords.join(";"))
            })
            .collect();
        write_csv(Some(path), PACKING_CSV_HEADER, &rows)?;
        manifest.finish(&[path])?;
    }
    Ok(())
}

fn distinguish(a: &DistinguishArgs) -> Result<()> {
    let manifest = RunManifest::start("sq distinguish", Some(Seed(a.setup.seed)));
    let setup = a.setup.setup()?;
    let tally = run_trials(&setup, a.setup.trials, a.c, Seed(a.setup.seed))?;
    println!("n={}", setup.n);
    println!("threshold={}", human(tally.threshold));
    if !a.planted {
        println!(
            "null_accuracy={} ({}/{})",
            human(tally.null_accuracy()),
            tally.null_correct,
            tally.trials
        );
    }
    if !a.null {
        println!(
            "planted_accuracy={} ({}/{})",
            human(tally.planted_accuracy()),
            tally.planted_correct,
            tally.trials
        );
    }
    if let Some(path) = &a.out {
        let rows: Vec<String> = tally
            .csv_rows()
            .into_iter()
            .filter(|r| {
                let case = r.split(',').nth(1).unwrap_or_default();
                !(a.planted && case == "null" || a.null && case == "planted")
            })
            .collect();
        write_csv(Some(path), VERDICT_CSV_HEADER, &rows)?;
        manifest.finish(&[path])?;
    }
    Ok(())
}
