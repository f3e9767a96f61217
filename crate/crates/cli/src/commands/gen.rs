use std::path::PathBuf;

use clap::{ArgGroup, Args};
use hrcn_core::synthetic::{generate, random_problem, threshold_from_bias, write_dataset, DatasetHeader};
use hrcn_core::{Result, Seed};

use crate::manifest::RunManifest;
use crate::output::create;

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("threshold").args(["t", "bias"]).required(true)))]
pub struct GenArgs {
    #[arg(long, env = "HRCN_D")]
    pub d: usize,
    #[arg(long, env = "HRCN_N")]
    pub n: usize,
    /// Threshold of the target `sign(w*·x + t)`.
    #[arg(long, allow_hyphen_values = true)]
    pub t: Option<f64>,
    /// Target bias `min(P[f = 1], P[f = −1])` in `(0, 1/2]`; converted to a threshold `t ≥ 0`.
    #[arg(long)]
    pub bias: Option<f64>,
    #[arg(long, env = "HRCN_ETA", default_value_t = 0.0)]
    pub eta: f64,
    #[arg(long, env = "HRCN_SEED", default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

pub fn run(a: &GenArgs) -> Result<()> {
    let seed = Seed(a.seed);
    let mut manifest = RunManifest::start("gen", Some(seed));
    let t = match (a.t, a.bias) {
        (Some(t), _) => t,
        (None, Some(p)) => threshold_from_bias(p)?,
        (None, None) => unreachable!("clap requires one of --t/--bias"),
    };
    let spec = random_problem(a.d, t, a.eta, seed)?;
    let data = generate(&spec, a.n)?;
    let header = DatasetHeader {
        d: a.d,
        n: a.n,
        seed,
        eta: a.eta,
        t,
    };
    write_dataset(create(&a.out)?, &header, &data)?;
    manifest.samples_used = a.n;
    manifest.finish(&[&a.out])
}
