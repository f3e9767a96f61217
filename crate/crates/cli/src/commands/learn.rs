use std::fs::File;
use std::io::{BufReader, Write};
use std::path::PathBuf;

use clap::{ArgGroup, Args};
use hrcn_core::learner::{evaluate, learn, write_model, LearnReport};
use hrcn_core::source::{DatasetSource, SampleSource, StreamSource};
use hrcn_core::synthetic::{fmt_f64, generate_range, read_dataset};
use hrcn_core::Result;
use serde_json::{json, Value};

use super::{StreamSpec, TuningArgs};
use crate::manifest::RunManifest;
use crate::output::{create, human};

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("input").args(["data", "stream"]).required(true)))]
#[command(group(ArgGroup::new("noise").args(["eta", "unknown_eta"]).required(true)))]
pub struct LearnArgs {
    /// Dataset file; samples are consumed in file order.
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Generate samples on demand: `d=20,t=1,eta=0.2,seed=7`.
    #[arg(long, env = "HRCN_STREAM")]
    pub stream: Option<String>,
    #[arg(long, env = "HRCN_EPS", default_value_t = 0.1)]
    pub eps: f64,
    /// Known noise rate.
    #[arg(long, env = "HRCN_ETA")]
    pub eta: Option<f64>,
    /// Estimate the noise rate and search over noise guesses.
    #[arg(long)]
    pub unknown_eta: bool,
    #[command(flatten)]
    pub tuning: TuningArgs,
    /// Fresh samples used to report the final error in stream mode.
    #[arg(long, env = "HRCN_FRESH_TEST", default_value_t = 100_000)]
    pub fresh_test: usize,
    #[arg(long)]
    pub out_model: Option<PathBuf>,
    #[arg(long)]
    pub out_report: Option<PathBuf>,
}

pub fn run(a: &LearnArgs) -> Result<()> {
    let mut manifest = RunManifest::start("learn", None);
    let config = a.tuning.config(a.eps, if a.unknown_eta { None } else { a.eta })?;
    let (report, source, fresh_error, seed) = match (&a.data, &a.stream) {
        (Some(path), _) => {
            let (header, data) = read_dataset(BufReader::new(File::open(path)?))?;
            let mut src = DatasetSource::new(data);
            let report = learn(&mut src, &config)?;
            let source = json!({"kind": "file", "path": path.display().to_string(), "header_seed": header.seed.0});
            (report, source, None, header.seed)
        }
        (None, Some(text)) => {
            let stream = StreamSpec::parse(text)?;
            let spec = stream.problem()?;
            let mut src = StreamSource::new(spec.clone());
            let report = learn(&mut src, &config)?;
            let fresh_error = if a.fresh_test > 0 {
                let fresh = generate_range(&spec, src.drawn() as u64, a.fresh_test);
                Some(evaluate(&report.hypothesis, &fresh)?)
            } else {
                None
            };
            let source = json!({
                "kind": "stream",
                "d": stream.d,
                "t": fmt_f64(stream.t),
                "eta": stream.eta,
                "seed": stream.seed.0,
            });
            (report, source, fresh_error, stream.seed)
        }
        (None, None) => unreachable!("clap requires --data or --stream"),
    };
    manifest.seed = Some(seed);
    manifest.samples_used = report.samples_used;
    print_summary(&report, fresh_error);

    let mut outputs = Vec::new();
    if let Some(path) = &a.out_model {
        write_model(create(path)?, &report.hypothesis)?;
        outputs.push(path.as_path());
    }
    if let Some(path) = &a.out_report {
        let mut doc = report.to_json(&config);
        if let Value::Object(map) = &mut doc {
            map.insert("source".into(), source);
            map.insert("fresh_error".into(), json!(fresh_error));
            map.insert("fresh_test_samples".into(), json!(fresh_error.map(|_| a.fresh_test)));
        }
        let mut out = create(path)?;
        writeln!(
            out,
            "{}",
            serde_json::to_string_pretty(&doc).expect("report serializes")
        )?;
        out.flush()?;
        outputs.push(path.as_path());
    }
    manifest.finish(&outputs)
}

fn print_summary(r: &LearnReport, fresh_error: Option<f64>) {
    println!("samples_used={}", r.samples_used);
    println!("grid_size={}", r.grid_size);
    println!("p_hat={}", human(r.p_hat));
    println!("eta_used={}", human(r.eta_used));
    println!("threshold={}", human(r.hypothesis.t));
    println!("constant={}", r.hypothesis.constant().as_str());
    if let Some(c) = r.candidates.get(r.selected_index) {
        println!("selection_error={}", human(c.error));
    }
    if let Some(e) = fresh_error {
        println!("fresh_error={}", human(e));
    }
}
