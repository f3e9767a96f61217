use std::fs::File;
use std::io::{BufReader, Write};
use std::path::PathBuf;

use clap::Args;
use hrcn_core::learner::{evaluate, read_model};
use hrcn_core::synthetic::{fmt_f64, read_dataset};
use hrcn_core::Result;

use crate::output::human;

pub const EVAL_CSV_HEADER: &str = "model,data,n,error";

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub data: PathBuf,
    /// Append a CSV row (header written when the file is new).
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

pub fn run(a: &EvalArgs) -> Result<()> {
    let model = read_model(&std::fs::read_to_string(&a.model)?)?;
    let (_, data) = read_dataset(BufReader::new(File::open(&a.data)?))?;
    let error = evaluate(&model, &data)?;
    println!("error={}", human(error));
    if let Some(path) = &a.csv {
        let fresh = !path.exists();
        let mut f = std::fs::OpenOptions::new().create(true).append(true).open(path)?;
        if fresh {
            writeln!(f, "{EVAL_CSV_HEADER}")?;
        }
        writeln!(
            f,
            "{},{},{},{}",
            a.model.display(),
            a.data.display(),
            data.len(),
            fmt_f64(error)
        )?;
    }
    Ok(())
}
