//! Run manifests written next to every output file.
//!
//! Output files themselves carry no timing, so repeated seeded runs stay
//! byte-identical; wall-clock time lives only in `<output>.manifest.json`.

use std::path::{Path, PathBuf};
use std::time::Instant;

use hrcn_core::{Result, Seed};
use serde_json::json;

pub struct RunManifest {
    command: String,
    pub seed: Option<Seed>,
    started: Instant,
    pub samples_used: usize,
}

impl RunManifest {
    pub fn start(command: &str, seed: Option<Seed>) -> Self {
        Self {
            command: command.to_string(),
            seed,
            started: Instant::now(),
            samples_used: 0,
        }
    }

    pub fn path_for(output: &Path) -> PathBuf {
        let mut name = output.as_os_str().to_owned();
        name.push(".manifest.json");
        PathBuf::from(name)
    }

    /// Writes the manifest for each of `outputs`.
    pub fn finish(&self, outputs: &[&Path]) -> Result<()> {
        let doc = json!({
            "command": self.command,
            "args": std::env::args().collect::<Vec<_>>(),
            "seed": self.seed.map(|s| s.0),
            "version": hrcn_core::VERSION,
            "wall_clock_ms": self.started.elapsed().as_millis() as u64,
            "samples_used": self.samples_used,
        });
        let text = serde_json::to_string_pretty(&doc).expect("manifest serializes") + "\n";
        for out in outputs {
            std::fs::write(Self::path_for(out), &text)?;
        }
        Ok(())
    }
}
