use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use sha2::{Digest, Sha256};

/// Provenance record of one run. Everything except the timestamps is a
/// function of the command line and its inputs, so outputs that embed
/// the digest stay byte-identical across reruns.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub seed: u64,
    /// sha256 over the command, the seed and every absorbed input.
    pub digest: String,
    pub started_unix: f64,
    pub finished_unix: Option<f64>,
    pub outputs: Vec<String>,
    #[serde(skip)]
    hasher: Sha256,
}

fn now() -> f64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs_f64())
        .unwrap_or(0.0)
}

impl RunManifest {
    pub fn start(command: &str, seed: u64) -> Self {
        let mut hasher = Sha256::new();
        hasher.update(env!("CARGO_PKG_VERSION").as_bytes());
        hasher.update(command.as_bytes());
        hasher.update(seed.to_le_bytes());
        let mut m = RunManifest {
            tool: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            seed,
            digest: String::new(),
            started_unix: now(),
            finished_unix: None,
            outputs: Vec::new(),
            hasher,
        };
        m.refresh();
        m
    }

    /// Fold an input (config text, integral file) into the digest.
    pub fn absorb(&mut self, input: &str) {
        self.hasher.update((input.len() as u64).to_le_bytes());
        self.hasher.update(input.as_bytes());
        self.refresh();
    }

    pub fn finish(&mut self) {
        self.finished_unix = Some(now());
    }

    fn refresh(&mut self) {
        let bytes = self.hasher.clone().finalize();
        self.digest = bytes.iter().map(|b| format!("{b:02x}")).collect();
    }
}
