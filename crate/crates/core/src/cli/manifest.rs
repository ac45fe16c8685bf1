use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::Result;

#[derive(Debug, Clone, Serialize)]
pub struct OutputFile {
    pub path: String,
    pub sha256: String,
    pub bytes: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct Timing {
    pub operation: String,
    pub seconds: f64,
}

/// Record of one run, written as `manifest.json` next to the outputs.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub config: BTreeMap<String, String>,
    pub timings: Vec<Timing>,
    pub fitted: BTreeMap<String, f64>,
    pub warnings: Vec<String>,
    pub outputs: Vec<OutputFile>,
}

impl RunManifest {
    pub fn new(command: &str) -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            command: command.into(),
            config: BTreeMap::new(),
            timings: Vec::new(),
            fitted: BTreeMap::new(),
            warnings: Vec::new(),
            outputs: Vec::new(),
        }
    }

    pub fn time<T>(&mut self, operation: &str, f: impl FnOnce() -> T) -> T {
        let t0 = std::time::Instant::now();
        let out = f();
        self.timings.push(Timing { operation: operation.into(), seconds: t0.elapsed().as_secs_f64() });
        out
    }
}

/// Output files held in memory until the run succeeds.
#[derive(Debug, Default)]
pub struct Outputs {
    files: Vec<(String, Vec<u8>)>,
}

impl Outputs {
    pub fn add(&mut self, name: &str, bytes: Vec<u8>) {
        self.files.push((name.into(), bytes));
    }

    pub fn add_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let mut v = serde_json::to_vec_pretty(value).map_err(|e| crate::Error::Config(format!("serialization: {e}")))?;
        v.push(b'\n');
        self.add(name, v);
        Ok(())
    }

    /// Writes every file and then the manifest listing their digests.
    pub fn write(self, dir: &Path, mut manifest: RunManifest) -> Result<RunManifest> {
        fs::create_dir_all(dir)?;
        for (name, bytes) in &self.files {
            fs::write(dir.join(name), bytes)?;
            manifest.outputs.push(OutputFile {
                path: name.clone(),
                sha256: hex(&Sha256::digest(bytes)),
                bytes: bytes.len(),
            });
        }
        let mut m = serde_json::to_vec_pretty(&manifest).map_err(|e| crate::Error::Config(format!("serialization: {e}")))?;
        m.push(b'\n');
        fs::write(dir.join("manifest.json"), m)?;
        Ok(manifest)
    }
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn digest_of_empty_input() {
        assert_eq!(hex(&Sha256::digest(b"")), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    }
}
