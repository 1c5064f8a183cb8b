//! Run manifests: every artifact-producing invocation writes one JSON file
//! describing the command, the configuration snapshot and the outputs, and
//! every artifact carries the manifest's file name. Re-running the manifest's
//! command reproduces the artifacts byte for byte.

use serde::Serialize;
use std::path::{Path, PathBuf};

#[derive(Serialize)]
pub struct RunManifest {
    pub command: String,
    pub scene: String,
    pub config: serde_json::Value,
    pub seed: u64,
    pub version: String,
    pub outputs: Vec<String>,
}

impl RunManifest {
    pub fn new(scene: &str, seed: u64, config: serde_json::Value) -> Self {
        let command = std::env::args().collect::<Vec<_>>().join(" ");
        RunManifest {
            command,
            scene: scene.to_string(),
            config,
            seed,
            version: env!("CARGO_PKG_VERSION").to_string(),
            outputs: Vec::new(),
        }
    }

    pub fn add_output(&mut self, path: &Path) {
        self.outputs.push(path.display().to_string());
    }

    /// Writes `<primary output stem>.manifest.json` next to the first output
    /// and returns its file name (what artifacts reference).
    pub fn write_next_to(&self, primary: &Path) -> std::io::Result<String> {
        let path = manifest_path(primary);
        let text = serde_json::to_string_pretty(self).expect("manifest serializes");
        std::fs::write(&path, text)?;
        Ok(path
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_default())
    }
}

pub fn manifest_path(primary: &Path) -> PathBuf {
    let stem = primary
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "run".into());
    primary.with_file_name(format!("{stem}.manifest.json"))
}

/// The comment line placed in CSV headers and PPM comments.
pub fn manifest_ref(name: &str) -> String {
    format!("manifest: {name}")
}
