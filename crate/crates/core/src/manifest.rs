//! Provenance header written as the first line of every persisted output.

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ManifestError {
    #[error("output has no '# {{...}}' manifest line")]
    Missing,
    #[error("manifest is not valid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("body checksum {found} does not match manifest {expected}")]
    Checksum { expected: String, found: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub params: Map<String, Value>,
    pub seed: Option<u64>,
    pub model: Option<String>,
    pub version: String,
    /// SHA-256 of everything after the header line.
    pub sha256: String,
}

impl RunManifest {
    pub fn new(command: &str) -> Self {
        RunManifest {
            command: command.to_string(),
            params: Map::new(),
            seed: None,
            model: None,
            version: env!("CARGO_PKG_VERSION").to_string(),
            sha256: String::new(),
        }
    }

    pub fn param(mut self, key: &str, value: impl Serialize) -> Self {
        self.params.insert(
            key.to_string(),
            serde_json::to_value(value).expect("serializable"),
        );
        self
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    pub fn model(mut self, model: &str) -> Self {
        self.model = Some(model.to_string());
        self
    }

    /// Header line plus body, with the body checksum filled in.
    pub fn render(&self, body: &str) -> String {
        let mut m = self.clone();
        m.sha256 = digest(body);
        format!(
            "# {}\n{body}",
            serde_json::to_string(&m).expect("serializable")
        )
    }

    /// Splits a rendered output and checks the body against its checksum.
    pub fn parse(text: &str) -> Result<(RunManifest, &str), ManifestError> {
        let (head, body) = text.split_once('\n').unwrap_or((text, ""));
        let json = head.strip_prefix("# ").ok_or(ManifestError::Missing)?;
        let m: RunManifest = serde_json::from_str(json)?;
        let found = digest(body);
        if found != m.sha256 {
            return Err(ManifestError::Checksum {
                expected: m.sha256,
                found,
            });
        }
        Ok((m, body))
    }
}

pub fn digest(body: &str) -> String {
    hex::encode(Sha256::digest(body.as_bytes()))
}
