use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use mmc_core::RankDistribution;

use crate::CliError;

pub const RANK_DIST_SCHEMA: &str = "mmc-rank-dist/1";
pub const MANIFEST_SCHEMA: &str = "mmc-manifest/1";
pub const SWEEP_SCHEMA: &str = "mmc-sweep/1";

/// Transfer-rank distribution on disk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankDistFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schema: Option<String>,
    pub q: u64,
    pub max_rank: usize,
    pub probs: Vec<f64>,
    #[serde(default)]
    pub meta: Value,
}

impl RankDistFile {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
        let file: RankDistFile = serde_json::from_str(&text)
            .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
        if file.probs.len() != file.max_rank + 1 {
            return Err(CliError::Usage(format!(
                "{}: {} probabilities for max_rank {}",
                path.display(),
                file.probs.len(),
                file.max_rank
            )));
        }
        Ok(file)
    }

    /// Validated and renormalized.
    pub fn distribution(&self) -> Result<RankDistribution, CliError> {
        Ok(RankDistribution::new(self.probs.clone())?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputDigest {
    pub path: PathBuf,
    pub sha256: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    pub schema: String,
    pub tool_version: String,
    pub command: String,
    /// Arguments after the program name, exactly as given.
    pub argv: Vec<String>,
    pub parameters: Value,
    pub seed: Option<u64>,
    pub started_at: String,
    pub finished_at: String,
    pub outputs: Vec<OutputDigest>,
}

impl Manifest {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
        let manifest: Manifest = serde_json::from_str(&text)
            .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
        if manifest.schema != MANIFEST_SCHEMA {
            return Err(CliError::Usage(format!(
                "{}: unsupported manifest schema {}",
                path.display(),
                manifest.schema
            )));
        }
        Ok(manifest)
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes).as_slice())
}

pub fn default_manifest_path(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".manifest.json");
    PathBuf::from(name)
}

pub fn write(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|e| CliError::Io(format!("{}: {e}", parent.display())))?;
    }
    std::fs::write(path, bytes).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

/// Pretty JSON with a trailing newline.
pub fn json_bytes<T: Serialize>(value: &T) -> Vec<u8> {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s.into_bytes()
}
