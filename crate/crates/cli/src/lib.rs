//! Library side of the `mmc` command-line tool.
//!
//! Commands are executed into an [`Outcome`] without touching the file
//! system; [`run`] then writes the outputs and, when asked, a manifest with
//! their SHA-256 digests. `mmc replay` re-executes the recorded arguments and
//! compares digests.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 invalid arguments or input, 3 an
//! optimizer did not converge, 4 a verification or replay mismatch.

pub mod args;
mod commands;
pub mod files;

use std::path::PathBuf;

use clap::Parser;
use serde_json::Value;

pub use args::{Cli, Command};
pub use commands::execute;
use files::{default_manifest_path, json_bytes, sha256_hex, Manifest, OutputDigest, MANIFEST_SCHEMA};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] mmc_core::Error),
    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Core(mmc_core::Error::NotConverged(_) | mmc_core::Error::OracleNotConverged { .. }) => 3,
            CliError::Core(_) => 2,
            CliError::Io(_) => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Ok,
    NotConverged,
    Mismatch,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Ok => 0,
            Status::NotConverged => 3,
            Status::Mismatch => 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Artifact {
    pub path: PathBuf,
    pub bytes: Vec<u8>,
}

#[derive(Debug, Clone)]
pub struct Outcome {
    /// Printed to stdout.
    pub report: Value,
    pub artifacts: Vec<Artifact>,
    pub status: Status,
    pub seed: Option<u64>,
}

impl Outcome {
    /// Outputs covered by a manifest: the written files, or stdout (`-`) when
    /// nothing is written.
    pub fn digests(&self) -> Vec<OutputDigest> {
        if self.artifacts.is_empty() {
            vec![OutputDigest {
                path: PathBuf::from("-"),
                sha256: sha256_hex(&json_bytes(&self.report)),
            }]
        } else {
            self.artifacts
                .iter()
                .map(|a| OutputDigest {
                    path: a.path.clone(),
                    sha256: sha256_hex(&a.bytes),
                })
                .collect()
        }
    }
}

/// Parses arguments that follow the program name.
pub fn parse(argv: &[String]) -> Result<Cli, CliError> {
    Cli::try_parse_from(std::iter::once("mmc".to_string()).chain(argv.iter().cloned()))
        .map_err(|e| CliError::Usage(e.to_string()))
}

fn command_name(command: &Command) -> &'static str {
    match command {
        Command::Capacity(_) => "capacity",
        Command::Simulate(_) => "simulate",
        Command::Sweep(_) => "sweep",
        Command::Oracle(args::OracleCommand::CapacityCompare(_)) => "oracle capacity-compare",
        Command::Oracle(args::OracleCommand::VerifyLemmas(_)) => "oracle verify-lemmas",
        Command::Oracle(args::OracleCommand::Randomize(_)) => "oracle randomize",
        Command::Oracle(args::OracleCommand::Example2(_)) => "oracle example2",
        Command::Replay(_) => "replay",
    }
}

fn manifest_path(command: &Command) -> Option<PathBuf> {
    use args::OracleCommand as O;
    let (out, manifest) = match command {
        Command::Capacity(a) => (a.output.out.clone(), a.output.manifest.clone()),
        Command::Simulate(a) => (Some(a.out.clone()), a.manifest.clone()),
        Command::Sweep(a) => (Some(a.out.clone()), a.manifest.clone()),
        Command::Oracle(O::CapacityCompare(a)) => (a.output.out.clone(), a.output.manifest.clone()),
        Command::Oracle(O::VerifyLemmas(a)) => (a.output.out.clone(), a.output.manifest.clone()),
        Command::Oracle(O::Randomize(a)) => (a.output.out.clone(), a.output.manifest.clone()),
        Command::Oracle(O::Example2(a)) => (a.output.out.clone(), a.output.manifest.clone()),
        Command::Replay(_) => (None, None),
    };
    manifest.or_else(|| out.as_deref().map(default_manifest_path))
}

/// Parses, executes, writes outputs and the manifest.
pub fn run(argv: &[String]) -> Result<Outcome, CliError> {
    let cli = parse(argv)?;
    let started = chrono::Utc::now();
    let outcome = execute(&cli.command)?;
    for artifact in &outcome.artifacts {
        files::write(&artifact.path, &artifact.bytes)?;
    }
    if let Some(path) = manifest_path(&cli.command) {
        let manifest = Manifest {
            schema: MANIFEST_SCHEMA.into(),
            tool_version: env!("CARGO_PKG_VERSION").into(),
            command: command_name(&cli.command).into(),
            argv: argv.to_vec(),
            parameters: serde_json::to_value(&cli.command).expect("serializable"),
            seed: outcome.seed,
            started_at: started.to_rfc3339(),
            finished_at: chrono::Utc::now().to_rfc3339(),
            outputs: outcome.digests(),
        };
        files::write(&path, &json_bytes(&manifest))?;
    }
    Ok(outcome)
}
