//! Run manifests and the per-step training log.

use std::fs::{File, OpenOptions};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use qsr_core::train::StepRecord;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Running,
    Succeeded,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub config: serde_json::Value,
    pub seed: u64,
    /// SHA-256 over the command, config, seed, and every input file.
    pub input_hash: String,
    pub started_at: f64,
    pub finished_at: Option<f64>,
    pub status: RunStatus,
    pub outputs: Vec<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

pub fn unix_time() -> f64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs_f64()).unwrap_or(0.0)
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

impl RunManifest {
    pub fn start(command: &str, config: serde_json::Value, seed: u64, inputs: &[&Path]) -> Result<Self> {
        let mut h = Sha256::new();
        h.update(command.as_bytes());
        h.update([0]);
        h.update(config.to_string().as_bytes());
        h.update(seed.to_le_bytes());
        for p in inputs {
            h.update(crate::read(p)?);
        }
        Ok(Self {
            command: command.into(),
            config,
            seed,
            input_hash: hex::encode(h.finalize()),
            started_at: unix_time(),
            finished_at: None,
            status: RunStatus::Running,
            outputs: Vec::new(),
            error: None,
        })
    }

    pub fn finish(&mut self, error: Option<String>) {
        self.finished_at = Some(unix_time());
        self.status = if error.is_some() { RunStatus::Failed } else { RunStatus::Succeeded };
        self.error = error;
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let json = serde_json::to_vec_pretty(self).map_err(|e| Error::Usage(e.to_string()))?;
        crate::write_atomic(path, &json)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepLine {
    pub step: u64,
    pub epoch: usize,
    pub loss: f64,
    pub lr: f64,
    pub wall_ms: u64,
}

/// Appends one JSON object per optimizer step.
pub struct StepLog {
    path: PathBuf,
    out: BufWriter<File>,
}

impl StepLog {
    pub fn append(path: &Path) -> Result<Self> {
        let file = OpenOptions::new().create(true).append(true).open(path).map_err(|e| Error::io(path, e))?;
        Ok(Self { path: path.to_path_buf(), out: BufWriter::new(file) })
    }

    pub fn record(&mut self, r: &StepRecord, wall_ms: u64) -> Result<()> {
        let line = StepLine { step: r.step, epoch: r.epoch, loss: r.loss, lr: r.lr, wall_ms };
        let json = serde_json::to_string(&line).map_err(|e| Error::Usage(e.to_string()))?;
        writeln!(self.out, "{json}").map_err(|e| Error::io(&self.path, e))
    }

    pub fn flush(&mut self) -> Result<()> {
        self.out.flush().map_err(|e| Error::io(&self.path, e))
    }
}
