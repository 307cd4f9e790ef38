//! `QSR1` checkpoints: magic, u64 LE header length, JSON header, then the
//! flat parameter vector as little-endian f64.

use std::path::Path;

use qsr_core::model::{ModelConfig, ModelParams};
use qsr_core::params::{ParamSlot, Parameters};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub const MAGIC: &[u8; 4] = b"QSR1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Header {
    pub config: ModelConfig,
    pub layout: Vec<ParamSlot>,
    pub seed: u64,
    pub epoch: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub header: Header,
    pub values: Vec<f64>,
}

impl Checkpoint {
    pub fn from_model(model: &ModelParams, seed: u64, epoch: usize) -> Self {
        Self {
            header: Header { config: model.config.clone(), layout: model.layout(), seed, epoch },
            values: model.flatten(),
        }
    }

    /// Rebuilds the model, checking that the stored layout matches the one
    /// the configuration produces.
    pub fn model(&self) -> Result<ModelParams> {
        let mut model = ModelParams::init(&self.header.config, 0)?;
        if model.layout() != self.header.layout {
            return Err(Error::Format { offset: 12, detail: "parameter layout does not match the configuration".into() });
        }
        model.load_flat(&self.values)?;
        Ok(model)
    }

    pub fn encode(&self) -> Vec<u8> {
        let json = serde_json::to_vec(&self.header).expect("header serializes");
        let mut out = Vec::with_capacity(12 + json.len() + 8 * self.values.len());
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&(json.len() as u64).to_le_bytes());
        out.extend_from_slice(&json);
        for v in &self.values {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out
    }

    pub fn decode(bytes: &[u8]) -> Result<Self> {
        if bytes.get(..4) != Some(MAGIC.as_slice()) {
            return Err(Error::Format { offset: 0, detail: "missing QSR1 magic".into() });
        }
        let len = bytes
            .get(4..12)
            .map(|b| u64::from_le_bytes(b.try_into().unwrap()) as usize)
            .ok_or(Error::Format { offset: 4, detail: "truncated header length".into() })?;
        let end = 12usize.saturating_add(len);
        let json = bytes.get(12..end).ok_or(Error::Format { offset: 12, detail: "truncated JSON header".into() })?;
        let header: Header = serde_json::from_slice(json).map_err(|e| Error::Format { offset: 12, detail: e.to_string() })?;
        let count: usize = header.layout.iter().map(|s| s.len).sum();
        let body = &bytes[end..];
        if body.len() != 8 * count {
            return Err(Error::Format {
                offset: end + body.len().min(8 * count),
                detail: format!("expected {count} f64 values, found {} bytes", body.len()),
            });
        }
        let values = body.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect();
        Ok(Self { header, values })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        crate::write_atomic(path, &self.encode())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::decode(&crate::read(path)?)
    }
}
