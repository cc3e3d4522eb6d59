use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensor::Matrix;

use super::config::ModelConfig;
use super::network::SentimentModel;
use super::params::ParamStore;
use super::vocab::Vocab;

pub const CHECKPOINT_FORMAT: &str = "seqcsg-checkpoint";
pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Debug, Serialize, Deserialize)]
struct NamedTensor {
    name: String,
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
struct CheckpointFile {
    format: String,
    version: u32,
    config: ModelConfig,
    vocab: Vocab,
    params: Vec<NamedTensor>,
}

impl SentimentModel {
    pub fn to_json(&self) -> Result<String> {
        let file = CheckpointFile {
            format: CHECKPOINT_FORMAT.into(),
            version: CHECKPOINT_VERSION,
            config: self.config.clone(),
            vocab: self.vocab.clone(),
            params: self
                .params
                .iter()
                .map(|(_, name, m)| NamedTensor {
                    name: name.to_string(),
                    rows: m.rows(),
                    cols: m.cols(),
                    data: m.as_slice().to_vec(),
                })
                .collect(),
        };
        Ok(serde_json::to_string(&file)?)
    }

    /// Parses a checkpoint, checking that every parameter the configuration
    /// requires is present with the right shape.
    pub fn from_json(text: &str) -> Result<Self> {
        let file: CheckpointFile =
            serde_json::from_str(text).map_err(|e| Error::Checkpoint(format!("unreadable checkpoint: {e}")))?;
        if file.format != CHECKPOINT_FORMAT || file.version != CHECKPOINT_VERSION {
            return Err(Error::Checkpoint(format!(
                "unsupported checkpoint {} v{}",
                file.format, file.version
            )));
        }
        let template = SentimentModel::new(file.config.clone(), file.vocab.clone(), 0)?;
        if template.params.len() != file.params.len() {
            return Err(Error::Checkpoint(format!(
                "expected {} tensors, found {}",
                template.params.len(),
                file.params.len()
            )));
        }
        let mut params = ParamStore::new();
        for (expected, t) in template.params.iter().zip(file.params) {
            let (_, name, m) = expected;
            if name != t.name || m.shape() != (t.rows, t.cols) || t.data.len() != t.rows * t.cols {
                return Err(Error::Checkpoint(format!(
                    "tensor {} ({}x{}) does not match expected {name} {:?}",
                    t.name,
                    t.rows,
                    t.cols,
                    m.shape()
                )));
            }
            params.insert(t.name, Matrix::from_vec(t.rows, t.cols, t.data));
        }
        Ok(Self {
            config: file.config,
            vocab: file.vocab,
            params,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::Checkpoint(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }
}
