use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::TrainError;
use crate::detection::{total_loss, LossBreakdown};

pub const CHECKPOINT_FORMAT: &str = "handforge-checkpoint";
pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub epoch: usize,
    pub parameters: Vec<f64>,
    pub val_loss: LossBreakdown,
}

impl Checkpoint {
    pub fn val_total(&self) -> f64 {
        total_loss(&self.val_loss)
    }
}

/// JSON document on disk. Floats are written in shortest round-trip form,
/// so parameters reload bit-for-bit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckpointFile {
    pub format: String,
    pub version: u32,
    pub model: String,
    #[serde(default)]
    pub metadata: BTreeMap<String, String>,
    pub checkpoint: Checkpoint,
}

impl CheckpointFile {
    pub fn new(model: impl Into<String>, checkpoint: Checkpoint) -> Self {
        CheckpointFile {
            format: CHECKPOINT_FORMAT.into(),
            version: CHECKPOINT_VERSION,
            model: model.into(),
            metadata: BTreeMap::new(),
            checkpoint,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("checkpoint serializes") + "\n"
    }

    pub fn from_json(text: &str) -> Result<Self, TrainError> {
        let f: CheckpointFile = serde_json::from_str(text).map_err(|e| TrainError::Checkpoint(e.to_string()))?;
        if f.format != CHECKPOINT_FORMAT {
            return Err(TrainError::Checkpoint(format!("not a checkpoint (format {:?})", f.format)));
        }
        if f.version != CHECKPOINT_VERSION {
            return Err(TrainError::Checkpoint(format!("unsupported version {}", f.version)));
        }
        Ok(f)
    }

    pub fn save(&self, path: &Path) -> Result<(), TrainError> {
        std::fs::write(path, self.to_json()).map_err(|source| TrainError::Io {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn load(path: &Path) -> Result<Self, TrainError> {
        let text = std::fs::read_to_string(path).map_err(|source| TrainError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json(&text)
    }
}
