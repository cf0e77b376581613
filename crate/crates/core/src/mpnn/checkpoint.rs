use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::ModelError;
use crate::dataset::LabelStats;
use crate::error::Result;
use crate::trainkit::TrainedModel;

const FORMAT: &str = "dgnn-checkpoint";
pub const CHECKPOINT_VERSION: u32 = 1;

/// A trained model with everything needed to predict in label units.
///
/// Serialized as JSON; floats are written in shortest round-trip form, so a
/// reloaded checkpoint predicts bit-identically.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    format: String,
    pub version: u32,
    #[serde(flatten)]
    pub model: TrainedModel,
    pub label_stats: Option<LabelStats>,
}

impl Checkpoint {
    pub fn new(model: TrainedModel, label_stats: Option<LabelStats>) -> Self {
        Self {
            format: FORMAT.into(),
            version: CHECKPOINT_VERSION,
            model,
            label_stats,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("checkpoints serialize")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let c: Checkpoint = serde_json::from_str(text)?;
        if c.format != FORMAT {
            return Err(ModelError::Checkpoint(format!("not a checkpoint (format {:?})", c.format)).into());
        }
        if c.version != CHECKPOINT_VERSION {
            return Err(ModelError::Checkpoint(format!("unsupported version {}", c.version)).into());
        }
        Ok(c)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_json())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path)?)
    }
}
