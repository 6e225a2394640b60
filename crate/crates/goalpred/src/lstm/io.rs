//! Versioned model container. The layout is documented in
//! `docs/model-format.md`; it is a single JSON document holding the network
//! shape, the feature configuration, the normalizer and every weight tensor.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{LstmParams, NetworkConfig};
use crate::error::{Error, Result};
use crate::features::{FeatureConfig, NormStats};

pub const MODEL_MAGIC: &str = "goalpred-model";
pub const MODEL_VERSION: u32 = 1;

/// Everything needed to run inference, in one self-describing file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub magic: String,
    pub version: u32,
    /// Variant name the model was trained as ("lstm_buff", ...), if any.
    pub variant: Option<String>,
    pub network: NetworkConfig,
    pub features: FeatureConfig,
    pub norm: NormStats,
    pub params: LstmParams,
    /// Buffered variants: frames per inference window.
    pub buffer_len: Option<usize>,
    /// Enhanced decision rule thresholds, when grid-searched.
    pub score_threshold: Option<f64>,
    pub gaze_threshold_m: Option<f64>,
}

impl ModelFile {
    pub fn new(
        network: NetworkConfig,
        features: FeatureConfig,
        norm: NormStats,
        params: LstmParams,
    ) -> ModelFile {
        ModelFile {
            magic: MODEL_MAGIC.to_string(),
            version: MODEL_VERSION,
            variant: None,
            network,
            features,
            norm,
            params,
            buffer_len: None,
            score_threshold: None,
            gaze_threshold_m: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.magic != MODEL_MAGIC {
            return Err(Error::Model(format!(
                "bad magic `{}` (expected `{MODEL_MAGIC}`)",
                self.magic
            )));
        }
        if self.version != MODEL_VERSION {
            return Err(Error::Model(format!(
                "unsupported model version {} (expected {MODEL_VERSION})",
                self.version
            )));
        }
        if self.params.input_size != self.network.input_size
            || self.params.hidden_units != self.network.hidden_units
            || self.network.input_size != self.features.channels.len()
        {
            return Err(Error::Model("inconsistent shapes in model file".into()));
        }
        if !self.params.is_finite() {
            return Err(Error::Model("model contains non-finite weights".into()));
        }
        Ok(())
    }
}

/// Writes the model as deterministic pretty-printed JSON. f64 values
/// round-trip exactly through the shortest-representation encoding.
pub fn save_model(model: &ModelFile, path: &Path) -> Result<()> {
    model.validate()?;
    let mut text = serde_json::to_string_pretty(model)
        .map_err(|e| Error::Model(format!("serialize failed: {e}")))?;
    text.push('\n');
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn load_model(path: &Path) -> Result<ModelFile> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let model: ModelFile = serde_json::from_str(&text)
        .map_err(|e| Error::Model(format!("corrupt model file: {e}")))?;
    model.validate()?;
    Ok(model)
}
