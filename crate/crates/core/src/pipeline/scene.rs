use std::path::Path;

use serde::{Deserialize, Serialize};

use super::PipelineError;
use crate::config::ValidatedConfig;
use crate::cube::DataCube;
use crate::sim::{synthesize_capture, NoiseSpec, SceneFrame};

/// Scene description consumed by `simulate`.
///
/// Entries apply from their `frame` until the next entry. `n_frames`
/// defaults to one past the last entry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneFile {
    pub frames: Vec<SceneFrame>,
    #[serde(default)]
    pub noise_power: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub n_frames: Option<usize>,
}

impl SceneFile {
    pub fn from_json(text: &str) -> Result<Self, PipelineError> {
        serde_json::from_str(text).map_err(|e| PipelineError::Config(format!("scene: {e}")))
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self, PipelineError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| PipelineError::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn frame_count(&self) -> usize {
        self.n_frames
            .unwrap_or_else(|| self.frames.iter().map(|f| f.frame as usize + 1).max().unwrap_or(1))
    }

    pub fn synthesize(&self, cfg: &ValidatedConfig) -> Result<Vec<DataCube>, PipelineError> {
        let noise = NoiseSpec {
            noise_power: self.noise_power,
            seed: self.seed,
        };
        synthesize_capture(cfg, &self.frames, &noise, self.frame_count())
            .map_err(|e| PipelineError::Config(format!("scene: {e}")))
    }
}
