//! End-to-end runs: configuration, frame processing on a worker pool,
//! output files and stage benchmarks.
//!
//! Stage order per frame: range FFT, Doppler FFT, power map, optional
//! log-Gabor filter, CFAR, peak grouping, Doppler compensation, per-detection
//! angle estimation, point cloud.

mod bench;
mod config;
mod output;
mod run;
mod scene;

use std::path::Path;

use thiserror::Error;

pub use bench::{bench, synthetic_frames, BenchReport};
pub use config::{AoaMethod, AoaSettings, CfarSettings, LogGaborSettings, PipelineConfig};
pub use output::{
    ensure_dir, write_drops, write_frame, write_manifest, write_outputs, DropsFile, FrameDrops, RunManifest,
};
pub use run::{run_pipeline, FrameOutput, Pipeline, RunOptions, StageTimes, STAGES};
pub use scene::SceneFile;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("config: {0}")]
    Config(String),
    #[error("frame {frame}: {stage}: {message}")]
    Stage {
        frame: u64,
        stage: &'static str,
        message: String,
    },
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

impl PipelineError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        Self::Io {
            path: path.display().to_string(),
            source,
        }
    }
}
