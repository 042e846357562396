use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};

use super::{FrameOutput, PipelineConfig, PipelineError};
use crate::capture::DropReport;
use crate::range_doppler::{write_map_csv, write_map_pgm};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    /// SHA-256 of [`PipelineConfig::canonical_json`].
    pub config_sha256: String,
    pub seed: u64,
    pub frames: usize,
}

impl RunManifest {
    pub fn new(cfg: &PipelineConfig, frames: usize) -> Self {
        let digest = Sha256::digest(cfg.canonical_json().as_bytes());
        Self {
            tool: "mmwave",
            version: env!("CARGO_PKG_VERSION"),
            config_sha256: digest.iter().map(|b| format!("{b:02x}")).collect(),
            seed: cfg.seed,
            frames,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrameDrops {
    pub frame: u64,
    #[serde(flatten)]
    pub report: DropReport,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct DropsFile {
    pub frames: Vec<FrameDrops>,
    pub totals: DropReport,
    pub queue_overflows: u64,
    pub malformed_datagrams: u64,
}

fn create(path: &Path) -> Result<BufWriter<File>, PipelineError> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| PipelineError::io(path, e))
}

fn finish(mut w: BufWriter<File>, path: &Path) -> Result<(), PipelineError> {
    w.flush().map_err(|e| PipelineError::io(path, e))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), PipelineError> {
    let mut text = serde_json::to_string_pretty(value).expect("serializable");
    text.push('\n');
    fs::write(path, text).map_err(|e| PipelineError::io(path, e))
}

pub fn ensure_dir(dir: &Path) -> Result<(), PipelineError> {
    fs::create_dir_all(dir).map_err(|e| PipelineError::io(dir, e))
}

/// `frame_<i>_points.csv`, `frame_<i>_rd.csv` (dB) and `frame_<i>_rd.pgm`.
pub fn write_frame(dir: &Path, out: &FrameOutput) -> Result<(), PipelineError> {
    let i = out.frame_index;
    let path = dir.join(format!("frame_{i}_points.csv"));
    let mut w = create(&path)?;
    out.cloud.write_csv(&mut w).map_err(|e| PipelineError::io(&path, e))?;
    finish(w, &path)?;

    let path = dir.join(format!("frame_{i}_rd.csv"));
    let mut w = create(&path)?;
    write_map_csv(&out.power.db, &mut w).map_err(|e| PipelineError::io(&path, e))?;
    finish(w, &path)?;

    let path = dir.join(format!("frame_{i}_rd.pgm"));
    let mut w = create(&path)?;
    write_map_pgm(&out.power.db, &mut w).map_err(|e| PipelineError::io(&path, e))?;
    finish(w, &path)
}

pub fn write_manifest(dir: &Path, manifest: &RunManifest) -> Result<(), PipelineError> {
    write_json(&dir.join("run_manifest.json"), manifest)
}

pub fn write_drops(dir: &Path, drops: &DropsFile) -> Result<(), PipelineError> {
    write_json(&dir.join("drops.json"), drops)
}

/// Writes every frame and the manifest.
pub fn write_outputs(dir: &Path, cfg: &PipelineConfig, outputs: &[FrameOutput]) -> Result<(), PipelineError> {
    ensure_dir(dir)?;
    for out in outputs {
        write_frame(dir, out)?;
    }
    write_manifest(dir, &RunManifest::new(cfg, outputs.len()))
}
