use std::fmt;
use std::time::{Duration, Instant};

use super::{run_pipeline, Pipeline, PipelineConfig, PipelineError, RunOptions, STAGES};
use crate::cube::DataCube;
use crate::sim::{synthesize_capture, NoiseSpec, PointTarget, SceneFrame};

#[derive(Debug, Clone, PartialEq)]
pub struct BenchReport {
    pub frames: usize,
    pub workers: usize,
    /// `(stage, mean ms per frame)` in execution order.
    pub stages: Vec<(&'static str, f64)>,
    pub frames_per_second: f64,
}

impl BenchReport {
    pub fn total_ms_per_frame(&self) -> f64 {
        self.stages.iter().map(|(_, ms)| ms).sum()
    }
}

impl fmt::Display for BenchReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{:<20} {:>12}", "stage", "mean_ms/frame")?;
        for (name, ms) in &self.stages {
            writeln!(f, "{name:<20} {ms:>12.3}")?;
        }
        writeln!(f, "{:<20} {:>12.3}", "total", self.total_ms_per_frame())?;
        writeln!(f, "frames: {}  workers: {}", self.frames, self.workers)?;
        writeln!(f, "end_to_end_frames_per_s: {:.2}", self.frames_per_second)
    }
}

/// Three moving targets at fixed fractions of the unambiguous limits, 20 dB
/// per-sample SNR, noise seeded from the config.
pub fn synthetic_frames(cfg: &PipelineConfig, n_frames: usize) -> Result<Vec<DataCube>, PipelineError> {
    let radar = cfg.validate()?;
    let d = radar.derived();
    let amplitude = 1000.0;
    let targets = vec![
        PointTarget::new(0.2 * d.max_range_m, 0.3125 * d.max_unambiguous_velocity_m_s, 20.0, amplitude),
        PointTarget::new(0.5 * d.max_range_m, -0.15 * d.max_unambiguous_velocity_m_s, -35.0, amplitude),
        PointTarget::new(0.08 * d.max_range_m, 0.0, 5.0, amplitude),
    ];
    let scene = [SceneFrame { frame: 0, targets }];
    let noise = NoiseSpec::for_snr(amplitude, 20.0, cfg.seed);
    synthesize_capture(&radar, &scene, &noise, n_frames.max(1))
        .map_err(|e| PipelineError::Config(e.to_string()))
}

/// Times each stage over `frames` sequentially, then the whole pipeline on
/// the worker pool.
pub fn bench(cfg: &PipelineConfig, frames: &[DataCube], opts: &RunOptions) -> Result<BenchReport, PipelineError> {
    let pipeline = Pipeline::new(cfg)?;
    let mut totals = [Duration::ZERO; STAGES.len()];
    for cube in frames {
        let (_, times) = pipeline.process_timed(cube)?;
        for (t, d) in totals.iter_mut().zip(times) {
            *t += d;
        }
    }
    let n = frames.len().max(1) as f64;
    let stages = STAGES
        .iter()
        .zip(totals)
        .map(|(name, t)| (*name, t.as_secs_f64() * 1e3 / n))
        .collect();

    let start = Instant::now();
    run_pipeline(cfg, frames, opts)?;
    let wall = start.elapsed().as_secs_f64();
    Ok(BenchReport {
        frames: frames.len(),
        workers: opts.workers.unwrap_or_else(rayon::current_num_threads),
        stages,
        frames_per_second: frames.len() as f64 / wall.max(1e-9),
    })
}
