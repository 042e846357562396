use std::time::{Duration, Instant};

use ndarray::{Array2, Axis};
use num_complex::Complex64;
use rayon::prelude::*;

use super::{AoaMethod, PipelineConfig, PipelineError};
use crate::aoa::{
    aoa_fft, angle_grid, bartlett, capon, covariance, default_num_sources, doppler_compensate, music,
    peak_angles, AngleSpectrum, AoaError, VirtualArray,
};
use crate::config::ValidatedConfig;
use crate::cube::DataCube;
use crate::detection::{cfar_map, group_peaks, log_gabor_filter, to_point_cloud, Detection, PointCloud};
use crate::range_doppler::{
    doppler_processing, power_map, range_processing_with, PowerMap, RangeDopplerCube, RangeOptions, DB_FLOOR,
};

/// Processing stages in execution order.
pub const STAGES: [&str; 9] = [
    "range_fft",
    "doppler_fft",
    "power_map",
    "log_gabor",
    "cfar",
    "group_peaks",
    "doppler_compensate",
    "aoa",
    "point_cloud",
];

#[derive(Debug, Clone, PartialEq)]
pub struct FrameOutput {
    pub frame_index: u64,
    pub cloud: PointCloud,
    pub power: PowerMap,
    /// Grouped detections, one per point-cloud source cell.
    pub detections: Vec<Detection>,
    pub range_fft_len: usize,
}

/// Wall-clock time per entry of [`STAGES`].
pub type StageTimes = [Duration; STAGES.len()];

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RunOptions {
    /// Worker threads for frame-level parallelism; rayon's default when None.
    pub workers: Option<usize>,
}

/// Stage plan resolved once per run.
pub struct Pipeline {
    cfg: PipelineConfig,
    radar: ValidatedConfig,
    array: VirtualArray,
    grid: Vec<f64>,
}

impl Pipeline {
    pub fn new(cfg: &PipelineConfig) -> Result<Self, PipelineError> {
        let radar = cfg.validate()?;
        let array = if cfg.tx_deinterleave {
            VirtualArray::from_config(&radar)
        } else {
            VirtualArray::new((0..radar.num_rx).map(|r| r as f64 * radar.rx_spacing_wavelengths).collect())
                .expect("finite positions")
        };
        let grid = match cfg.aoa.method {
            AoaMethod::Fft => Vec::new(),
            _ => angle_grid(cfg.aoa.grid_step_deg).expect("validated step"),
        };
        Ok(Self {
            cfg: cfg.clone(),
            radar,
            array,
            grid,
        })
    }

    pub fn config(&self) -> &PipelineConfig {
        &self.cfg
    }

    pub fn radar(&self) -> &ValidatedConfig {
        &self.radar
    }

    pub fn process(&self, cube: &DataCube) -> Result<FrameOutput, PipelineError> {
        self.process_timed(cube).map(|(out, _)| out)
    }

    pub fn process_timed(&self, cube: &DataCube) -> Result<(FrameOutput, StageTimes), PipelineError> {
        let frame = cube.frame_index();
        let fail = |stage: &'static str| {
            move |e: &dyn std::fmt::Display| PipelineError::Stage {
                frame,
                stage,
                message: e.to_string(),
            }
        };
        if cube.config() != &self.radar {
            return Err(fail("input")(&"cube config differs from the pipeline radar config"));
        }
        let cfg = &self.cfg;
        let mut times: StageTimes = Default::default();
        let mut clock = Instant::now();
        let mut lap = |i: usize| {
            let now = Instant::now();
            times[i] += now - clock;
            clock = now;
        };

        let rc = range_processing_with(cube, cfg.range_window, RangeOptions { pad_pow2: cfg.pad_range_pow2 });
        lap(0);
        let rd = doppler_processing(&rc, cfg.doppler_window, cfg.tx_deinterleave)
            .map_err(|e| fail("doppler_fft")(&e))?;
        drop(rc);
        lap(1);
        let mut power = power_map(&rd, cfg.accumulation);
        lap(2);
        let detect_on = if cfg.log_gabor.enabled {
            let filtered = log_gabor_filter(&power.db, cfg.log_gabor.f0_cycles, cfg.log_gabor.sigma_ratio)
                .map_err(|e| fail("log_gabor")(&e))?;
            // CFAR works on linear power.
            let linear = filtered.mapv(|db| if db <= DB_FLOOR { 0.0 } else { 10f64.powf(db / 10.0) });
            power.db = filtered;
            linear
        } else {
            power.linear.clone()
        };
        lap(3);
        let dets = cfar_map(&detect_on, cfg.cfar.mode, &cfg.cfar.range, &cfg.cfar.doppler)
            .map_err(|e| fail("cfar")(&e))?;
        lap(4);
        let grouped = group_peaks(&dets, cfg.connectivity);
        lap(5);
        let compensated = doppler_compensate(&rd);
        lap(6);
        let angles = grouped
            .iter()
            .map(|d| self.angles_for(&compensated, d))
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| fail("aoa")(&e))?;
        lap(7);
        let cloud = to_point_cloud(frame, &grouped, &angles, &self.radar, rd.range_fft_len());
        lap(8);
        Ok((
            FrameOutput {
                frame_index: frame,
                cloud,
                power,
                detections: grouped,
                range_fft_len: rd.range_fft_len(),
            },
            times,
        ))
    }

    fn angles_for(&self, rd: &RangeDopplerCube, det: &Detection) -> Result<Vec<(f64, f64)>, AoaError> {
        let aoa = &self.cfg.aoa;
        let spectrum = self.spectrum_for(rd, det)?;
        let mut peaks = peak_angles(&spectrum, aoa.max_peaks);
        if peaks.is_empty() {
            // Maximum on the grid edge; still the best estimate.
            peaks.push(spectrum.argmax());
        }
        Ok(peaks)
    }

    fn spectrum_for(&self, rd: &RangeDopplerCube, det: &Detection) -> Result<AngleSpectrum, AoaError> {
        let aoa = &self.cfg.aoa;
        if aoa.method == AoaMethod::Fft {
            let snapshot = rd.snapshot(det.doppler_index(rd.num_doppler()), det.range_bin);
            return aoa_fft(&snapshot, &self.array, aoa.fft_bins);
        }
        // Snapshots: every Doppler bin of the detected range bin.
        let snapshots: Array2<Complex64> = rd
            .data()
            .index_axis(Axis(2), det.range_bin)
            .to_owned();
        match aoa.method {
            AoaMethod::Bartlett => bartlett(&covariance(&snapshots, 0.0)?, &self.array, &self.grid),
            AoaMethod::Capon => capon(&covariance(&snapshots, aoa.capon_loading)?, &self.array, &self.grid),
            AoaMethod::Music => {
                let r = covariance(&snapshots, 0.0)?;
                let n = aoa.music_sources.unwrap_or_else(|| default_num_sources(&r));
                music(&r, &self.array, n, &self.grid)
            }
            AoaMethod::Fft => unreachable!(),
        }
    }
}

/// Processes frames on a worker pool; outputs keep the input order.
pub fn run_pipeline(
    cfg: &PipelineConfig,
    frames: &[DataCube],
    opts: &RunOptions,
) -> Result<Vec<FrameOutput>, PipelineError> {
    let pipeline = Pipeline::new(cfg)?;
    let work = || frames.par_iter().map(|c| pipeline.process(c)).collect::<Result<Vec<_>, _>>();
    match opts.workers {
        None => work(),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map_err(|e| PipelineError::Config(format!("worker pool: {e}")))?
            .install(work),
    }
}
