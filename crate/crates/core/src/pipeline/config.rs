use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use super::PipelineError;
use crate::aoa::{angle_grid, DEFAULT_CAPON_LOADING};
use crate::config::{RadarConfig, ValidatedConfig};
use crate::detection::{CfarMode, CfarParams, Connectivity};
use crate::range_doppler::{Accumulation, WindowKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AoaMethod {
    Fft,
    Bartlett,
    Capon,
    Music,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AoaSettings {
    pub method: AoaMethod,
    /// Zero-padded length of the angle FFT.
    pub fft_bins: usize,
    /// Scan step of the Bartlett / Capon / MUSIC grid.
    pub grid_step_deg: f64,
    /// MUSIC source count; the eigenvalue rule when absent.
    pub music_sources: Option<usize>,
    /// Diagonal loading for Capon, relative to `trace / MN`.
    pub capon_loading: f64,
    /// Angles kept per detection.
    pub max_peaks: usize,
}

impl Default for AoaSettings {
    fn default() -> Self {
        Self {
            method: AoaMethod::Fft,
            fft_bins: 64,
            grid_step_deg: 0.1,
            music_sources: None,
            capon_loading: DEFAULT_CAPON_LOADING,
            max_peaks: 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LogGaborSettings {
    pub enabled: bool,
    pub f0_cycles: f64,
    pub sigma_ratio: f64,
}

impl Default for LogGaborSettings {
    fn default() -> Self {
        Self {
            enabled: false,
            f0_cycles: 0.1,
            sigma_ratio: 0.55,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CfarSettings {
    pub mode: CfarMode,
    pub range: CfarParams,
    pub doppler: CfarParams,
}

impl Default for CfarSettings {
    fn default() -> Self {
        Self {
            mode: CfarMode::Cross2d,
            range: CfarParams::new(2, 8, 1e-4),
            doppler: CfarParams::new(2, 8, 1e-4),
        }
    }
}

/// Everything that determines a run's outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub radar: RadarConfig,
    #[serde(default = "hann")]
    pub range_window: WindowKind,
    #[serde(default = "hann")]
    pub doppler_window: WindowKind,
    #[serde(default)]
    pub pad_range_pow2: bool,
    #[serde(default = "yes")]
    pub tx_deinterleave: bool,
    #[serde(default)]
    pub log_gabor: LogGaborSettings,
    #[serde(default = "noncoherent")]
    pub accumulation: Accumulation,
    #[serde(default)]
    pub cfar: CfarSettings,
    #[serde(default = "eight")]
    pub connectivity: Connectivity,
    #[serde(default)]
    pub aoa: AoaSettings,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub seed: u64,
}

fn hann() -> WindowKind {
    WindowKind::Hann
}
fn yes() -> bool {
    true
}
fn noncoherent() -> Accumulation {
    Accumulation::NoncoherentSum
}
fn eight() -> Connectivity {
    Connectivity::Eight
}

impl PipelineConfig {
    /// Defaults around a radar configuration.
    pub fn new(radar: RadarConfig) -> Self {
        Self {
            radar,
            range_window: hann(),
            doppler_window: hann(),
            pad_range_pow2: false,
            tx_deinterleave: true,
            log_gabor: LogGaborSettings::default(),
            accumulation: noncoherent(),
            cfar: CfarSettings::default(),
            connectivity: eight(),
            aoa: AoaSettings::default(),
            output_dir: None,
            seed: 0,
        }
    }

    pub fn from_json(text: &str) -> Result<Self, PipelineError> {
        serde_json::from_str(text).map_err(|e| PipelineError::Config(e.to_string()))
    }

    /// JSON with sorted keys and no whitespace; the hashed form.
    pub fn canonical_json(&self) -> String {
        let value = serde_json::to_value(self).expect("config serializes");
        serde_json::to_string(&value).expect("value serializes")
    }

    /// Checks every stage's parameters against the radar geometry.
    pub fn validate(&self) -> Result<ValidatedConfig, PipelineError> {
        let radar = self.radar.validate().map_err(|e| PipelineError::Config(e.to_string()))?;
        let bad = |msg: String| Err(PipelineError::Config(msg));
        let range_len = if self.pad_range_pow2 {
            radar.samples_per_chirp.next_power_of_two()
        } else {
            radar.samples_per_chirp
        };
        let doppler_len = if self.tx_deinterleave {
            radar.chirps_per_frame_per_tx
        } else {
            radar.num_chirps()
        };
        if doppler_len < 2 {
            return bad(format!("{doppler_len} slow-time samples; need at least 2"));
        }
        let cfar = &self.cfar;
        let config_err = |e: crate::detection::DetectionError| PipelineError::Config(format!("cfar: {e}"));
        if cfar.mode != CfarMode::DopplerAxis {
            cfar.range.validate(range_len).map_err(config_err)?;
            if cfar.range.circular {
                return bad("cfar: the range axis cannot be circular".into());
            }
        }
        if cfar.mode != CfarMode::RangeAxis {
            cfar.doppler.validate(doppler_len).map_err(config_err)?;
        }
        let lg = &self.log_gabor;
        if lg.enabled && !(lg.f0_cycles > 0.0 && lg.f0_cycles < 0.5 && lg.sigma_ratio > 0.0 && lg.sigma_ratio < 1.0) {
            return bad("log_gabor: need 0 < f0_cycles < 0.5 and 0 < sigma_ratio < 1".into());
        }
        let aoa = &self.aoa;
        let elements = if self.tx_deinterleave { radar.num_virtual_rx() } else { radar.num_rx };
        if aoa.max_peaks == 0 {
            return bad("aoa: max_peaks must be >= 1".into());
        }
        match aoa.method {
            AoaMethod::Fft => {
                if aoa.fft_bins < elements {
                    return bad(format!("aoa: fft_bins {} < {elements} elements", aoa.fft_bins));
                }
            }
            _ => {
                angle_grid(aoa.grid_step_deg).map_err(|e| PipelineError::Config(format!("aoa: {e}")))?;
            }
        }
        if let Some(n) = aoa.music_sources {
            if n == 0 || n >= elements {
                return bad(format!("aoa: music_sources {n} not in [1, {elements})"));
            }
        }
        if !(aoa.capon_loading.is_finite() && aoa.capon_loading >= 0.0) {
            return bad("aoa: capon_loading must be >= 0".into());
        }
        Ok(radar)
    }
}
