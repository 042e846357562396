//! FMCW MIMO radar processing toolkit.
//!
//! Stages, in pipeline order:
//!
//! - [`capture`]: UDP packet reassembly and capture files into [`DataCube`]s
//! - [`range_doppler`]: windowed range and Doppler FFTs, power maps
//! - [`detection`]: CA-CFAR, log-Gabor filtering, peak grouping, point clouds
//! - [`aoa`]: virtual arrays, FFT / Bartlett / Capon / MUSIC angle spectra
//! - [`pipeline`]: configuration, end-to-end runs, outputs and benchmarks
//!
//! [`sim`] synthesizes cubes from point targets and is the ground truth the
//! tests check every stage against.

pub mod aoa;
pub mod capture;
pub mod config;
pub mod cube;
pub mod detection;
mod fft;
pub mod format;
pub mod pipeline;
pub mod range_doppler;
pub mod sim;

pub use config::{
    bin_to_range, bin_to_velocity, derived_params, validate_config, ConfigError, DerivedParams,
    RadarConfig, ValidatedConfig, SPEED_OF_LIGHT,
};
pub use cube::DataCube;
