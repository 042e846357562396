//! Range and Doppler processing: windowed FFTs over fast time (samples) and
//! slow time (chirps), and the power maps built from them.
//!
//! Forward transforms are unnormalized (`X[n] = sum x[k] e^{-j 2 pi k n / N}`).

mod power;
mod processing;
mod window;

use thiserror::Error;

pub use crate::fft::{fftshift, ifftshift};
pub use power::{power_map, write_map_csv, write_map_pgm, Accumulation, PowerMap, DB_FLOOR};
pub use processing::{
    doppler_processing, range_processing, range_processing_with, RangeCube, RangeDopplerCube,
    RangeOptions,
};
pub use window::{coherent_gain, window, window_periodic, WindowKind};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpectrumError {
    #[error("window length must be >= 2, got {0}")]
    Length(usize),
    #[error("shape error: {0}")]
    Shape(String),
}
