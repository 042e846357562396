//! Angle of arrival over the virtual array: TDM phase compensation,
//! covariance estimation and FFT / Bartlett / Capon / MUSIC spectra.
//!
//! Steering convention: element `i` at position `p_i` (wavelengths) sees
//! `exp(j 2 pi p_i sin(theta))`; positive angles point toward increasing
//! element position.

mod array;
mod beamform;
mod compensate;
mod covariance;
mod spectrum;

use thiserror::Error;

pub use array::{steering_vector, VirtualArray};
pub use beamform::{
    aoa_fft, aoa_fft_mean, bartlett, capon, default_num_sources, music, DEFAULT_CAPON_LOADING,
};
pub use compensate::doppler_compensate;
pub use covariance::{covariance, CovarianceMatrix, Eigen};
pub use spectrum::{angle_grid, default_grid, peak_angles, resolved_peaks, AngleSpectrum};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AoaError {
    #[error("angle {0} deg outside (-90, 90)")]
    Domain(f64),
    #[error("array geometry: {0}")]
    Geometry(String),
    #[error("covariance is singular (condition number {condition:e})")]
    Singular { condition: f64 },
    #[error("source count {n_sources} must be in [1, {elements})")]
    Rank { n_sources: usize, elements: usize },
    #[error("shape error: {0}")]
    Shape(String),
}
