use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::SpectrumError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WindowKind {
    Rectangular,
    Hann,
    Hamming,
    Blackman,
}

impl WindowKind {
    pub const ALL: [WindowKind; 4] = [
        WindowKind::Rectangular,
        WindowKind::Hann,
        WindowKind::Hamming,
        WindowKind::Blackman,
    ];

    fn coefficient(self, x: f64) -> f64 {
        // x = 2*pi*n / denominator
        match self {
            WindowKind::Rectangular => 1.0,
            WindowKind::Hann => 0.5 - 0.5 * x.cos(),
            WindowKind::Hamming => 0.54 - 0.46 * x.cos(),
            WindowKind::Blackman => 0.42 - 0.5 * x.cos() + 0.08 * (2.0 * x).cos(),
        }
    }
}

fn build(kind: WindowKind, length: usize, denominator: f64) -> Result<Vec<f64>, SpectrumError> {
    if length < 2 {
        return Err(SpectrumError::Length(length));
    }
    Ok((0..length)
        .map(|n| kind.coefficient(2.0 * PI * n as f64 / denominator))
        .collect())
}

/// Symmetric window: `2*pi*n / (L - 1)`.
pub fn window(kind: WindowKind, length: usize) -> Result<Vec<f64>, SpectrumError> {
    build(kind, length, length as f64 - 1.0)
}

/// Periodic (DFT-even) window: `2*pi*n / L`.
pub fn window_periodic(kind: WindowKind, length: usize) -> Result<Vec<f64>, SpectrumError> {
    build(kind, length, length as f64)
}

/// Mean of the coefficients: the factor an on-bin tone's peak is scaled by.
pub fn coherent_gain(coefficients: &[f64]) -> f64 {
    coefficients.iter().sum::<f64>() / coefficients.len() as f64
}
