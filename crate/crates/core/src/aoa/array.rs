use std::f64::consts::PI;

use nalgebra::DVector;
use num_complex::Complex64;

use super::AoaError;
use crate::config::ValidatedConfig;

/// Element positions in wavelengths, in virtual-index order `t * num_rx + r`.
#[derive(Debug, Clone, PartialEq)]
pub struct VirtualArray {
    positions: Vec<f64>,
}

impl VirtualArray {
    pub fn new(positions: Vec<f64>) -> Result<Self, AoaError> {
        if positions.is_empty() || positions.iter().any(|p| !p.is_finite()) {
            return Err(AoaError::Geometry("positions must be finite and non-empty".into()));
        }
        Ok(Self { positions })
    }

    /// `t * tx_spacing + r * rx_spacing` for every transmitter/receiver pair.
    pub fn from_config(cfg: &ValidatedConfig) -> Self {
        let positions = (0..cfg.num_tx)
            .flat_map(|t| {
                (0..cfg.num_rx).map(move |r| {
                    t as f64 * cfg.tx_spacing_wavelengths + r as f64 * cfg.rx_spacing_wavelengths
                })
            })
            .collect();
        Self { positions }
    }

    /// A uniform line of `n` elements starting at 0.
    pub fn uniform(n: usize, spacing: f64) -> Self {
        Self {
            positions: (0..n).map(|i| i as f64 * spacing).collect(),
        }
    }

    pub fn positions(&self) -> &[f64] {
        &self.positions
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    /// The common spacing if positions increase in equal steps.
    pub fn uniform_spacing(&self) -> Result<f64, AoaError> {
        if self.positions.len() < 2 {
            return Err(AoaError::Geometry("need at least two elements".into()));
        }
        let d = self.positions[1] - self.positions[0];
        let uniform = d > 0.0
            && self
                .positions
                .windows(2)
                .all(|w| ((w[1] - w[0]) - d).abs() <= 1e-9 * d.max(1.0));
        if uniform {
            Ok(d)
        } else {
            Err(AoaError::Geometry(format!("positions {:?} are not uniformly spaced", self.positions)))
        }
    }
}

pub(crate) fn check_angle(theta_deg: f64) -> Result<(), AoaError> {
    if theta_deg.abs() < 90.0 {
        Ok(())
    } else {
        Err(AoaError::Domain(theta_deg))
    }
}

pub fn steering_vector(theta_deg: f64, array: &VirtualArray) -> Result<DVector<Complex64>, AoaError> {
    check_angle(theta_deg)?;
    let s = theta_deg.to_radians().sin();
    Ok(DVector::from_iterator(
        array.len(),
        array.positions.iter().map(|p| Complex64::from_polar(1.0, 2.0 * PI * p * s)),
    ))
}
