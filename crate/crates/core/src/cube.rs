//! One frame of complex baseband ADC samples.

use ndarray::Array3;
use num_complex::Complex64;
use thiserror::Error;

use crate::config::ValidatedConfig;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CubeError {
    #[error("cube shape {actual:?} does not match config shape {expected:?}")]
    Shape {
        expected: (usize, usize, usize),
        actual: (usize, usize, usize),
    },
    #[error("non-finite sample at (chirp {0}, rx {1}, sample {2})")]
    NonFinite(usize, usize, usize),
}

/// Samples indexed `(chirp, rx, sample)`.
///
/// The chirp axis is in transmission order: TX0 chirp0, TX1 chirp0, ...,
/// TX0 chirp1, ... so global chirp `q` was fired by TX `q % num_tx`.
#[derive(Debug, Clone, PartialEq)]
pub struct DataCube {
    samples: Array3<Complex64>,
    frame_index: u64,
    config: ValidatedConfig,
}

/// `(chirps, rx, samples)` for a config.
pub fn cube_shape(cfg: &ValidatedConfig) -> (usize, usize, usize) {
    (cfg.num_chirps(), cfg.num_rx, cfg.samples_per_chirp)
}

impl DataCube {
    pub fn new(
        config: ValidatedConfig,
        frame_index: u64,
        samples: Array3<Complex64>,
    ) -> Result<Self, CubeError> {
        let expected = cube_shape(&config);
        if samples.dim() != expected {
            return Err(CubeError::Shape {
                expected,
                actual: samples.dim(),
            });
        }
        if let Some(((q, r, k), _)) = samples
            .indexed_iter()
            .find(|(_, v)| !(v.re.is_finite() && v.im.is_finite()))
        {
            return Err(CubeError::NonFinite(q, r, k));
        }
        Ok(Self {
            samples,
            frame_index,
            config,
        })
    }

    pub fn zeros(config: ValidatedConfig, frame_index: u64) -> Self {
        Self {
            samples: Array3::zeros(cube_shape(&config)),
            frame_index,
            config,
        }
    }

    pub fn samples(&self) -> &Array3<Complex64> {
        &self.samples
    }

    pub fn into_samples(self) -> Array3<Complex64> {
        self.samples
    }

    pub fn frame_index(&self) -> u64 {
        self.frame_index
    }

    pub fn config(&self) -> &ValidatedConfig {
        &self.config
    }

    pub fn with_frame_index(mut self, frame_index: u64) -> Self {
        self.frame_index = frame_index;
        self
    }

    /// Rounds every component to the nearest integer and saturates to the
    /// int16 range, i.e. the values the capture layout can carry.
    pub fn quantized(&self) -> Self {
        let q = |x: f64| x.round().clamp(i16::MIN as f64, i16::MAX as f64);
        Self {
            samples: self.samples.mapv(|v| Complex64::new(q(v.re), q(v.im))),
            frame_index: self.frame_index,
            config: self.config,
        }
    }
}
