//! Target detection on power maps: CA-CFAR, log-Gabor pre-filtering, peak
//! grouping and point-cloud output.

mod cfar;
mod cloud;
mod grouping;
mod log_gabor;

use thiserror::Error;

pub use cfar::{alpha, ca_cfar_1d, cfar_2d, cfar_map, CfarMode, CfarParams, Detection};
pub use cloud::{to_point_cloud, Point, PointCloud, POINT_CSV_HEADER};
pub use grouping::{group_peaks, Connectivity};
pub use log_gabor::{log_gabor_filter, log_gabor_gain};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DetectionError {
    #[error("CFAR window 2*({guard}+{train}) does not fit an axis of {axis_len} cells")]
    Window {
        guard: usize,
        train: usize,
        axis_len: usize,
    },
    #[error("invalid parameter {name}: {reason}")]
    Param { name: &'static str, reason: String },
}

impl DetectionError {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Self::Param {
            name,
            reason: reason.into(),
        }
    }
}
