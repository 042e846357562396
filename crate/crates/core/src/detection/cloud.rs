use std::io::{self, Write};

use serde::Serialize;

use super::Detection;
use crate::config::ValidatedConfig;
use crate::format::sig;

pub const POINT_CSV_HEADER: &str = "frame,range_m,azimuth_deg,velocity_m_s,snr_db,x_m,y_m";

/// One detection at one azimuth. `x = range sin(az)`, `y = range cos(az)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Point {
    pub frame: u64,
    pub range_m: f64,
    pub azimuth_deg: f64,
    pub velocity_m_s: f64,
    pub snr_db: f64,
    pub x_m: f64,
    pub y_m: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct PointCloud {
    pub points: Vec<Point>,
}

impl PointCloud {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Header line plus one row per point, 6 significant digits.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "{POINT_CSV_HEADER}")?;
        for p in &self.points {
            writeln!(
                out,
                "{},{},{},{},{},{},{}",
                p.frame,
                sig(p.range_m, 6),
                sig(p.azimuth_deg, 6),
                sig(p.velocity_m_s, 6),
                sig(p.snr_db, 6),
                sig(p.x_m, 6),
                sig(p.y_m, 6)
            )?;
        }
        Ok(())
    }
}

/// One point per `(detection, angle)` pair, with `angles[i]` the peak list
/// (angle, power) for `detections[i]`. Detections without angles, or at
/// range bin 0, produce no points.
pub fn to_point_cloud(
    frame: u64,
    detections: &[Detection],
    angles: &[Vec<(f64, f64)>],
    cfg: &ValidatedConfig,
    range_fft_len: usize,
) -> PointCloud {
    assert_eq!(detections.len(), angles.len(), "one angle list per detection");
    let dr = cfg.range_bin_m(range_fft_len);
    let dv = cfg.derived().velocity_resolution_m_s;
    let points = detections
        .iter()
        .zip(angles)
        .filter(|(d, _)| d.range_bin > 0)
        .flat_map(|(d, list)| {
            let range = d.range_bin as f64 * dr;
            let velocity = d.doppler_bin as f64 * dv;
            list.iter().map(move |&(az, _)| {
                let (s, c) = az.to_radians().sin_cos();
                Point {
                    frame,
                    range_m: range,
                    azimuth_deg: az,
                    velocity_m_s: velocity,
                    snr_db: d.snr_db,
                    x_m: range * s,
                    y_m: range * c,
                }
            })
        })
        .collect();
    PointCloud { points }
}
