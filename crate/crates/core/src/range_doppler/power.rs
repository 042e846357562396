use std::io::{self, Write};

use ndarray::{Array2, Axis};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::RangeDopplerCube;
use crate::format::sig;

/// dB value assigned to zero power.
pub const DB_FLOOR: f64 = -300.0;

/// How virtual channels are combined into one map.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Accumulation {
    /// `|sum_v X_v|^2`
    CoherentSum,
    /// `sum_v |X_v|^2`
    NoncoherentSum,
}

/// Power indexed `(doppler, range_bin)`; the Doppler axis is shifted like the
/// source cube.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerMap {
    pub linear: Array2<f64>,
    pub db: Array2<f64>,
    pub frame_index: u64,
}

pub(crate) fn to_db(p: f64) -> f64 {
    if p > 0.0 {
        (10.0 * p.log10()).max(DB_FLOOR)
    } else {
        DB_FLOOR
    }
}

pub fn power_map(rd: &RangeDopplerCube, accumulation: Accumulation) -> PowerMap {
    let data = rd.data();
    let linear = match accumulation {
        Accumulation::CoherentSum => data
            .sum_axis(Axis(1))
            .mapv(|v: Complex64| v.norm_sqr()),
        Accumulation::NoncoherentSum => data.mapv(|v| v.norm_sqr()).sum_axis(Axis(1)),
    };
    PowerMap {
        db: linear.mapv(to_db),
        linear,
        frame_index: rd.frame_index(),
    }
}

/// One line per row (Doppler bin), comma-separated, 6 significant digits.
pub fn write_map_csv<W: Write>(map: &Array2<f64>, mut out: W) -> io::Result<()> {
    for row in map.rows() {
        let line: Vec<String> = row.iter().map(|&v| sig(v, 6)).collect();
        writeln!(out, "{}", line.join(","))?;
    }
    Ok(())
}

/// Binary 16-bit PGM, width = columns, height = rows. Values are rescaled
/// linearly from `[min, max]` onto `[0, 65535]`; a flat map is all zeros.
pub fn write_map_pgm<W: Write>(map: &Array2<f64>, mut out: W) -> io::Result<()> {
    let (rows, cols) = map.dim();
    let lo = map.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = map.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let span = hi - lo;
    write!(out, "P5\n{cols} {rows}\n65535\n")?;
    let mut bytes = Vec::with_capacity(rows * cols * 2);
    for &v in map.iter() {
        let level = if span > 0.0 {
            ((v - lo) / span * 65535.0).round() as u16
        } else {
            0
        };
        bytes.extend_from_slice(&level.to_be_bytes());
    }
    out.write_all(&bytes)
}
