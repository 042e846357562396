use std::io::{self, Write};

use super::AoaError;
use crate::format::sig;

/// Power over a strictly increasing azimuth grid inside (-90, 90) degrees.
#[derive(Debug, Clone, PartialEq)]
pub struct AngleSpectrum {
    angles_deg: Vec<f64>,
    power: Vec<f64>,
}

impl AngleSpectrum {
    pub fn new(angles_deg: Vec<f64>, power: Vec<f64>) -> Result<Self, AoaError> {
        if angles_deg.len() != power.len() || angles_deg.is_empty() {
            return Err(AoaError::Shape(format!(
                "{} angles for {} power values",
                angles_deg.len(),
                power.len()
            )));
        }
        if angles_deg.windows(2).any(|w| w[1] <= w[0]) || angles_deg.iter().any(|a| a.abs() >= 90.0) {
            return Err(AoaError::Shape("grid must increase strictly inside (-90, 90)".into()));
        }
        if power.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
            return Err(AoaError::Shape("power must be finite and >= 0".into()));
        }
        Ok(Self { angles_deg, power })
    }

    pub fn angles_deg(&self) -> &[f64] {
        &self.angles_deg
    }

    pub fn power(&self) -> &[f64] {
        &self.power
    }

    pub fn len(&self) -> usize {
        self.power.len()
    }

    pub fn is_empty(&self) -> bool {
        self.power.is_empty()
    }

    /// `(angle, power)` of the largest value; the first one on ties.
    pub fn argmax(&self) -> (f64, f64) {
        let mut best = 0;
        for (i, &p) in self.power.iter().enumerate() {
            if p > self.power[best] {
                best = i;
            }
        }
        (self.angles_deg[best], self.power[best])
    }

    /// Two columns `angle_deg,power` with a header line.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "angle_deg,power")?;
        for (a, p) in self.angles_deg.iter().zip(&self.power) {
            writeln!(out, "{},{}", sig(*a, 6), sig(*p, 6))?;
        }
        Ok(())
    }
}

/// -89.9 to 89.9 degrees in 0.1 degree steps.
pub fn default_grid() -> Vec<f64> {
    (-899..=899).map(|i| i as f64 / 10.0).collect()
}

/// Multiples of `step_deg` strictly inside (-90, 90), rounded to 1e-9.
pub fn angle_grid(step_deg: f64) -> Result<Vec<f64>, AoaError> {
    if !(step_deg > 0.0 && step_deg < 90.0) {
        return Err(AoaError::Shape(format!("grid step {step_deg} not in (0, 90)")));
    }
    let n = (90.0 / step_deg).ceil() as i64;
    Ok((-n..=n)
        .map(|i| (i as f64 * step_deg * 1e9).round() / 1e9)
        .filter(|a| a.abs() < 90.0)
        .collect())
}

fn local_maxima(power: &[f64]) -> Vec<usize> {
    (1..power.len().saturating_sub(1))
        .filter(|&i| power[i] > power[i - 1] && power[i] > power[i + 1])
        .collect()
}

fn sorted_by_power(spectrum: &AngleSpectrum, mut idx: Vec<usize>, max_peaks: usize) -> Vec<(f64, f64)> {
    let p = spectrum.power();
    idx.sort_by(|&a, &b| p[b].total_cmp(&p[a]).then(a.cmp(&b)));
    idx.truncate(max_peaks);
    idx.into_iter().map(|i| (spectrum.angles_deg[i], p[i])).collect()
}

/// Interior points strictly above both neighbours, largest first.
pub fn peak_angles(spectrum: &AngleSpectrum, max_peaks: usize) -> Vec<(f64, f64)> {
    sorted_by_power(spectrum, local_maxima(spectrum.power()), max_peaks)
}

/// Local maxima that stand out: within `floor_db` of the global maximum and
/// with a prominence of at least `prominence_db`. Prominence is the drop to
/// the higher of the two minima reached before a higher value (or the grid
/// edge) on either side.
pub fn resolved_peaks(
    spectrum: &AngleSpectrum,
    max_peaks: usize,
    floor_db: f64,
    prominence_db: f64,
) -> Vec<(f64, f64)> {
    let db: Vec<f64> = spectrum
        .power()
        .iter()
        .map(|&p| 10.0 * p.max(1e-300).log10())
        .collect();
    let top = db.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let keep = local_maxima(spectrum.power())
        .into_iter()
        .filter(|&i| {
            if db[i] < top - floor_db {
                return false;
            }
            let side_min = |range: &mut dyn Iterator<Item = usize>| {
                let mut lowest = db[i];
                for j in range {
                    if db[j] > db[i] {
                        break;
                    }
                    lowest = lowest.min(db[j]);
                }
                lowest
            };
            let left = side_min(&mut (0..i).rev());
            let right = side_min(&mut (i + 1..db.len()));
            db[i] - left.max(right) >= prominence_db
        })
        .collect();
    sorted_by_power(spectrum, keep, max_peaks)
}
