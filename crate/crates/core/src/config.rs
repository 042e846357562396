//! Radar session configuration and the parameters derived from it.
//!
//! All FMCW relations assume complex baseband sampling:
//!
//! ```text
//! lambda = c / f_c
//! dR     = c * f_s / (2 * S * N_s)        R_max = f_s * c / (2 * S)
//! dv     = lambda / (2 * N_c * M * T_c)   v_max = lambda / (4 * M * T_c)
//! ```
//!
//! where `M` is the number of TDM transmitters, so each TX repeats every
//! `M * T_c`.

use std::collections::BTreeMap;
use std::ops::Deref;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Speed of light in vacuum (m/s).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// A configuration constraint that does not hold.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("invalid radar config `{field}`: {reason}")]
pub struct ConfigError {
    pub field: &'static str,
    pub reason: String,
}

impl ConfigError {
    fn new(field: &'static str, reason: impl Into<String>) -> Self {
        Self {
            field,
            reason: reason.into(),
        }
    }
}

/// A bin index outside the valid axis range.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("bin {bin} outside [{lo}, {hi})")]
pub struct IndexError {
    pub bin: i64,
    pub lo: i64,
    pub hi: i64,
}

/// Chirp, frame and antenna parameterization of one capture session.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "RadarConfigRepr")]
pub struct RadarConfig {
    pub num_tx: usize,
    pub num_rx: usize,
    pub chirps_per_frame_per_tx: usize,
    pub samples_per_chirp: usize,
    pub sample_rate_hz: f64,
    pub chirp_slope_hz_per_s: f64,
    pub start_freq_hz: f64,
    /// Ramp plus idle time of one TX firing.
    pub chirp_period_s: f64,
    /// Physical RX spacing in wavelengths.
    pub rx_spacing_wavelengths: f64,
    /// Physical TX spacing in wavelengths; `num_rx * rx_spacing` gives a
    /// filled virtual line.
    pub tx_spacing_wavelengths: f64,
}

// On-disk form: spacings are optional and unknown keys are rejected.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RadarConfigRepr {
    num_tx: usize,
    num_rx: usize,
    chirps_per_frame_per_tx: usize,
    samples_per_chirp: usize,
    sample_rate_hz: f64,
    chirp_slope_hz_per_s: f64,
    start_freq_hz: f64,
    chirp_period_s: f64,
    rx_spacing_wavelengths: Option<f64>,
    tx_spacing_wavelengths: Option<f64>,
}

impl From<RadarConfigRepr> for RadarConfig {
    fn from(r: RadarConfigRepr) -> Self {
        let rx_spacing = r.rx_spacing_wavelengths.unwrap_or(0.5);
        Self {
            num_tx: r.num_tx,
            num_rx: r.num_rx,
            chirps_per_frame_per_tx: r.chirps_per_frame_per_tx,
            samples_per_chirp: r.samples_per_chirp,
            sample_rate_hz: r.sample_rate_hz,
            chirp_slope_hz_per_s: r.chirp_slope_hz_per_s,
            start_freq_hz: r.start_freq_hz,
            chirp_period_s: r.chirp_period_s,
            rx_spacing_wavelengths: rx_spacing,
            tx_spacing_wavelengths: r
                .tx_spacing_wavelengths
                .unwrap_or(r.num_rx as f64 * rx_spacing),
        }
    }
}

impl RadarConfig {
    /// 2 TX, 4 RX, 128 chirps/TX, 256 samples, 10 MHz, 30 MHz/us, 77 GHz, 60 us.
    pub fn reference() -> Self {
        Self {
            num_tx: 2,
            num_rx: 4,
            chirps_per_frame_per_tx: 128,
            samples_per_chirp: 256,
            sample_rate_hz: 10.0e6,
            chirp_slope_hz_per_s: 3.0e13,
            start_freq_hz: 77.0e9,
            chirp_period_s: 60.0e-6,
            rx_spacing_wavelengths: 0.5,
            tx_spacing_wavelengths: 2.0,
        }
    }

    /// Checks every constraint in field order and returns the first failure.
    pub fn validate(self) -> Result<ValidatedConfig, ConfigError> {
        validate_config(self)
    }

    /// Key-sorted JSON text, used for capture headers and config hashing.
    pub fn to_canonical_json(&self) -> String {
        let value = serde_json::to_value(self).expect("config serializes");
        let sorted: BTreeMap<String, serde_json::Value> = match value {
            serde_json::Value::Object(map) => map.into_iter().collect(),
            _ => unreachable!("struct serializes to an object"),
        };
        serde_json::to_string(&sorted).expect("map serializes")
    }
}

fn positive_count(field: &'static str, value: usize, min: usize) -> Result<(), ConfigError> {
    if value < min {
        return Err(ConfigError::new(field, format!("must be >= {min}, got {value}")));
    }
    Ok(())
}

fn positive_real(field: &'static str, value: f64) -> Result<(), ConfigError> {
    if !(value.is_finite() && value > 0.0) {
        return Err(ConfigError::new(
            field,
            format!("must be finite and > 0, got {value}"),
        ));
    }
    Ok(())
}

/// Returns the config unchanged iff all invariants hold.
pub fn validate_config(cfg: RadarConfig) -> Result<ValidatedConfig, ConfigError> {
    positive_count("num_tx", cfg.num_tx, 1)?;
    positive_count("num_rx", cfg.num_rx, 1)?;
    positive_count("chirps_per_frame_per_tx", cfg.chirps_per_frame_per_tx, 1)?;
    positive_count("samples_per_chirp", cfg.samples_per_chirp, 2)?;
    positive_real("sample_rate_hz", cfg.sample_rate_hz)?;
    positive_real("chirp_slope_hz_per_s", cfg.chirp_slope_hz_per_s)?;
    positive_real("start_freq_hz", cfg.start_freq_hz)?;
    positive_real("chirp_period_s", cfg.chirp_period_s)?;
    positive_real("rx_spacing_wavelengths", cfg.rx_spacing_wavelengths)?;
    positive_real("tx_spacing_wavelengths", cfg.tx_spacing_wavelengths)?;

    // The sampled sweep N_s * S / f_s must fit inside the ramp S * T_c.
    let sampling_time = cfg.samples_per_chirp as f64 / cfg.sample_rate_hz;
    if sampling_time > cfg.chirp_period_s {
        return Err(ConfigError::new(
            "samples_per_chirp",
            format!(
                "sampling window {sampling_time:e} s exceeds chirp period {:e} s",
                cfg.chirp_period_s
            ),
        ));
    }
    Ok(ValidatedConfig(cfg))
}

/// A [`RadarConfig`] whose invariants have been checked.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(transparent)]
pub struct ValidatedConfig(RadarConfig);

impl Deref for ValidatedConfig {
    type Target = RadarConfig;

    fn deref(&self) -> &RadarConfig {
        &self.0
    }
}

impl ValidatedConfig {
    pub fn into_inner(self) -> RadarConfig {
        self.0
    }

    pub fn num_virtual_rx(&self) -> usize {
        self.num_tx * self.num_rx
    }

    /// Total chirps per frame across all transmitters.
    pub fn num_chirps(&self) -> usize {
        self.chirps_per_frame_per_tx * self.num_tx
    }

    pub fn samples_per_frame(&self) -> usize {
        self.num_chirps() * self.num_rx * self.samples_per_chirp
    }

    /// Bytes of one frame in the capture layout (int16 I + int16 Q per sample).
    pub fn frame_bytes(&self) -> usize {
        self.samples_per_frame() * 4
    }

    /// Duration of a frame's chirp train.
    pub fn frame_duration_s(&self) -> f64 {
        self.num_chirps() as f64 * self.chirp_period_s
    }

    pub fn wavelength_m(&self) -> f64 {
        SPEED_OF_LIGHT / self.start_freq_hz
    }

    /// Range bin size for a range FFT of `n_fft` points (`n_fft >= N_s`).
    pub fn range_bin_m(&self, n_fft: usize) -> f64 {
        SPEED_OF_LIGHT * self.sample_rate_hz / (2.0 * self.chirp_slope_hz_per_s * n_fft as f64)
    }

    pub fn derived(&self) -> DerivedParams {
        derived_params(self)
    }
}

/// Resolutions and ambiguity limits implied by a configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DerivedParams {
    pub wavelength_m: f64,
    pub range_resolution_m: f64,
    pub max_range_m: f64,
    pub velocity_resolution_m_s: f64,
    pub max_unambiguous_velocity_m_s: f64,
    /// Rayleigh width of the virtual aperture at broadside.
    pub angle_resolution_deg_broadside: f64,
    pub num_virtual_rx: usize,
}

pub fn derived_params(cfg: &ValidatedConfig) -> DerivedParams {
    let c = SPEED_OF_LIGHT;
    let m = cfg.num_tx as f64;
    let wavelength = c / cfg.start_freq_hz;
    let num_virtual = cfg.num_tx * cfg.num_rx;
    let aperture = num_virtual as f64 * cfg.rx_spacing_wavelengths;
    DerivedParams {
        wavelength_m: wavelength,
        range_resolution_m: c * cfg.sample_rate_hz
            / (2.0 * cfg.chirp_slope_hz_per_s * cfg.samples_per_chirp as f64),
        max_range_m: cfg.sample_rate_hz * c / (2.0 * cfg.chirp_slope_hz_per_s),
        velocity_resolution_m_s: wavelength
            / (2.0 * cfg.chirps_per_frame_per_tx as f64 * m * cfg.chirp_period_s),
        max_unambiguous_velocity_m_s: wavelength / (4.0 * m * cfg.chirp_period_s),
        angle_resolution_deg_broadside: (1.0 / aperture).to_degrees(),
        num_virtual_rx: num_virtual,
    }
}

/// Valid centered Doppler bins for `n` slow-time samples: `[-(n/2), n - n/2)`.
pub fn centered_bin_range(n: usize) -> (i64, i64) {
    let half = (n / 2) as i64;
    (-half, n as i64 - half)
}

pub fn bin_to_range(bin: usize, cfg: &ValidatedConfig) -> Result<f64, IndexError> {
    if bin >= cfg.samples_per_chirp {
        return Err(IndexError {
            bin: bin as i64,
            lo: 0,
            hi: cfg.samples_per_chirp as i64,
        });
    }
    Ok(bin as f64 * cfg.range_bin_m(cfg.samples_per_chirp))
}

pub fn bin_to_velocity(centered_bin: i64, cfg: &ValidatedConfig) -> Result<f64, IndexError> {
    let (lo, hi) = centered_bin_range(cfg.chirps_per_frame_per_tx);
    if centered_bin < lo || centered_bin >= hi {
        return Err(IndexError {
            bin: centered_bin,
            lo,
            hi,
        });
    }
    Ok(centered_bin as f64 * cfg.derived().velocity_resolution_m_s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn c0() -> ValidatedConfig {
        RadarConfig::reference().validate().unwrap()
    }

    #[test]
    fn reference_config_is_accepted() {
        let cfg = c0();
        // Hand check: 256 / 10 MHz = 25.6 us fits in 60 us.
        assert_eq!(cfg.into_inner(), RadarConfig::reference());
    }

    #[test]
    fn zero_rx_rejected() {
        let mut cfg = RadarConfig::reference();
        cfg.num_rx = 0;
        assert_eq!(cfg.validate().unwrap_err().field, "num_rx");
    }

    #[test]
    fn negative_sample_rate_rejected() {
        let mut cfg = RadarConfig::reference();
        cfg.sample_rate_hz = -1.0;
        assert_eq!(cfg.validate().unwrap_err().field, "sample_rate_hz");
    }

    #[test]
    fn nan_and_single_sample_rejected() {
        let mut cfg = RadarConfig::reference();
        cfg.chirp_slope_hz_per_s = f64::NAN;
        assert_eq!(cfg.validate().unwrap_err().field, "chirp_slope_hz_per_s");
        let mut cfg = RadarConfig::reference();
        cfg.samples_per_chirp = 1;
        assert_eq!(cfg.validate().unwrap_err().field, "samples_per_chirp");
    }

    #[test]
    fn sampling_longer_than_ramp_rejected() {
        let mut cfg = RadarConfig::reference();
        cfg.samples_per_chirp = 1024; // 102.4 us > 60 us
        let err = cfg.validate().unwrap_err();
        assert_eq!(err.field, "samples_per_chirp");
        assert!(err.reason.contains("exceeds"));
    }

    #[test]
    fn reference_derived_params() {
        let d = c0().derived();
        assert_eq!(d.num_virtual_rx, 8);
        // Recomputed with the exact speed of light.
        let lambda = 299_792_458.0 / 77e9;
        assert_relative_eq!(d.wavelength_m, lambda, max_relative = 1e-15);
        assert_relative_eq!(d.wavelength_m, 3.893_408_5e-3, max_relative = 1e-7);
        assert_relative_eq!(d.range_resolution_m, 0.195_177_381, max_relative = 1e-8);
        assert_relative_eq!(d.max_range_m, 49.965_409_67, max_relative = 1e-9);
        assert_relative_eq!(d.max_unambiguous_velocity_m_s, 8.111_267_7, max_relative = 1e-7);
        assert_relative_eq!(d.velocity_resolution_m_s, 0.126_738_56, max_relative = 1e-7);
        assert_relative_eq!(d.angle_resolution_deg_broadside, 14.323_944_9, max_relative = 1e-8);
    }

    #[test]
    fn bin_conversions() {
        let cfg = c0();
        assert_eq!(bin_to_range(0, &cfg).unwrap(), 0.0);
        assert_relative_eq!(bin_to_range(51, &cfg).unwrap(), 9.954_046_4, max_relative = 1e-7);
        let v = bin_to_velocity(-64, &cfg).unwrap();
        assert_relative_eq!(v, -cfg.derived().max_unambiguous_velocity_m_s, max_relative = 1e-12);
        assert!(bin_to_range(256, &cfg).is_err());
        assert!(bin_to_velocity(64, &cfg).is_err());
        assert!(bin_to_velocity(-65, &cfg).is_err());
    }

    #[test]
    fn odd_doppler_length_bins() {
        assert_eq!(centered_bin_range(5), (-2, 3));
        assert_eq!(centered_bin_range(128), (-64, 64));
    }

    #[test]
    fn doubling_samples_halves_range_resolution() {
        let base = c0().derived();
        let mut cfg = RadarConfig::reference();
        cfg.samples_per_chirp *= 2;
        cfg.chirp_period_s = 120e-6;
        let doubled = cfg.validate().unwrap();
        // T_c changes velocity terms only.
        let d = doubled.derived();
        assert_relative_eq!(d.range_resolution_m * 2.0, base.range_resolution_m, max_relative = 1e-15);
        assert_eq!(d.max_range_m, base.max_range_m);
    }

    #[test]
    fn doubling_chirps_halves_velocity_resolution() {
        let base = c0().derived();
        let mut cfg = RadarConfig::reference();
        cfg.chirps_per_frame_per_tx *= 2;
        let d = cfg.validate().unwrap().derived();
        assert_relative_eq!(d.velocity_resolution_m_s * 2.0, base.velocity_resolution_m_s, max_relative = 1e-15);
        assert_eq!(d.max_unambiguous_velocity_m_s, base.max_unambiguous_velocity_m_s);
    }

    #[test]
    fn json_defaults_and_unknown_keys() {
        let json = r#"{"num_tx":3,"num_rx":4,"chirps_per_frame_per_tx":64,"samples_per_chirp":128,
            "sample_rate_hz":1e7,"chirp_slope_hz_per_s":3e13,"start_freq_hz":7.7e10,"chirp_period_s":6e-5}"#;
        let cfg: RadarConfig = serde_json::from_str(json).unwrap();
        assert_eq!(cfg.rx_spacing_wavelengths, 0.5);
        assert_eq!(cfg.tx_spacing_wavelengths, 2.0);

        let bad = json.replace("\"num_tx\":3", "\"num_tx\":3,\"bogus\":1");
        assert!(serde_json::from_str::<RadarConfig>(&bad).is_err());
    }

    #[test]
    fn canonical_json_is_sorted_and_round_trips() {
        let cfg = RadarConfig::reference();
        let text = cfg.to_canonical_json();
        assert!(text.starts_with("{\"chirp_period_s\""));
        let back: RadarConfig = serde_json::from_str(&text).unwrap();
        assert_eq!(back, cfg);
    }
}
