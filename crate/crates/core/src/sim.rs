//! Point-target scene simulator for the FMCW beat-signal model.
//!
//! Sample `k` of global chirp `q` (fired by TX `t = q % M`) at RX `r` is, per
//! target,
//!
//! ```text
//! A * exp(j*2*pi*[f_b*k/f_s + f_d*q*T_c + (t*d_tx + r*d_rx)*sin(theta)])
//! f_b = 2*S*R/c,  f_d = 2*v*f_c/c
//! ```
//!
//! Range migration and amplitude falloff are ignored so the output stays
//! analytically checkable. Noise is circular complex Gaussian drawn from a
//! ChaCha8 stream seeded with `seed ^ frame_index`.

use std::f64::consts::PI;

use ndarray::Array3;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::capture::{serialize_cube, CapturePacket};
use crate::config::{ValidatedConfig, SPEED_OF_LIGHT};
use crate::cube::{cube_shape, DataCube};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("target {index}: {reason}")]
    Target { index: usize, reason: String },
    #[error("n_frames must be >= 1")]
    NoFrames,
    #[error("noise_power must be finite and >= 0, got {0}")]
    Noise(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointTarget {
    pub range_m: f64,
    #[serde(rename = "velocity_m_s")]
    pub radial_velocity_m_s: f64,
    pub azimuth_deg: f64,
    /// Linear amplitude in ADC counts.
    pub amplitude: f64,
}

impl PointTarget {
    pub fn new(range_m: f64, radial_velocity_m_s: f64, azimuth_deg: f64, amplitude: f64) -> Self {
        Self {
            range_m,
            radial_velocity_m_s,
            azimuth_deg,
            amplitude,
        }
    }

    fn check(&self, index: usize, cfg: &ValidatedConfig) -> Result<(), SimError> {
        let d = cfg.derived();
        let fail = |reason: String| Err(SimError::Target { index, reason });
        if !(self.range_m > 0.0 && self.range_m < d.max_range_m) {
            return fail(format!(
                "range {} m outside (0, {}) m",
                self.range_m, d.max_range_m
            ));
        }
        if !(self.radial_velocity_m_s.abs() < d.max_unambiguous_velocity_m_s) {
            return fail(format!(
                "|velocity| {} m/s not below v_max {} m/s",
                self.radial_velocity_m_s, d.max_unambiguous_velocity_m_s
            ));
        }
        if !(self.azimuth_deg.abs() < 90.0) {
            return fail(format!("azimuth {} deg outside (-90, 90)", self.azimuth_deg));
        }
        if !(self.amplitude.is_finite() && self.amplitude > 0.0) {
            return fail(format!("amplitude {} must be > 0", self.amplitude));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSpec {
    /// Variance of the complex noise per sample.
    pub noise_power: f64,
    pub seed: u64,
}

impl NoiseSpec {
    pub fn none() -> Self {
        Self {
            noise_power: 0.0,
            seed: 0,
        }
    }

    /// Noise power giving a per-sample SNR of `snr_db` for amplitude `amplitude`.
    pub fn for_snr(amplitude: f64, snr_db: f64, seed: u64) -> Self {
        Self {
            noise_power: amplitude * amplitude / 10f64.powf(snr_db / 10.0),
            seed,
        }
    }
}

/// Targets that apply from `frame` onward.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneFrame {
    pub frame: u64,
    pub targets: Vec<PointTarget>,
}

/// Per-target phase increments, in cycles.
struct TargetTerms {
    amplitude: f64,
    per_sample: f64,
    per_chirp: f64,
    spatial: f64,
}

fn target_terms(target: &PointTarget, cfg: &ValidatedConfig) -> TargetTerms {
    let beat = 2.0 * cfg.chirp_slope_hz_per_s * target.range_m / SPEED_OF_LIGHT;
    let doppler = 2.0 * target.radial_velocity_m_s * cfg.start_freq_hz / SPEED_OF_LIGHT;
    TargetTerms {
        amplitude: target.amplitude,
        per_sample: beat / cfg.sample_rate_hz,
        per_chirp: doppler * cfg.chirp_period_s,
        spatial: target.azimuth_deg.to_radians().sin(),
    }
}

/// Synthesizes one frame.
pub fn synthesize_frame(
    cfg: &ValidatedConfig,
    targets: &[PointTarget],
    noise: &NoiseSpec,
    frame_index: u64,
) -> Result<DataCube, SimError> {
    for (i, t) in targets.iter().enumerate() {
        t.check(i, cfg)?;
    }
    if !(noise.noise_power.is_finite() && noise.noise_power >= 0.0) {
        return Err(SimError::Noise(noise.noise_power));
    }

    let (chirps, num_rx, samples) = cube_shape(cfg);
    let terms: Vec<TargetTerms> = targets.iter().map(|t| target_terms(t, cfg)).collect();
    let mut data = Array3::<Complex64>::zeros((chirps, num_rx, samples));
    let lane = num_rx * samples;

    data.as_slice_mut()
        .expect("standard layout")
        .par_chunks_mut(lane)
        .enumerate()
        .for_each(|(q, chirp)| {
            let tx = q % cfg.num_tx;
            for (r, row) in chirp.chunks_mut(samples).enumerate() {
                let position = tx as f64 * cfg.tx_spacing_wavelengths
                    + r as f64 * cfg.rx_spacing_wavelengths;
                for term in &terms {
                    // Phases are reduced mod 1 cycle before scaling by 2*pi.
                    let base = (term.per_chirp * q as f64 + position * term.spatial).rem_euclid(1.0);
                    for (k, v) in row.iter_mut().enumerate() {
                        let cycles = (term.per_sample * k as f64).rem_euclid(1.0) + base;
                        *v += Complex64::from_polar(term.amplitude, 2.0 * PI * cycles);
                    }
                }
            }
        });

    if noise.noise_power > 0.0 {
        let mut rng = ChaCha8Rng::seed_from_u64(noise.seed ^ frame_index);
        let sigma = (noise.noise_power / 2.0).sqrt();
        for v in data.iter_mut() {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            *v += Complex64::new(sigma * re, sigma * im);
        }
    }

    Ok(DataCube::new(*cfg, frame_index, data).expect("shape and finiteness by construction"))
}

/// Targets in effect at `frame`: the latest scene entry at or before it.
pub fn targets_at(scene: &[SceneFrame], frame: u64) -> &[PointTarget] {
    scene
        .iter()
        .filter(|s| s.frame <= frame)
        .max_by_key(|s| s.frame)
        .map(|s| s.targets.as_slice())
        .unwrap_or(&[])
}

/// Synthesizes frames `0..n_frames`; frames are independent and built in
/// parallel.
pub fn synthesize_capture(
    cfg: &ValidatedConfig,
    scene: &[SceneFrame],
    noise: &NoiseSpec,
    n_frames: usize,
) -> Result<Vec<DataCube>, SimError> {
    if n_frames == 0 {
        return Err(SimError::NoFrames);
    }
    (0..n_frames as u64)
        .into_par_iter()
        .map(|f| synthesize_frame(cfg, targets_at(scene, f), noise, f))
        .collect()
}

/// Serializes cubes into the capture byte stream and splits it into
/// sequenced packets of `payload_bytes` (the last may be short).
pub fn packetize(cubes: &[DataCube], payload_bytes: usize) -> Vec<CapturePacket> {
    assert!(
        payload_bytes > 0 && payload_bytes % 4 == 0,
        "payload_bytes must be a positive multiple of 4"
    );
    let stream: Vec<u8> = cubes.iter().flat_map(serialize_cube).collect();
    stream
        .chunks(payload_bytes)
        .enumerate()
        .map(|(i, chunk)| CapturePacket {
            seq: i as u32,
            byte_offset: (i * payload_bytes) as u64,
            payload: chunk.to_vec(),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::RadarConfig;

    fn c0() -> ValidatedConfig {
        RadarConfig::reference().validate().unwrap()
    }

    fn small() -> ValidatedConfig {
        RadarConfig {
            num_tx: 2,
            num_rx: 4,
            chirps_per_frame_per_tx: 8,
            samples_per_chirp: 32,
            ..RadarConfig::reference()
        }
        .validate()
        .unwrap()
    }

    /// Direct evaluation of the beat model for one sample.
    fn oracle(cfg: &ValidatedConfig, t: &PointTarget, q: usize, r: usize, k: usize) -> Complex64 {
        let fb = 2.0 * cfg.chirp_slope_hz_per_s * t.range_m / SPEED_OF_LIGHT;
        let fd = 2.0 * t.radial_velocity_m_s * cfg.start_freq_hz / SPEED_OF_LIGHT;
        let tx = q % cfg.num_tx;
        let d = tx as f64 * cfg.tx_spacing_wavelengths + r as f64 * cfg.rx_spacing_wavelengths;
        let phase = 2.0
            * PI
            * (fb * k as f64 / cfg.sample_rate_hz
                + fd * q as f64 * cfg.chirp_period_s
                + d * t.azimuth_deg.to_radians().sin());
        Complex64::from_polar(t.amplitude, phase)
    }

    #[test]
    fn empty_scene_is_zero() {
        let cube = synthesize_frame(&c0(), &[], &NoiseSpec::none(), 0).unwrap();
        assert!(cube.samples().iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn matches_beat_model() {
        let cfg = small();
        let t = PointTarget::new(7.3, -3.1, 12.0, 2.5);
        let cube = synthesize_frame(&cfg, &[t], &NoiseSpec::none(), 0).unwrap();
        for ((q, r, k), v) in cube.samples().indexed_iter() {
            let want = oracle(&cfg, &t, q, r, k);
            assert!((v - want).norm() < 1e-9, "({q},{r},{k}) {v} vs {want}");
        }
    }

    #[test]
    fn unit_target_has_unit_magnitude() {
        let cube =
            synthesize_frame(&small(), &[PointTarget::new(3.0, 1.0, -40.0, 1.0)], &NoiseSpec::none(), 0)
                .unwrap();
        assert!(cube.samples().iter().all(|v| (v.norm() - 1.0).abs() < 1e-12));
    }

    #[test]
    fn adjacent_rx_phase_ratio_at_30_deg() {
        let cube =
            synthesize_frame(&small(), &[PointTarget::new(10.0, 0.0, 30.0, 1.0)], &NoiseSpec::none(), 0)
                .unwrap();
        let s = cube.samples();
        let ratio = s[[0, 1, 0]] / s[[0, 0, 0]];
        // exp(j*pi*sin 30) = exp(j*pi/2)
        assert!((ratio - Complex64::new(0.0, 1.0)).norm() < 1e-12);
    }

    #[test]
    fn linear_in_targets() {
        let cfg = small();
        let a = [PointTarget::new(5.0, 2.0, 10.0, 1.0)];
        let b = [PointTarget::new(12.0, -1.5, -25.0, 0.7), PointTarget::new(20.0, 0.0, 0.0, 3.0)];
        let both: Vec<_> = a.iter().chain(&b).copied().collect();
        let n = NoiseSpec::none();
        let sa = synthesize_frame(&cfg, &a, &n, 0).unwrap();
        let sb = synthesize_frame(&cfg, &b, &n, 0).unwrap();
        let sab = synthesize_frame(&cfg, &both, &n, 0).unwrap();
        for ((x, y), z) in sa.samples().iter().zip(sb.samples()).zip(sab.samples()) {
            assert!((x + y - z).norm() <= 1e-12 * z.norm().max(1.0));
        }
    }

    #[test]
    fn rejects_targets_outside_limits() {
        let cfg = c0();
        let d = cfg.derived();
        let bad = [
            PointTarget::new(d.max_range_m + 1.0, 0.0, 0.0, 1.0),
            PointTarget::new(0.0, 0.0, 0.0, 1.0),
            PointTarget::new(10.0, d.max_unambiguous_velocity_m_s, 0.0, 1.0),
            PointTarget::new(10.0, 0.0, 90.0, 1.0),
            PointTarget::new(10.0, 0.0, 0.0, 0.0),
        ];
        for t in bad {
            assert!(matches!(
                synthesize_frame(&cfg, &[t], &NoiseSpec::none(), 0),
                Err(SimError::Target { index: 0, .. })
            ));
        }
    }

    #[test]
    fn noise_is_seeded_per_frame() {
        let cfg = small();
        let noise = NoiseSpec { noise_power: 2.0, seed: 42 };
        let a = synthesize_frame(&cfg, &[], &noise, 3).unwrap();
        let b = synthesize_frame(&cfg, &[], &noise, 3).unwrap();
        let c = synthesize_frame(&cfg, &[], &noise, 4).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.samples(), c.samples());
        let mean_power =
            a.samples().iter().map(|v| v.norm_sqr()).sum::<f64>() / a.samples().len() as f64;
        assert!((mean_power - 2.0).abs() < 0.3, "{mean_power}");
    }

    #[test]
    fn static_capture_frames_identical() {
        let cfg = small();
        let scene = [SceneFrame { frame: 0, targets: vec![PointTarget::new(9.0, 0.0, 5.0, 1.0)] }];
        let cubes = synthesize_capture(&cfg, &scene, &NoiseSpec::none(), 3).unwrap();
        assert_eq!(cubes.len(), 3);
        assert_eq!(cubes[1].samples(), cubes[0].samples());
        assert_eq!(cubes[2].samples(), cubes[0].samples());
        assert_eq!(cubes[2].frame_index(), 2);
        assert!(matches!(
            synthesize_capture(&cfg, &scene, &NoiseSpec::none(), 0),
            Err(SimError::NoFrames)
        ));
    }

    #[test]
    fn scene_entries_apply_forward() {
        let t1 = vec![PointTarget::new(1.0, 0.0, 0.0, 1.0)];
        let t2 = vec![PointTarget::new(2.0, 0.0, 0.0, 1.0)];
        let scene = [SceneFrame { frame: 2, targets: t2.clone() }, SceneFrame { frame: 0, targets: t1.clone() }];
        assert_eq!(targets_at(&scene, 0), t1.as_slice());
        assert_eq!(targets_at(&scene, 1), t1.as_slice());
        assert_eq!(targets_at(&scene, 5), t2.as_slice());
        assert!(targets_at(&scene[..1], 1).is_empty());
    }

    #[test]
    fn packetize_reference_frame() {
        let cfg = c0();
        let cube = DataCube::zeros(cfg, 0);
        let packets = packetize(&[cube], 1456);
        assert_eq!(packets.len(), 721);
        assert_eq!(packets.last().unwrap().payload.len(), 256);
        assert!(packets.iter().enumerate().all(|(i, p)| p.seq as usize == i));
        let mut offset = 0;
        for p in &packets {
            assert_eq!(p.byte_offset, offset);
            offset += p.payload.len() as u64;
        }
        assert!(packetize(&[], 1456).is_empty());
    }

    #[test]
    fn packetize_round_trip() {
        let cfg = small();
        let noise = NoiseSpec { noise_power: 400.0, seed: 1 };
        let targets = [PointTarget::new(4.0, 1.0, 15.0, 300.0)];
        let cubes: Vec<_> = (0..2)
            .map(|f| synthesize_frame(&cfg, &targets, &noise, f).unwrap().quantized())
            .collect();
        let (bytes, report) = crate::capture::reassemble(packetize(&cubes, 100), 1).unwrap();
        assert_eq!(report.packets_dropped, 0);
        let fb = cfg.frame_bytes();
        for (f, cube) in cubes.iter().enumerate() {
            let back = crate::capture::deinterleave(&bytes[f * fb..(f + 1) * fb], &cfg, f as u64).unwrap();
            assert_eq!(&back, cube);
        }
    }
}
