use ndarray::Array3;
use num_complex::Complex64;

use super::CaptureError;
use crate::config::ValidatedConfig;
use crate::cube::{cube_shape, DataCube};

fn to_i16(x: f64) -> i16 {
    x.round().clamp(i16::MIN as f64, i16::MAX as f64) as i16
}

/// Encodes a cube in the capture layout, rounding to nearest and
/// saturating to int16.
pub fn serialize_cube(cube: &DataCube) -> Vec<u8> {
    let mut out = Vec::with_capacity(cube.config().frame_bytes());
    for v in cube.samples().iter() {
        out.extend_from_slice(&to_i16(v.re).to_le_bytes());
        out.extend_from_slice(&to_i16(v.im).to_le_bytes());
    }
    out
}

/// Decodes one frame of the capture layout into a cube.
pub fn deinterleave(
    bytes: &[u8],
    cfg: &ValidatedConfig,
    frame_index: u64,
) -> Result<DataCube, CaptureError> {
    let expected = cfg.frame_bytes();
    if bytes.len() != expected {
        return Err(CaptureError::Size {
            expected,
            actual: bytes.len(),
        });
    }
    let samples: Vec<Complex64> = bytes
        .chunks_exact(4)
        .map(|c| {
            let i = i16::from_le_bytes([c[0], c[1]]);
            let q = i16::from_le_bytes([c[2], c[3]]);
            Complex64::new(i as f64, q as f64)
        })
        .collect();
    let data = Array3::from_shape_vec(cube_shape(cfg), samples).expect("length checked above");
    Ok(DataCube::new(*cfg, frame_index, data).expect("int16 samples are finite"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::RadarConfig;
    use proptest::prelude::*;

    fn cfg(tx: usize, rx: usize, chirps: usize, samples: usize) -> ValidatedConfig {
        RadarConfig {
            num_tx: tx,
            num_rx: rx,
            chirps_per_frame_per_tx: chirps,
            samples_per_chirp: samples,
            ..RadarConfig::reference()
        }
        .validate()
        .unwrap()
    }

    #[test]
    fn zero_bytes_give_zero_cube() {
        let c = cfg(1, 2, 3, 4);
        let cube = deinterleave(&vec![0; c.frame_bytes()], &c, 0).unwrap();
        assert!(cube.samples().iter().all(|v| *v == Complex64::new(0.0, 0.0)));
    }

    #[test]
    fn first_slot_is_i_then_q() {
        let c = cfg(1, 1, 1, 2);
        let mut bytes = vec![0u8; c.frame_bytes()];
        bytes[0..2].copy_from_slice(&1i16.to_le_bytes());
        bytes[2..4].copy_from_slice(&(-2i16).to_le_bytes());
        let cube = deinterleave(&bytes, &c, 0).unwrap();
        assert_eq!(cube.samples()[[0, 0, 0]], Complex64::new(1.0, -2.0));
    }

    #[test]
    fn sample_order_is_chirp_rx_sample() {
        let c = cfg(1, 2, 2, 2);
        let mut bytes = vec![0u8; c.frame_bytes()];
        // slot index of (chirp 1, rx 0, sample 1) = 1*4 + 0*2 + 1 = 5
        bytes[5 * 4..5 * 4 + 2].copy_from_slice(&7i16.to_le_bytes());
        let cube = deinterleave(&bytes, &c, 0).unwrap();
        assert_eq!(cube.samples()[[1, 0, 1]].re, 7.0);
    }

    #[test]
    fn wrong_length_is_size_error() {
        let c = cfg(1, 1, 1, 2);
        match deinterleave(&[0; 7], &c, 0) {
            Err(CaptureError::Size { expected: 8, actual: 7 }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    proptest! {
        #[test]
        fn deinterleave_inverts_serialize(
            tx in 1usize..3, rx in 1usize..4, chirps in 1usize..4, samples in 2usize..9,
            seed in any::<u64>(),
        ) {
            let c = cfg(tx, rx, chirps, samples);
            let mut state = seed;
            let data = Array3::from_shape_fn(cube_shape(&c), |_| {
                state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                let i = (state >> 48) as u16 as i16;
                let q = (state >> 32) as u16 as i16;
                Complex64::new(i as f64, q as f64)
            });
            let cube = DataCube::new(c, 3, data).unwrap();
            let back = deinterleave(&serialize_cube(&cube), &c, 3).unwrap();
            prop_assert_eq!(back, cube);
        }
    }
}
