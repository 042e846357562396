use ndarray::{Array3, Axis};
use num_complex::Complex64;
use rayon::prelude::*;

use super::{window, SpectrumError, WindowKind};
use crate::config::ValidatedConfig;
use crate::cube::DataCube;
use crate::fft;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RangeOptions {
    /// Zero-pad the sample axis to the next power of two before the FFT.
    pub pad_pow2: bool,
}

/// Range spectra indexed `(chirp, rx, range_bin)`, chirps still in
/// transmission order.
#[derive(Debug, Clone, PartialEq)]
pub struct RangeCube {
    data: Array3<Complex64>,
    config: ValidatedConfig,
    frame_index: u64,
}

impl RangeCube {
    /// Wraps externally produced spectra. The rx axis must match the config.
    pub fn from_parts(
        data: Array3<Complex64>,
        config: ValidatedConfig,
        frame_index: u64,
    ) -> Result<Self, SpectrumError> {
        let (_, rx, bins) = data.dim();
        if rx != config.num_rx || bins == 0 {
            return Err(SpectrumError::Shape(format!(
                "range cube {:?} needs {} rx and at least one bin",
                data.dim(),
                config.num_rx
            )));
        }
        Ok(Self {
            data,
            config,
            frame_index,
        })
    }

    pub fn data(&self) -> &Array3<Complex64> {
        &self.data
    }

    pub fn config(&self) -> &ValidatedConfig {
        &self.config
    }

    pub fn frame_index(&self) -> u64 {
        self.frame_index
    }

    pub fn fft_len(&self) -> usize {
        self.data.dim().2
    }
}

pub fn range_processing(cube: &DataCube, kind: WindowKind) -> RangeCube {
    range_processing_with(cube, kind, RangeOptions::default())
}

/// Windows each `(chirp, rx)` row over samples and FFTs it. Range is
/// one-sided, so no shift is applied.
pub fn range_processing_with(cube: &DataCube, kind: WindowKind, opts: RangeOptions) -> RangeCube {
    let cfg = *cube.config();
    let n_s = cfg.samples_per_chirp;
    let n_fft = if opts.pad_pow2 { n_s.next_power_of_two() } else { n_s };
    // Valid configs have N_s >= 2.
    let w = window(kind, n_s).expect("validated sample count");

    let (chirps, rx, _) = cube.samples().dim();
    let mut data = Array3::<Complex64>::zeros((chirps, rx, n_fft));
    for (mut out, src) in data
        .lanes_mut(Axis(2))
        .into_iter()
        .zip(cube.samples().lanes(Axis(2)))
    {
        for k in 0..n_s {
            out[k] = src[k] * w[k];
        }
    }
    fft::transform_lanes(
        &fft::forward(n_fft),
        data.as_slice_mut().expect("standard layout"),
    );
    RangeCube {
        data,
        config: cfg,
        frame_index: cube.frame_index(),
    }
}

/// Range-Doppler spectra indexed `(doppler, virtual_rx, range_bin)`.
///
/// The Doppler axis is shifted: index `i` is centered bin `i - n/2`.
#[derive(Debug, Clone, PartialEq)]
pub struct RangeDopplerCube {
    data: Array3<Complex64>,
    config: ValidatedConfig,
    frame_index: u64,
    deinterleaved: bool,
}

impl RangeDopplerCube {
    pub fn data(&self) -> &Array3<Complex64> {
        &self.data
    }

    pub fn config(&self) -> &ValidatedConfig {
        &self.config
    }

    pub fn frame_index(&self) -> u64 {
        self.frame_index
    }

    pub fn num_doppler(&self) -> usize {
        self.data.dim().0
    }

    pub fn num_virtual(&self) -> usize {
        self.data.dim().1
    }

    pub fn range_fft_len(&self) -> usize {
        self.data.dim().2
    }

    /// Whether the virtual axis is `tx * num_rx + rx` (true) or just `rx`.
    pub fn deinterleaved(&self) -> bool {
        self.deinterleaved
    }

    pub fn centered_bin(&self, index: usize) -> i64 {
        index as i64 - (self.num_doppler() / 2) as i64
    }

    pub fn index_of(&self, centered: i64) -> Option<usize> {
        let i = centered + (self.num_doppler() / 2) as i64;
        (0..self.num_doppler() as i64).contains(&i).then_some(i as usize)
    }

    /// Same metadata, new samples of the same shape.
    pub(crate) fn with_data(&self, data: Array3<Complex64>) -> Self {
        debug_assert_eq!(data.dim(), self.data.dim());
        Self {
            data,
            config: self.config,
            frame_index: self.frame_index,
            deinterleaved: self.deinterleaved,
        }
    }

    /// The `num_virtual` snapshot at one cell.
    pub fn snapshot(&self, doppler_index: usize, range_bin: usize) -> Vec<Complex64> {
        self.data
            .slice(ndarray::s![doppler_index, .., range_bin])
            .to_vec()
    }
}

/// Regroups chirps into slow-time sequences, windows and FFTs them, and
/// centers the Doppler axis.
///
/// With `tx_deinterleave`, chirp `l * num_tx + t` of rx `r` becomes slow-time
/// sample `l` of virtual element `t * num_rx + r`. Without it every chirp is a
/// slow-time sample of its rx.
pub fn doppler_processing(
    range_cube: &RangeCube,
    kind: WindowKind,
    tx_deinterleave: bool,
) -> Result<RangeDopplerCube, SpectrumError> {
    let cfg = range_cube.config;
    let (chirps, num_rx, bins) = range_cube.data.dim();
    let groups = if tx_deinterleave { cfg.num_tx } else { 1 };
    if chirps % groups != 0 {
        return Err(SpectrumError::Shape(format!(
            "{chirps} chirps not divisible by {groups} transmitters"
        )));
    }
    let slow = chirps / groups;
    let w = window(kind, slow)?;
    let virtual_count = groups * num_rx;

    // Gather into (virtual, range, slow) so each slow-time lane is contiguous.
    let mut lanes = vec![Complex64::new(0.0, 0.0); virtual_count * bins * slow];
    let src = &range_cube.data;
    lanes
        .par_chunks_mut(bins * slow)
        .enumerate()
        .for_each(|(v, block)| {
            let (t, r) = (v / num_rx, v % num_rx);
            for (b, lane) in block.chunks_mut(slow).enumerate() {
                for (l, out) in lane.iter_mut().enumerate() {
                    *out = src[[l * groups + t, r, b]] * w[l];
                }
            }
        });
    fft::transform_lanes(&fft::forward(slow), &mut lanes);

    let shift = slow - slow / 2;
    let mut data = Array3::<Complex64>::zeros((slow, virtual_count, bins));
    data.as_slice_mut()
        .expect("standard layout")
        .par_chunks_mut(virtual_count * bins)
        .enumerate()
        .for_each(|(i, plane)| {
            let d = (i + shift) % slow;
            for (j, out) in plane.iter_mut().enumerate() {
                *out = lanes[j * slow + d];
            }
        });

    Ok(RangeDopplerCube {
        data,
        config: cfg,
        frame_index: range_cube.frame_index,
        deinterleaved: tx_deinterleave,
    })
}
