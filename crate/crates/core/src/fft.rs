//! Shared FFT plumbing: cached plans and lane-parallel transforms.

use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

pub(crate) fn forward(n: usize) -> Arc<dyn Fft<f64>> {
    FftPlanner::new().plan_fft_forward(n)
}

pub(crate) fn inverse(n: usize) -> Arc<dyn Fft<f64>> {
    FftPlanner::new().plan_fft_inverse(n)
}

/// Transforms every contiguous lane of `fft.len()` points in place, lanes in
/// parallel. Each lane is independent, so the result does not depend on the
/// thread count.
pub(crate) fn transform_lanes(fft: &Arc<dyn Fft<f64>>, data: &mut [Complex64]) {
    let n = fft.len();
    debug_assert_eq!(data.len() % n, 0);
    let scratch_len = fft.get_inplace_scratch_len();
    data.par_chunks_mut(n).for_each_init(
        || vec![Complex64::new(0.0, 0.0); scratch_len],
        |scratch, lane| fft.process_with_scratch(lane, scratch),
    );
}

/// Output index `i` holds input index `(i + n - n/2) % n`, so index `n/2`
/// holds the DC term.
pub fn fftshift<T: Clone>(data: &[T]) -> Vec<T> {
    let n = data.len();
    (0..n).map(|i| data[(i + n - n / 2) % n].clone()).collect()
}

/// Inverse of [`fftshift`] for any length.
pub fn ifftshift<T: Clone>(data: &[T]) -> Vec<T> {
    let n = data.len();
    (0..n).map(|i| data[(i + n / 2) % n].clone()).collect()
}
